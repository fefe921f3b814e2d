// Copyright 2026 The usolv Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "usolv/lts.hpp"

using namespace usolv;

namespace {

Action act(ActKind k, const std::string& n = "") {
    Action a;
    a.kind = k;
    a.name = n;
    return a;
}

TermPtr pin(const std::string& n, TermPtr k) { return mk_prefix(act(ActKind::Input, n), std::move(k)); }
TermPtr pout(const std::string& n, TermPtr k) { return mk_prefix(act(ActKind::Output, n), std::move(k)); }
TermPtr ptau(TermPtr k) { return mk_prefix(act(ActKind::Tau), std::move(k)); }

Env env_of(const std::string& text) {
    ParseResult r = parse_program(text);
    REQUIRE(r.program.has_value());
    REQUIRE(!has_errors(r.diags));
    DesugarResult d = desugar_values(*r.program);
    REQUIRE(d.program.has_value());
    return Env(*d.program);
}

// A bare-bones Lts for algorithms that only look at the graph.
Lts graph(int n, std::vector<Transition> edges) {
    Lts l;
    for (int i = 0; i < n; ++i) {
        l.states.push_back(mk_nil());
        l.state_text.push_back("s" + std::to_string(i));
    }
    l.out.resize(n);
    for (auto& e : edges) l.out[e.src].push_back(e);
    return l;
}

}  // namespace

TEST_CASE("steps of a communication, tau first and deterministic") {
    Env env;
    TermPtr t = mk_par(pin("a", mk_nil()), pout("a", mk_nil()));
    std::vector<Step> ss = step(t, env);
    REQUIRE(ss.size() == 3);
    CHECK(ss[0].label == Label::tau());
    CHECK(term_eq(ss[0].target, mk_par(mk_nil(), mk_nil())));
    CHECK(ss[0].sol_unfold_count == 0);
    CHECK(ss[1].label == Label::in("a"));
    CHECK(term_eq(ss[1].target, mk_par(mk_nil(), pout("a", mk_nil()))));
    CHECK(ss[2].label == Label::out("a"));
    CHECK(term_eq(ss[2].target, mk_par(pin("a", mk_nil()), mk_nil())));
}

TEST_CASE("equal parallel components are stepped through one representative") {
    Env env;
    TermPtr t = mk_par(pin("a", mk_nil()), pin("a", mk_nil()));
    std::vector<Step> ss = step(t, env);
    // One placement for the two interchangeable components.
    REQUIRE(ss.size() == 1);
    CHECK(ss[0].label == Label::in("a"));
    CHECK(term_eq(ss[0].target, mk_par(mk_nil(), pin("a", mk_nil()))));
}

TEST_CASE("unfolding a solution constant is counted, a plain one is not") {
    Env env;
    ConstDef plain;
    plain.name = "K";
    plain.body = pin("a", mk_const("K"));
    env.add_const(plain);
    ConstDef sol;
    sol.name = "#sol.S.X";
    sol.body = pin("a", mk_const("#sol.S.X"));
    sol.solution = true;
    env.add_const(sol);

    std::vector<Step> sp = step(mk_const("K"), env);
    REQUIRE(sp.size() == 1);
    CHECK(sp[0].sol_unfold_count == 0);

    std::vector<Step> sq = step(mk_const("#sol.S.X"), env);
    REQUIRE(sq.size() == 1);
    CHECK(sq[0].label == Label::in("a"));
    CHECK(sq[0].sol_unfold_count == 1);

    // A communication derived from two solution unfoldings sums the counts.
    ConstDef co;
    co.name = "#sol.S.Y";
    co.body = pout("a", mk_const("#sol.S.Y"));
    co.solution = true;
    env.add_const(co);
    std::vector<Step> sc = step(mk_par(mk_const("#sol.S.X"), mk_const("#sol.S.Y")), env);
    REQUIRE(!sc.empty());
    CHECK(sc[0].label == Label::tau());
    CHECK(sc[0].sol_unfold_count == 2);
}

TEST_CASE("stepping an unguarded constant loop is rejected") {
    Env env;
    ConstDef d;
    d.name = "K";
    d.body = mk_const("K");
    env.add_const(d);
    CHECK_THROWS_AS((void)step(mk_const("K"), env), std::logic_error);
}

TEST_CASE("restriction blocks restricted actions but lets the synchronization through") {
    Env env;
    TermPtr t = mk_res("a", mk_par(pin("a", mk_nil()), pout("a", mk_nil())));
    std::vector<Step> ss = step(t, env);
    REQUIRE(ss.size() == 1);
    CHECK(ss[0].label == Label::tau());
    CHECK(step(mk_res("a", pin("a", mk_nil())), env).empty());
    // Unrelated actions pass through.
    std::vector<Step> sb = step(mk_res("a", pin("b", mk_nil())), env);
    REQUIRE(sb.size() == 1);
    CHECK(sb[0].label == Label::in("b"));
}

TEST_CASE("canonicalize: parallel is associative, commutative, with unit 0") {
    Env env;
    TermPtr a = pin("a", mk_nil()), b = pin("b", mk_nil()), c = pin("c", mk_nil());
    CHECK(term_eq(canonicalize(mk_par(a, mk_nil()), env), canonicalize(a, env)));
    CHECK(term_eq(canonicalize(mk_par(mk_nil(), a), env), canonicalize(a, env)));
    CHECK(term_eq(canonicalize(mk_par(a, b), env), canonicalize(mk_par(b, a), env)));
    CHECK(term_eq(canonicalize(mk_par(mk_par(a, b), c), env),
                  canonicalize(mk_par(a, mk_par(b, c)), env)));
    // Duplicates are kept: P | P is not P.
    CHECK(!term_eq(canonicalize(mk_par(a, a), env), canonicalize(a, env)));
}

TEST_CASE("canonicalize: sums are sorted, duplicates kept, singletons collapsed") {
    Env env;
    TermPtr a = pin("a", mk_nil()), b = pin("b", mk_nil());
    CHECK(term_eq(canonicalize(mk_sum({a, b}), env), canonicalize(mk_sum({b, a}), env)));
    CHECK(!term_eq(canonicalize(mk_sum({a, a}), env), canonicalize(a, env)));
    CHECK(term_eq(canonicalize(mk_sum({a}), env), canonicalize(a, env)));
}

TEST_CASE("canonicalize: vacuous and duplicate restrictions vanish, binders sort") {
    Env env;
    TermPtr body = mk_par(pin("a", mk_nil()), pin("b", mk_nil()));
    CHECK(term_eq(canonicalize(mk_res("c", pin("a", mk_nil())), env),
                  canonicalize(pin("a", mk_nil()), env)));
    CHECK(term_eq(canonicalize(mk_res("a", mk_res("a", pin("a", mk_nil()))), env),
                  canonicalize(mk_res("a", pin("a", mk_nil())), env)));
    CHECK(term_eq(canonicalize(mk_res("b", mk_res("a", body)), env),
                  canonicalize(mk_res("a", mk_res("b", body)), env)));
    // A restriction that still binds something stays.
    TermPtr kept = canonicalize(mk_res("a", pin("a", mk_nil())), env);
    CHECK(!term_eq(kept, canonicalize(pin("a", mk_nil()), env)));
}

TEST_CASE("free names look through recursive constants to a fixpoint") {
    Env env = env_of("const W = a.(new a in (W | 'a.0));");
    CHECK(env.free_names(mk_const("W")) == std::set<std::string>{"a"});
    // So a restriction on a name the constant never uses is dropped...
    CHECK(term_eq(canonicalize(mk_res("b", mk_const("W")), env), mk_const("W")));
    // ...and one on a name it does use is kept.
    TermPtr kept = canonicalize(mk_res("a", mk_const("W")), env);
    CHECK(kept->kind == TermKind::Res);
}

TEST_CASE("canonicalize collapses a spent parallel context around a constant") {
    Env env = env_of("const K = b.K;");
    TermPtr t = mk_res("a", mk_par(mk_const("K"), mk_nil()));
    CHECK(term_eq(canonicalize(t, env), mk_const("K")));
}

TEST_CASE("exploring a three-state loop is complete and ordered") {
    Env env = env_of("const K = tau.a.a.K;");
    Lts l = explore(mk_const("K"), env);
    CHECK(l.complete);
    REQUIRE(l.num_states() == 3);
    CHECK(l.initial == 0);
    CHECK(l.state_text[0] == "K");
    CHECK(l.num_transitions() == 3);
    REQUIRE(l.out[0].size() == 1);
    CHECK(l.out[0][0].label == Label::tau());
    int s1 = l.out[0][0].dst;
    REQUIRE(l.out[s1].size() == 1);
    CHECK(l.out[s1][0].label == Label::in("a"));
    int s2 = l.out[s1][0].dst;
    REQUIRE(l.out[s2].size() == 1);
    CHECK(l.out[s2][0].dst == 0);
}

TEST_CASE("the state bound truncates exploration and is reported") {
    Env env = env_of("const K = tau.a.a.K;");
    Lts l0 = explore(mk_const("K"), env, 0);
    CHECK(l0.num_states() == 1);
    CHECK(!l0.complete);
    Lts l2 = explore(mk_const("K"), env, 2);
    CHECK(l2.num_states() == 2);
    CHECK(!l2.complete);
    Lts l3 = explore(mk_const("K"), env, 3);
    CHECK(l3.complete);
}

TEST_CASE("pair exploration shares the state space") {
    Env env = env_of("const K = tau.a.a.K;");
    PairLts p = explore_pair(mk_const("K"), mk_const("K"), env);
    CHECK(p.init_a == p.init_b);
    CHECK(p.lts.num_states() == 3);

    PairLts q = explore_pair(ptau(pin("a", mk_nil())), pin("a", mk_nil()), env);
    CHECK(q.init_a != q.init_b);
    CHECK(q.lts.complete);
    // 0 is shared between the two sides.
    CHECK(q.lts.num_states() == 3);
}

TEST_CASE("saturation reifies weak moves across tau chains") {
    Env env = env_of("const K = tau.a.a.K;");
    Lts l = explore(mk_const("K"), env);
    // Name the states by shape rather than assuming indices.
    int sK = l.initial;
    int sAA = l.out[sK][0].dst;
    int sA = l.out[sAA][0].dst;
    WeakLts w = saturate(l);
    CHECK(w.n == 3);
    REQUIRE(w.alphabet.size() == 1);
    CHECK(w.alphabet[0] == Label::in("a"));
    CHECK(w.tau_closure[sK].get(sK));
    CHECK(w.tau_closure[sK].get(sAA));
    CHECK(!w.tau_closure[sAA].get(sK));
    const std::vector<Bits>& va = w.vis[0];
    CHECK(va[sK].get(sA));
    CHECK(!va[sK].get(sK));
    CHECK(va[sAA].get(sA));
    // From a.K, one a reaches K and then the tau closure adds a.a.K.
    CHECK(va[sA].get(sK));
    CHECK(va[sA].get(sAA));
    CHECK(!va[sA].get(sA));
}

TEST_CASE("saturation refuses truncated graphs") {
    Env env = env_of("const K = tau.a.a.K;");
    Lts l = explore(mk_const("K"), env, 2);
    CHECK_THROWS_AS((void)saturate(l), TruncatedError);
}

TEST_CASE("tau components come out in reverse topological order") {
    // Two tau cycles {0,1} -> {2,3}, plus an isolated state 4.
    Lts l = graph(5, {
                         {0, Label::tau(), 1, 0},
                         {1, Label::tau(), 0, 0},
                         {1, Label::tau(), 2, 0},
                         {2, Label::tau(), 3, 0},
                         {3, Label::tau(), 2, 0},
                         {3, Label::in("a"), 4, 0},
                     });
    int num = 0;
    std::vector<int> comp = tau_components(l, &num);
    CHECK(num == 3);
    CHECK(comp[0] == comp[1]);
    CHECK(comp[2] == comp[3]);
    CHECK(comp[2] < comp[0]);  // every tau edge out points to a smaller id
    for (int c : comp) {
        CHECK(c >= 0);
        CHECK(c < num);
    }
    // Visible edges do not merge components.
    CHECK(comp[4] != comp[3]);
}

TEST_CASE("dot and json exports carry the essentials") {
    Env env = env_of("const K = tau.a.a.K;");
    Lts l = explore(mk_const("K"), env);
    std::ostringstream os;
    write_dot(os, l);
    std::string dot = os.str();
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("dashed") != std::string::npos);       // the tau edge
    CHECK(dot.find("peripheries=2") != std::string::npos);  // the initial state

    nlohmann::ordered_json j = lts_json(l);
    CHECK(j["states"].size() == 3);
    CHECK(j["initial"] == 0);
    CHECK(j["complete"] == true);
    REQUIRE(j["transitions"].size() == 3);
    for (const auto& t : j["transitions"]) {
        CHECK(t.contains("src"));
        CHECK(t.contains("label"));
        CHECK(t.contains("dst"));
        CHECK(t.contains("count"));
    }
}

TEST_CASE("exploration is deterministic across runs") {
    Env env = env_of("const D = a.D + 'a.D + d.(D | D);");
    Lts l1 = explore(mk_const("D"), env, 150);
    Lts l2 = explore(mk_const("D"), env, 150);
    REQUIRE(l1.num_states() == l2.num_states());
    CHECK(l1.state_text == l2.state_text);
    REQUIRE(l1.num_transitions() == l2.num_transitions());
    for (size_t s = 0; s < l1.out.size(); ++s) {
        REQUIRE(l1.out[s].size() == l2.out[s].size());
        for (size_t i = 0; i < l1.out[s].size(); ++i) {
            CHECK(l1.out[s][i].label == l2.out[s][i].label);
            CHECK(l1.out[s][i].dst == l2.out[s][i].dst);
            CHECK(l1.out[s][i].count == l2.out[s][i].count);
        }
    }
}
