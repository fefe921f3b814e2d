// Copyright 2026 The usolv Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "usolv/equiv.hpp"

using namespace usolv;

namespace {

struct World {
    Program prog;
    Env env;
};

World world(const std::string& text) {
    ParseResult r = parse_program(text);
    REQUIRE(r.program.has_value());
    REQUIRE(!has_errors(r.diags));
    DesugarResult d = desugar_values(*r.program);
    REQUIRE(d.program.has_value());
    return {*d.program, Env(*d.program)};
}

TermPtr tt(const World& w, const std::string& text) {
    ParseTermResult r = parse_term(text, w.prog);
    REQUIRE(r.term != nullptr);
    REQUIRE(!has_errors(r.diags));
    return r.term;
}

}  // namespace

TEST_CASE("weak bisimilarity absorbs leading internal moves") {
    World w = world("");
    CHECK(weak_bisim(tt(w, "tau.a.0"), tt(w, "a.0"), w.env).related);
    CHECK(weak_bisim(tt(w, "tau.tau.a.0"), tt(w, "a.0"), w.env).related);
    CHECK(weak_bisim(tt(w, "a.0 | 0"), tt(w, "a.0"), w.env).related);
    CHECK(weak_bisim(tt(w, "a.0 + a.0"), tt(w, "a.0"), w.env).related);
    CHECK(!weak_bisim(tt(w, "a.0"), tt(w, "b.0"), w.env).related);
    CHECK(!weak_bisim(tt(w, "a.0"), tt(w, "0"), w.env).related);
}

TEST_CASE("weak bisimilarity is insensitive to unfolding recursive constants") {
    World w = world("const K = tau.a.a.K; const H = a.H;");
    CHECK(weak_bisim(tt(w, "K"), tt(w, "H"), w.env).related);
    CHECK(weak_bisim(tt(w, "K"), tt(w, "a.K"), w.env).related);
    CHECK(!weak_bisim(tt(w, "K"), tt(w, "a.0"), w.env).related);
}

TEST_CASE("the classic branching counterexample is distinguished with a minimal trail") {
    World w = world("");
    EquivResult r = weak_bisim(tt(w, "a.(b.0 + c.0)"), tt(w, "a.b.0 + a.c.0"), w.env);
    CHECK(!r.related);
    REQUIRE(r.trail.size() == 2);
    CHECK(r.trail[0] == Label::in("a"));
    CHECK(!r.explanation.empty());
    CHECK(r.trail_text().find("a") != std::string::npos);
}

TEST_CASE("weak simulation holds one way across the branching counterexample") {
    World w = world("");
    TermPtr merged = tt(w, "a.(b.0 + c.0)");
    TermPtr split = tt(w, "a.b.0 + a.c.0");
    CHECK(weak_sim(split, merged, w.env).related);
    CHECK(!weak_sim(merged, split, w.env).related);
    // Simulation both ways here still is not bisimilarity, but each side of
    // an actual bisimulation pair simulates the other.
    CHECK(weak_sim(tt(w, "tau.a.0"), tt(w, "a.0"), w.env).related);
    CHECK(weak_sim(tt(w, "a.0"), tt(w, "tau.a.0"), w.env).related);
}

TEST_CASE("trace inclusion reports a shortest missing trace") {
    World w = world("");
    EquivResult r = trace_relation(tt(w, "a.b.0"), tt(w, "a.0"), TraceMode::Inclusion, w.env);
    CHECK(!r.related);
    REQUIRE(r.trail.size() == 2);
    CHECK(r.trail[0] == Label::in("a"));
    CHECK(r.trail[1] == Label::in("b"));
    CHECK(trace_relation(tt(w, "a.0"), tt(w, "a.b.0"), TraceMode::Inclusion, w.env).related);
}

TEST_CASE("trace equality ignores branching and internal moves") {
    World w = world("");
    CHECK(trace_relation(tt(w, "a.(b.0 + c.0)"), tt(w, "a.b.0 + a.c.0"), TraceMode::Equality,
                         w.env)
              .related);
    CHECK(trace_relation(tt(w, "tau.a.tau.b.0"), tt(w, "a.b.0"), TraceMode::Equality, w.env)
              .related);
    CHECK(!trace_relation(tt(w, "a.b.0"), tt(w, "a.0"), TraceMode::Equality, w.env).related);
    // Equality fails even when only the right side is larger.
    CHECK(!trace_relation(tt(w, "a.0"), tt(w, "a.b.0"), TraceMode::Equality, w.env).related);
}

TEST_CASE("the preorder front end dispatches to the right relation") {
    World w = world("");
    TermPtr merged = tt(w, "a.(b.0 + c.0)");
    TermPtr split = tt(w, "a.b.0 + a.c.0");
    CHECK(preorder_holds(merged, split, PreorderKind::TraceInclusion, w.env).related);
    CHECK(!preorder_holds(merged, split, PreorderKind::WeakSimulation, w.env).related);
    CHECK(preorder_holds(split, merged, PreorderKind::WeakSimulation, w.env).related);
}

TEST_CASE("weak bisimilarity relates communication results to their contractions") {
    World w = world("");
    // new a in (a.b.0 | 'a.c.0) can only synchronize, then run b and c.
    CHECK(weak_bisim(tt(w, "new a in (a.b.0 | 'a.c.0)"), tt(w, "b.0 | c.0"), w.env).related);
    CHECK(weak_bisim(tt(w, "new a in (a.b.0 | 'a.0)"), tt(w, "b.0"), w.env).related);
}

TEST_CASE("state bounds surface as truncation errors") {
    World w = world("const G = a.(G | G);");
    CHECK_THROWS_AS((void)weak_bisim(tt(w, "G"), tt(w, "a.G"), w.env, 5), TruncatedError);
    CHECK_THROWS_AS((void)trace_relation(tt(w, "G"), tt(w, "a.G"), TraceMode::Inclusion, w.env, 5),
                    TruncatedError);
}

TEST_CASE("a correct tuple solves its system and a wrong one is pinpointed") {
    World w = world(
        "const K = tau.a.a.K; const H = a.H;\n"
        "system Loop { X = a.X; }\n");
    EquationSystem s = to_equation_system(w.prog.systems.at(0));

    SolutionCheck ok = check_solution(s, {tt(w, "K")}, w.env);
    CHECK(ok.all_ok);
    REQUIRE(ok.per_equation.size() == 1);
    CHECK(ok.per_equation[0].related);

    SolutionCheck bad = check_solution(s, {tt(w, "a.0")}, w.env);
    CHECK(!bad.all_ok);
    REQUIRE(bad.per_equation.size() == 1);
    CHECK(!bad.per_equation[0].related);
    CHECK(!bad.per_equation[0].explanation.empty());
}

TEST_CASE("solution checking substitutes the tuple into every body") {
    World w = world(
        "const P = a.b.P;\n"
        "system Pair { X = a.Y; Y = b.X; }\n");
    EquationSystem s = to_equation_system(w.prog.systems.at(0));
    // X := P, Y := b.P solves X = a.Y and Y = b.X.
    SolutionCheck ok = check_solution(s, {tt(w, "P"), tt(w, "b.P")}, w.env);
    CHECK(ok.all_ok);
    // Swapping the components breaks both equations.
    SolutionCheck bad = check_solution(s, {tt(w, "b.P"), tt(w, "P")}, w.env);
    CHECK(!bad.all_ok);
}

TEST_CASE("directional solution checks split the equivalence") {
    World w = world(
        "const N = a.0;\n"
        "system Loop { X = a.X; }\n");
    EquationSystem s = to_equation_system(w.prog.systems.at(0));
    // a.0 is below a.(a.0) in trace inclusion but not conversely.
    SolutionCheck below =
        check_solution_preorder(s, {tt(w, "N")}, PreorderKind::TraceInclusion,
                                SolutionSide::ComponentBelowBody, w.env);
    CHECK(below.all_ok);
    SolutionCheck above =
        check_solution_preorder(s, {tt(w, "N")}, PreorderKind::TraceInclusion,
                                SolutionSide::BodyBelowComponent, w.env);
    CHECK(!above.all_ok);
    REQUIRE(above.per_equation.size() == 1);
    REQUIRE(above.per_equation[0].trail.size() == 2);
}
