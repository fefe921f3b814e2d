// Copyright 2026 The usolv Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "usolv/equations.hpp"

using namespace usolv;

namespace {

EquationSystem sys(const std::string& text) {
    ParseResult r = parse_program(text);
    REQUIRE(r.program.has_value());
    REQUIRE(!has_errors(r.diags));
    DesugarResult d = desugar_values(*r.program);
    REQUIRE(d.program.has_value());
    REQUIRE(d.program->systems.size() == 1);
    return to_equation_system(d.program->systems[0]);
}

Action in(const std::string& n) {
    Action a;
    a.kind = ActKind::Input;
    a.name = n;
    return a;
}

TermPtr pfx(const std::string& n, TermPtr k) { return mk_prefix(in(n), std::move(k)); }

}  // namespace

TEST_CASE("unfolding a self-loop stacks its own prefix") {
    EquationSystem s = sys("system S { X = a.X; }");
    CHECK(term_eq(unfold(s, 0).bodies[0], s.bodies[0]));
    CHECK(term_eq(unfold(s, 1).bodies[0], s.bodies[0]));
    CHECK(term_eq(unfold(s, 2).bodies[0], pfx("a", pfx("a", mk_var("X")))));
    CHECK(term_eq(unfold(s, 4).bodies[0],
                  pfx("a", pfx("a", pfx("a", pfx("a", mk_var("X")))))));
}

TEST_CASE("unfolding is simultaneous across equations") {
    EquationSystem s = sys("system S { X = a.Y; Y = b.X; }");
    EquationSystem u = unfold(s, 2);
    CHECK(term_eq(u.bodies[0], pfx("a", pfx("b", mk_var("X")))));
    CHECK(term_eq(u.bodies[1], pfx("b", pfx("a", mk_var("Y")))));
}

TEST_CASE("unfolding composes: depth n+1 substitutes the original bodies once more") {
    EquationSystem s = sys("system S { X = a.(c.Y + b.X); Y = tau.X; }");
    std::map<std::string, TermPtr> binding;
    for (size_t i = 0; i < s.vars.size(); ++i) binding[s.vars[i]] = s.bodies[i];
    for (int n = 2; n <= 4; ++n) {
        EquationSystem prev = unfold(s, n - 1);
        EquationSystem got = unfold(s, n);
        for (size_t i = 0; i < s.vars.size(); ++i)
            CHECK(term_eq(got.bodies[i], substitute(prev.bodies[i], binding)));
    }
}

TEST_CASE("guardedness of a directly guarded system") {
    GuardReport g = check_guardedness(sys("system S { X = a.X; }"));
    CHECK(g.guarded);
    CHECK(g.strongly_guarded);
    CHECK(g.sequential);
    CHECK(g.unfold_depth_used == 0);
    CHECK(!g.gave_up);
    REQUIRE(g.occurrences.size() == 1);
    CHECK(g.occurrences[0].status == GuardStatus::StronglyGuarded);
}

TEST_CASE("tau prefixes give weak but not strong guardedness") {
    GuardReport g = check_guardedness(sys("system S { X = tau.X; }"));
    CHECK(g.guarded);
    CHECK(!g.strongly_guarded);
    CHECK(g.sequential);
    REQUIRE(g.occurrences.size() == 1);
    CHECK(g.occurrences[0].status == GuardStatus::WeaklyGuarded);
    // A visible prefix above a tau still counts as strong.
    GuardReport h = check_guardedness(sys("system S { X = a.tau.X; }"));
    CHECK(h.strongly_guarded);
}

TEST_CASE("guardedness established by unfolding reports the depth used") {
    // X's body exposes Y unguarded; substituting Y's body guards everything.
    GuardReport g = check_guardedness(sys("system S { X = b.0 | Y; Y = a.X; }"));
    CHECK(g.guarded);
    CHECK(g.unfold_depth_used == 2);
    CHECK(!g.gave_up);
    // Sequentiality is judged on the system as written: Y occurs under |.
    CHECK(!g.sequential);
}

TEST_CASE("systems that unfolding cannot guard are reported as given up") {
    GuardReport g = check_guardedness(sys("system S { X = a.0 | X; }"));
    CHECK(!g.guarded);
    CHECK(g.gave_up);
    GuardReport h = check_guardedness(sys("system S { X = X; }"));
    CHECK(!h.guarded);
    CHECK(h.gave_up);
}

TEST_CASE("occurrences under restriction or parallel are not sequential") {
    CHECK(!check_guardedness(sys("system S { X = new a in (a.X | 'a.0); }")).sequential);
    CHECK(!check_guardedness(sys("system S { X = a.(X | X); }")).sequential);
    CHECK(check_guardedness(sys("system S { X = a.(c.X + b.X); }")).sequential);
    // Parallel away from every variable occurrence does not break it.
    CHECK(check_guardedness(sys("system S { X = a.X + b.(c.0 | d.0); }")).sequential);
}

TEST_CASE("multi-equation guard statuses are reported per occurrence") {
    GuardReport g = check_guardedness(sys("system S { X = a.Y + tau.X; Y = b.X; }"));
    CHECK(g.guarded);
    CHECK(!g.strongly_guarded);  // the tau.X occurrence is only weakly guarded
    REQUIRE(g.occurrences.size() == 3);
    int strong = 0, weak = 0;
    for (const auto& o : g.occurrences) {
        if (o.status == GuardStatus::StronglyGuarded) ++strong;
        if (o.status == GuardStatus::WeaklyGuarded) ++weak;
    }
    CHECK(strong == 2);
    CHECK(weak == 1);
}

TEST_CASE("syntactic solutions close the system with generated constants") {
    EquationSystem s = sys("system S { X = a.Y; Y = b.X; }");
    SyntacticSolution sol = syntactic_solution(s);
    REQUIRE(sol.names.size() == 2);
    CHECK(sol.names[0] == "#sol.S.X");
    CHECK(sol.names[1] == "#sol.S.Y");
    REQUIRE(sol.defs.size() == 2);
    CHECK(sol.defs[0].solution);
    CHECK(term_eq(sol.defs[0].body, pfx("a", mk_const("#sol.S.Y"))));
    CHECK(term_eq(sol.defs[1].body, pfx("b", mk_const("#sol.S.X"))));
    for (const auto& d : sol.defs) CHECK(free_variables(d.body).empty());
}

TEST_CASE("equation systems preserve declaration order and resolve indices") {
    EquationSystem s = sys("system S { X = a.Y; Y = b.X; }");
    CHECK(s.name == "S");
    REQUIRE(s.vars == std::vector<std::string>{"X", "Y"});
    CHECK(s.index_of("Y") == size_t{1});
    CHECK(!s.index_of("Z").has_value());
}
