// Copyright 2026 The usolv Authors
// SPDX-License-Identifier: Apache-2.0

#include "usolv/equations.hpp"

#include <functional>

namespace usolv {

EquationSystem to_equation_system(const SystemDef& s) {
    EquationSystem out;
    out.name = s.name;
    for (const auto& eq : s.equations) {
        out.vars.push_back(eq.var);
        out.bodies.push_back(eq.body);
    }
    return out;
}

// unfold(S, n) computes the n-th syntactic approximation: E^1 = E and
// E^{k+1} = E^k with every variable replaced by the original body. Depths 0
// and 1 both denote the system as written.
EquationSystem unfold(const EquationSystem& s, int n) {
    EquationSystem out = s;
    std::map<std::string, TermPtr> binding;
    for (size_t i = 0; i < s.vars.size(); ++i) binding[s.vars[i]] = s.bodies[i];
    for (int k = 1; k < n; ++k)
        for (auto& b : out.bodies) b = substitute(b, binding);
    return out;
}

namespace {

void analyse_occurrences(const EquationSystem& s, std::vector<OccurrenceReport>& out) {
    for (size_t i = 0; i < s.bodies.size(); ++i) {
        std::function<void(const TermPtr&, GuardStatus)> go = [&](const TermPtr& t,
                                                                  GuardStatus st) {
            switch (t->kind) {
                case TermKind::Var:
                    out.push_back({i, t->name, st, t->span});
                    break;
                case TermKind::Prefix: {
                    GuardStatus inner = t->act.kind == ActKind::Tau
                                            ? (st == GuardStatus::StronglyGuarded
                                                   ? st
                                                   : GuardStatus::WeaklyGuarded)
                                            : GuardStatus::StronglyGuarded;
                    go(t->kids[0], inner);
                    break;
                }
                default:
                    for (const auto& k : t->kids) go(k, st);
                    break;
            }
        };
        go(s.bodies[i], GuardStatus::Unguarded);
    }
}

bool all_guarded(const std::vector<OccurrenceReport>& occ, bool strongly) {
    for (const auto& o : occ) {
        if (o.status == GuardStatus::Unguarded) return false;
        if (strongly && o.status != GuardStatus::StronglyGuarded) return false;
    }
    return true;
}

bool is_sequential(const EquationSystem& s) {
    bool ok = true;
    for (const auto& b : s.bodies) {
        std::function<void(const TermPtr&, bool)> go = [&](const TermPtr& t, bool tainted) {
            switch (t->kind) {
                case TermKind::Var:
                    if (tainted) ok = false;
                    break;
                case TermKind::Par:
                case TermKind::Res:
                    for (const auto& k : t->kids) go(k, true);
                    break;
                default:
                    for (const auto& k : t->kids) go(k, tainted);
                    break;
            }
        };
        go(b, false);
    }
    return ok;
}

}  // namespace

GuardReport check_guardedness(const EquationSystem& s, int max_unfold) {
    GuardReport rep;
    rep.sequential = is_sequential(s);
    analyse_occurrences(s, rep.occurrences);
    if (all_guarded(rep.occurrences, false)) {
        rep.guarded = true;
        rep.strongly_guarded = all_guarded(rep.occurrences, true);
        rep.unfold_depth_used = 0;
        return rep;
    }
    for (int n = 2; n <= max_unfold; ++n) {
        EquationSystem u = unfold(s, n);
        std::vector<OccurrenceReport> occ;
        analyse_occurrences(u, occ);
        if (all_guarded(occ, false)) {
            rep.occurrences = std::move(occ);
            rep.guarded = true;
            rep.strongly_guarded = all_guarded(rep.occurrences, true);
            rep.unfold_depth_used = n;
            return rep;
        }
    }
    rep.guarded = false;
    rep.strongly_guarded = false;
    rep.gave_up = true;
    rep.unfold_depth_used = 0;
    return rep;
}

SyntacticSolution syntactic_solution(const EquationSystem& s) {
    SyntacticSolution sol;
    std::map<std::string, TermPtr> binding;
    for (const auto& v : s.vars) {
        std::string name = "#sol." + s.name + "." + v;
        sol.names.push_back(name);
        binding[v] = mk_const(name);
    }
    for (size_t i = 0; i < s.vars.size(); ++i) {
        ConstDef d;
        d.name = sol.names[i];
        d.body = substitute(s.bodies[i], binding);
        d.solution = true;
        sol.defs.push_back(std::move(d));
    }
    return sol;
}

}  // namespace usolv
