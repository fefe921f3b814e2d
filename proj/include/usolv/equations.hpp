// Copyright 2026 The usolv Authors
// SPDX-License-Identifier: Apache-2.0
//
// Equation systems over process variables: guardedness analysis, syntactic
// unfolding, and generation of syntactic-solution constants.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "usolv/syntax.hpp"

namespace usolv {

// A system of equations X1 = E1, ..., Xn = En. Bodies are pure terms whose
// free variables are drawn from `vars`; they may also reference constants,
// which are resolved against an accompanying Program.
struct EquationSystem {
    std::string name;
    std::vector<std::string> vars;
    std::vector<TermPtr> bodies;

    std::optional<size_t> index_of(const std::string& var) const {
        for (size_t i = 0; i < vars.size(); ++i)
            if (vars[i] == var) return i;
        return std::nullopt;
    }
};

// Builds an EquationSystem from a desugared system definition.
EquationSystem to_equation_system(const SystemDef& s);

// How deeply a single variable occurrence is protected:
//   Unguarded       not under any prefix
//   WeaklyGuarded   under a prefix, but every prefix above it is tau
//   StronglyGuarded under at least one visible (non-tau) prefix
enum class GuardStatus { Unguarded, WeaklyGuarded, StronglyGuarded };

struct OccurrenceReport {
    size_t equation = 0;     // index into vars/bodies
    std::string var;         // the variable occurring
    GuardStatus status = GuardStatus::Unguarded;
    SourceSpan span;
};

struct GuardReport {
    // Occurrence statuses in the system as analysed (after unfolding, if any).
    std::vector<OccurrenceReport> occurrences;

    // Every occurrence at least weakly guarded.
    bool guarded = false;
    // Every occurrence strongly guarded.
    bool strongly_guarded = false;
    // Variables occur only under prefixes and sums (no parallel, no
    // restriction above any occurrence).
    bool sequential = false;

    // 0 when the system was guarded as written; otherwise the unfolding depth
    // at which guardedness was established (>= 2).
    int unfold_depth_used = 0;
    // True when no depth up to the configured maximum established guardedness.
    bool gave_up = false;
};

// Simultaneous syntactic unfolding: each body has every variable Xj replaced
// by the corresponding body Ej, n times. unfold(S, 0) returns S unchanged.
EquationSystem unfold(const EquationSystem& s, int n);

// Analyses guardedness. If the system as written has an unguarded occurrence,
// retries on unfoldings of depth 2, 3, ... up to max_unfold; the report
// describes the first depth that is guarded (or the original system with
// gave_up set). Sequentiality is always reported for the system as written.
GuardReport check_guardedness(const EquationSystem& s, int max_unfold = 8);

// Constants K1, ..., Kn with Ki defined as Ei[K1/X1, ..., Kn/Xn]. Names are
// "#sol.<system>.<var>", chosen to be unwritable in the surface syntax.
struct SyntacticSolution {
    std::vector<ConstDef> defs;
    std::vector<std::string> names;  // parallel to the system's vars
};

SyntacticSolution syntactic_solution(const EquationSystem& s);

}  // namespace usolv
