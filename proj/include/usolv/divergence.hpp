// Copyright 2026 The usolv Authors
// SPDX-License-Identifier: Apache-2.0
//
// Divergence analysis over explored transition systems. A divergence is an
// infinite tau path; in a finite graph, a reachable tau cycle. Each tau edge
// carries the number of solution-constant unfoldings its derivation used; a
// divergence is innocuous when every cycle realising it carries total
// annotation zero, so unfolding the solution constants is not what keeps the
// loop running.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "usolv/equations.hpp"
#include "usolv/lts.hpp"

namespace usolv {

enum class DivergenceClass {
    DivergenceFree,    // no reachable tau cycle (complete graph)
    AllInnocuous,      // tau cycles exist, all with zero total annotation
    NonInnocuous,      // some tau cycle has positive total annotation
    UnknownTruncated,  // graph truncated and no positive cycle found in it
};

enum class DivergenceBasis {
    CompleteExploration,  // classified from a fully explored graph
    WitnessFound,         // a concrete cycle proves the class (sound even truncated)
    SyntacticCriterion,   // established without exploration
};

const char* to_string(DivergenceClass c);
const char* to_string(DivergenceBasis b);

// A lasso: path from the initial state to a state on a tau cycle, then the
// cycle itself (nonempty, all tau edges).
struct DivergenceWitness {
    std::vector<Transition> prefix;
    std::vector<Transition> cycle;
    int total_count = 0;  // summed annotation on the cycle

    std::string text(const Lts& l) const;
};

struct DivergenceReport {
    DivergenceClass cls = DivergenceClass::UnknownTruncated;
    DivergenceBasis basis = DivergenceBasis::CompleteExploration;
    std::optional<DivergenceWitness> witness;
    std::string detail;
};

// Classifies the graph. A positively annotated cycle yields NonInnocuous
// regardless of truncation (the evidence only grows with the bound); the
// definite negative classes require a complete graph.
DivergenceReport analyze_divergences(const Lts& l);

// Shortest lasso (breadth-first, deterministic) to a tau cycle; with
// annotated_only the cycle must carry positive total annotation. Works on
// truncated graphs; nullopt when no qualifying cycle is in the graph.
std::optional<DivergenceWitness> find_divergence_witness(const Lts& l, bool annotated_only);

// Syntactic sufficient condition for all divergences of the syntactic
// solutions being innocuous: for each equation there is an unfolding depth
// at which every variable occurrence lies under a visible prefix whose
// complement occurs neither in any equation body nor in any constant
// reachable from them. Such prefixes can never be consumed by an internal
// communication, so no tau cycle can keep unfolding the solutions.
struct CriterionResult {
    bool satisfied = false;
    std::vector<int> depths;  // per equation, when satisfied (1 = as written)
    std::string detail;
};
CriterionResult syntactic_criterion(const EquationSystem& s, const Env& env, int max_depth = 8);

}  // namespace usolv
