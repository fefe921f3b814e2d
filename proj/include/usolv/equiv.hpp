// Copyright 2026 The usolv Authors
// SPDX-License-Identifier: Apache-2.0
//
// Behavioural comparisons over explored transition systems: weak
// bisimilarity, weak simulation, and finite-trace inclusion/equality, plus
// the check that a candidate tuple solves an equation system.

#pragma once

#include <string>
#include <vector>

#include "usolv/equations.hpp"
#include "usolv/lts.hpp"
#include "usolv/syntax.hpp"

namespace usolv {

struct EquivResult {
    bool related = false;
    // When not related: a minimal sequence of labels leading to the failure.
    // For bisimilarity the trail has the least possible depth; for traces it
    // is a shortest trace of one side that the other cannot perform.
    std::vector<Label> trail;
    std::string explanation;

    std::string trail_text() const;
};

// Weak bisimilarity. Decided by signature-based partition refinement over
// the saturated weak transition relation; refinement rounds give the
// distinguishing depth, so reported trails are depth-minimal.
// Throws TruncatedError when the joint state space exceeds max_states.
EquivResult weak_bisim(const TermPtr& p, const TermPtr& q, const Env& env,
                       size_t max_states = kDefaultMaxStates);

// Weak simulation: p is simulated by q (every strong move of p is matched by
// a weak move of q, coinductively). Throws TruncatedError as above.
EquivResult weak_sim(const TermPtr& p, const TermPtr& q, const Env& env,
                     size_t max_states = kDefaultMaxStates);

enum class TraceMode { Inclusion, Equality };

// Finite weak traces of p against q: Inclusion checks traces(p) within
// traces(q); Equality checks both directions. Subset-construction search
// with antichain pruning; witnesses are shortest. Throws TruncatedError.
EquivResult trace_relation(const TermPtr& p, const TermPtr& q, TraceMode mode, const Env& env,
                           size_t max_states = kDefaultMaxStates);

enum class PreorderKind { TraceInclusion, WeakSimulation };

// p below q in the chosen preorder.
EquivResult preorder_holds(const TermPtr& p, const TermPtr& q, PreorderKind kind, const Env& env,
                           size_t max_states = kDefaultMaxStates);

// Does the tuple solve the system up to weak bisimilarity? Component i is
// checked against the i-th body with every variable replaced by the
// corresponding tuple component.
struct SolutionCheck {
    bool all_ok = true;
    std::vector<EquivResult> per_equation;  // parallel to the system's vars
};
SolutionCheck check_solution(const EquationSystem& s, const std::vector<TermPtr>& tuple,
                             const Env& env, size_t max_states = kDefaultMaxStates);

// One-directional variant: for each i checks tuple_i below body_i[tuple]
// (ComponentBelowBody) or body_i[tuple] below tuple_i (BodyBelowComponent).
enum class SolutionSide { ComponentBelowBody, BodyBelowComponent };
SolutionCheck check_solution_preorder(const EquationSystem& s, const std::vector<TermPtr>& tuple,
                                      PreorderKind kind, SolutionSide side, const Env& env,
                                      size_t max_states = kDefaultMaxStates);

}  // namespace usolv
