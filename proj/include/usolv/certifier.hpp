// Copyright 2026 The usolv Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end certification: establishes that an equation system pins down
// its solutions up to weak bisimilarity (or bounds them in a preorder) and
// that the named candidate tuples are such solutions, then emits a
// machine-readable certificate.
//
// Certified-equal rests on three facts checked independently here:
//   1. the system is guarded (possibly after unfolding),
//   2. every divergence of its syntactic solutions is innocuous (or there
//      are none, or strong guardedness plus sequentiality makes divergence
//      irrelevant),
//   3. each candidate tuple satisfies its equations up to weak bisimilarity.
// Together these make all solutions pairwise weakly bisimilar, so every
// checked tuple is equivalent to every other one and to the syntactic
// solution constants.

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "usolv/divergence.hpp"
#include "usolv/equiv.hpp"
#include "usolv/lts.hpp"
#include "usolv/syntax.hpp"

namespace usolv {

struct CertifyOptions {
    // Bound for candidate/equation state spaces; checks exceeding it come
    // back unknown rather than wrong.
    size_t max_states = kDefaultMaxStates;
    // Deepest unfolding tried when establishing guardedness (and the
    // syntactic divergence criterion).
    int max_unfold = 8;
    // Bound for the opportunistic exploration of the syntactic solutions
    // that can upgrade a criterion-based divergence verdict to a concrete
    // one; truncation here never degrades the verdict. Kept small: states of
    // growing parallel compositions get individually expensive, and a
    // solution still finite at this size gains nothing from a deeper look.
    size_t refine_states = 512;
};

// Verdict constants.
inline constexpr const char* kVerdictCertifiedEqual = "certified-equal";
inline constexpr const char* kVerdictCertifiedBelow = "certified-below-syntactic-solution";
inline constexpr const char* kVerdictRefused = "refused";
inline constexpr const char* kVerdictUnknown = "unknown";

struct Certificate {
    nlohmann::ordered_json doc;  // schema "usol-cert/1"
    std::string verdict;
    std::string reason;  // nonempty for refused/unknown
    int exit_code = 0;   // 0 certified, 1 refused, 2 unknown
};

// The certificate body without the "stats" section, serialized with a fixed
// layout: identical runs produce identical bytes.
std::string canonical_bytes(const Certificate& c);

// Full pipeline for weak bisimilarity. `desugared` must be a pure program
// (run desugar_values first); candidate_names name candidate bindings for
// system_name, each of which is checked to solve the system. Refuses when
// guardedness fails, when a non-innocuous divergence is found, or when a
// candidate is not a solution; answers unknown when a state bound prevents
// a definite answer.
Certificate certify_unique_solution(const Program& desugared, const std::string& system_name,
                                    const std::vector<std::string>& candidate_names,
                                    const CertifyOptions& opts = {});

// One-sided variant. With max_direction, each component is checked to lie
// below its equation body (component <= body[tuple]); guardedness and
// innocuous divergences are required, and the conclusion places the
// candidate below the syntactic solution. Without it the opposite
// containment is checked (body[tuple] <= component); no divergence premise
// is needed, and the conclusion places the syntactic solution below the
// candidate. Relations: finite-trace inclusion or weak simulation.
Certificate certify_preorder(const Program& desugared, const std::string& system_name,
                             const std::string& candidate_name, PreorderKind relation,
                             bool max_direction, const CertifyOptions& opts = {});

// Command-line entry point (parse, lts, unfold, equiv, diverge, check,
// preorder). Returns the process exit code: 0 certified/holds, 1
// refused/fails, 2 unknown, 3 input error.
int run_cli(int argc, char** argv);

}  // namespace usolv
