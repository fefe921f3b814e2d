// Copyright 2026 The usolv Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <sstream>

#include "usolv/certifier.hpp"

using namespace usolv;
using nlohmann::ordered_json;

namespace {

Program load(const std::string& text) {
    ParseResult r = parse_program(text);
    REQUIRE(r.program.has_value());
    REQUIRE(!has_errors(r.diags));
    DesugarResult d = desugar_values(*r.program);
    REQUIRE(d.program.has_value());
    REQUIRE(!has_errors(d.diags));
    return *d.program;
}

Program load_sample(const std::string& name) {
    std::ifstream in(std::string(SAMPLES_DIR) + "/" + name);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return load(ss.str());
}

bool mentions(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("two correct candidate tuples are certified equal with full evidence") {
    Program p = load_sample("basic.ccs");
    Certificate c = certify_unique_solution(p, "Loop", {"Slow", "Fast"});
    CHECK(c.verdict == kVerdictCertifiedEqual);
    CHECK(c.exit_code == 0);
    CHECK(c.reason.empty());
    CHECK(c.doc["schema"] == "usol-cert/1");
    CHECK(c.doc["kind"] == "unique-solution");
    CHECK(c.doc["guard"]["guarded"] == true);
    CHECK(c.doc["guard"]["route"] == "syntactic");
    CHECK(c.doc["divergence"]["class"] == "divergence-free");
    CHECK(c.doc["divergence"]["route"] == "divergence-free");
    CHECK(c.doc["divergence"]["explored_complete"] == true);
    REQUIRE(c.doc["solution_checks"].size() == 2);
    for (const auto& sc : c.doc["solution_checks"])
        for (const auto& res : sc["results"]) CHECK(res["holds"] == true);
    // The headline consequence: every pair of checked tuples is equivalent.
    bool pairwise = false;
    for (const auto& line : c.doc["conclusions"])
        if (mentions(line.get<std::string>(), "'Slow' and 'Fast'")) pairwise = true;
    CHECK(pairwise);
}

TEST_CASE("guard refusals name the failure and skip the rest") {
    Program p = load_sample("refused.ccs");
    for (const char* sys : {"Undefined", "Spawner"}) {
        Certificate c = certify_unique_solution(p, sys, {});
        CHECK(c.verdict == kVerdictRefused);
        CHECK(c.exit_code == 1);
        CHECK(mentions(c.reason, "not guarded"));
        CHECK(c.doc["guard"]["guarded"] == false);
        CHECK(c.doc["divergence"].is_null());
    }
}

TEST_CASE("non-innocuous divergences are refused with a concrete witness") {
    Program p = load_sample("refused.ccs");
    for (const char* sys : {"Ticker", "Hidden"}) {
        Certificate c = certify_unique_solution(p, sys, {});
        CHECK(c.verdict == kVerdictRefused);
        CHECK(c.exit_code == 1);
        CHECK(mentions(c.reason, "non-innocuous"));
        CHECK(c.doc["divergence"]["class"] == "non-innocuous");
        CHECK(c.doc["divergence"]["basis"] == "witness-found");
        CHECK(mentions(c.doc["divergence"]["witness"].get<std::string>(), "tau(1)"));
    }
}

TEST_CASE("innocuous divergences pass through the syntactic criterion route") {
    Program p = load_sample("innocuous.ccs");
    Certificate c = certify_unique_solution(p, "Spawn", {"C1", "C2"});
    CHECK(c.verdict == kVerdictCertifiedEqual);
    CHECK(c.exit_code == 0);
    CHECK(c.doc["divergence"]["class"] == "all-innocuous");
    CHECK(c.doc["divergence"]["basis"] == "syntactic-criterion");
    CHECK(c.doc["divergence"]["route"] == "syntactic-criterion");
    CHECK(c.doc["divergence"]["criterion"]["satisfied"] == true);
    // The recorded example cycle really is unannotated.
    CHECK(mentions(c.doc["divergence"]["cycle_example"].get<std::string>(),
                   "total annotation 0"));
}

TEST_CASE("a tuple that does not solve the system is refused with the failing component") {
    Program p = load_sample("basic.ccs");
    Certificate c = certify_unique_solution(p, "Loop", {"Narrow"});
    CHECK(c.verdict == kVerdictRefused);
    CHECK(c.exit_code == 1);
    CHECK(mentions(c.reason, "do not solve"));
    CHECK(mentions(c.reason, "'Narrow'"));
    REQUIRE(c.doc["solution_checks"].size() == 1);
    const auto& res = c.doc["solution_checks"][0]["results"][0];
    CHECK(res["holds"] == false);
    CHECK(res.contains("explanation"));
}

TEST_CASE("a state bound that cuts the candidate check yields unknown") {
    Program p = load_sample("basic.ccs");
    CertifyOptions opts;
    opts.max_states = 1;
    Certificate c = certify_unique_solution(p, "Loop", {"Slow"}, opts);
    CHECK(c.verdict == kVerdictUnknown);
    CHECK(c.exit_code == 2);
    CHECK(mentions(c.reason, "state bound"));
    CHECK(mentions(c.reason, "'Slow'"));
}

TEST_CASE("unbounded divergence exploration without a criterion yields unknown") {
    // Spawning keeps the solution infinite-state and the co-occurring
    // complements defeat the criterion; each synchronization leaves a fresh
    // b.0 behind, so no tau cycle ever closes inside the bound.
    Program p = load(
        "system Sp { X = a.(X | 'a.b.0); }\n"
        "candidates Any for Sp = (0);\n");
    CertifyOptions opts;
    opts.max_states = 100;
    Certificate c = certify_unique_solution(p, "Sp", {"Any"}, opts);
    CHECK(c.verdict == kVerdictUnknown);
    CHECK(c.exit_code == 2);
    CHECK(mentions(c.reason, "divergences could not be bounded"));
    CHECK(c.doc["divergence"]["class"] == "unknown-truncated");
}

TEST_CASE("certificates are byte-stable and the stats section is excluded") {
    Program p = load_sample("basic.ccs");
    Certificate c1 = certify_unique_solution(p, "Loop", {"Slow", "Fast"});
    Certificate c2 = certify_unique_solution(p, "Loop", {"Slow", "Fast"});
    std::string b1 = canonical_bytes(c1), b2 = canonical_bytes(c2);
    CHECK(b1 == b2);
    CHECK(!mentions(b1, "\"stats\""));
    CHECK(!mentions(b1, "elapsed_ms"));
    CHECK(c1.doc.contains("stats"));
    CHECK(mentions(b1, "\"verdict\""));
    CHECK(b1.back() == '\n');
}

TEST_CASE("preorder certification in the max direction needs the divergence premise") {
    Program p = load_sample("basic.ccs");
    Certificate c =
        certify_preorder(p, "Loop", "Narrow", PreorderKind::TraceInclusion, /*max=*/true);
    CHECK(c.verdict == kVerdictCertifiedBelow);
    CHECK(c.exit_code == 0);
    CHECK(c.doc["kind"] == "preorder");
    CHECK(c.doc["relation"] == "trace-inclusion");
    CHECK(c.doc["direction"] == "max");
    CHECK(!c.doc["divergence"].is_null());
    CHECK(mentions(c.doc["statement"].get<std::string>(), "lies below"));
    CHECK(mentions(c.doc["statement"].get<std::string>(), "'Narrow'"));
}

TEST_CASE("preorder certification in the min direction skips the divergence premise") {
    Program p = load_sample("basic.ccs");
    Certificate c =
        certify_preorder(p, "Loop", "Wide", PreorderKind::TraceInclusion, /*max=*/false);
    CHECK(c.verdict == kVerdictCertifiedBelow);
    CHECK(c.exit_code == 0);
    CHECK(c.doc["direction"] == "min");
    CHECK(c.doc["divergence"].is_null());
    CHECK(mentions(c.doc["statement"].get<std::string>(), "lies below"));
}

TEST_CASE("preorder refusals name the failing containment") {
    Program p = load_sample("basic.ccs");
    // M allows b, the solution never does: M is not below the solution.
    Certificate cmax =
        certify_preorder(p, "Loop", "Wide", PreorderKind::TraceInclusion, /*max=*/true);
    CHECK(cmax.verdict == kVerdictRefused);
    CHECK(cmax.exit_code == 1);
    CHECK(mentions(cmax.reason, "fail the containment"));
    // N stops after one a, so the solution is not below N either.
    Certificate cmin =
        certify_preorder(p, "Loop", "Narrow", PreorderKind::TraceInclusion, /*max=*/false);
    CHECK(cmin.verdict == kVerdictRefused);
    CHECK(cmin.exit_code == 1);
}

TEST_CASE("preorder certification works for weak simulation too") {
    Program p = load_sample("basic.ccs");
    Certificate c =
        certify_preorder(p, "Loop", "Narrow", PreorderKind::WeakSimulation, /*max=*/true);
    CHECK(c.verdict == kVerdictCertifiedBelow);
    CHECK(c.doc["relation"] == "weak-simulation");
}

TEST_CASE("strong guardedness plus sequentiality substitutes for divergence analysis") {
    // Complements co-occur, so the criterion fails; a tiny bound truncates
    // the exploration; the sequential shape still rescues the certificate.
    Program p = load(
        "system Grow { X = a.tau.X + 'a.X; }\n"
        "const C0 = a.tau.C0 + 'a.C0;\n"
        "candidates Two for Grow = (C0);\n");
    CertifyOptions tiny;
    tiny.max_states = 1;
    tiny.refine_states = 1;
    Certificate c = certify_unique_solution(p, "Grow", {"Two"}, tiny);
    CHECK(c.doc["guard"]["route"] == "milner-sequential");
    CHECK(c.doc["guard"]["strongly_guarded"] == true);
    CHECK(c.doc["guard"]["sequential"] == true);
    // The candidate check itself still hits the bound, so no certificate.
    CHECK(c.verdict == kVerdictUnknown);
    CHECK(mentions(c.reason, "state bound"));

    // With a workable bound the divergence analysis finishes by itself and
    // the ordinary route certifies the same system.
    Certificate ok = certify_unique_solution(p, "Grow", {"Two"});
    CHECK(ok.verdict == kVerdictCertifiedEqual);
    CHECK(ok.doc["guard"]["route"] == "syntactic");
    CHECK(ok.doc["divergence"]["class"] == "divergence-free");
}

TEST_CASE("asking about an unknown system or candidate binding is an input error") {
    Program p = load_sample("basic.ccs");
    CHECK_THROWS_AS((void)certify_unique_solution(p, "NoSuch", {}), std::invalid_argument);
    CHECK_THROWS_AS((void)certify_unique_solution(p, "Loop", {"NoSuch"}), std::invalid_argument);
    CHECK_THROWS_AS((void)certify_preorder(p, "Loop", "NoSuch", PreorderKind::TraceInclusion, true),
                    std::invalid_argument);
}
