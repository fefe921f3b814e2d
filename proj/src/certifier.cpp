// Copyright 2026 The usolv Authors
// SPDX-License-Identifier: Apache-2.0

#include "usolv/certifier.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

namespace usolv {

using json = nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

long ms_since(Clock::time_point t0) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
}

json guard_json(const GuardReport& g) {
    json j;
    j["guarded"] = g.guarded;
    j["strongly_guarded"] = g.strongly_guarded;
    j["sequential"] = g.sequential;
    j["unfold_depth"] = g.unfold_depth_used;
    return j;
}

json check_json(const EquationSystem& s, const SolutionCheck& sc) {
    json arr = json::array();
    for (size_t i = 0; i < sc.per_equation.size(); ++i) {
        const EquivResult& r = sc.per_equation[i];
        json e;
        e["var"] = s.vars[i];
        e["holds"] = r.related;
        if (!r.related) {
            e["trail"] = r.trail_text();
            e["explanation"] = r.explanation;
        }
        arr.push_back(std::move(e));
    }
    return arr;
}

Certificate finish(Certificate cert, const char* verdict, const std::string& reason,
                   int exit_code, Clock::time_point t0, json stats = json::object()) {
    cert.verdict = verdict;
    cert.reason = reason;
    cert.exit_code = exit_code;
    cert.doc["verdict"] = verdict;
    cert.doc["reason"] = reason;
    stats["elapsed_ms"] = ms_since(t0);
    cert.doc["stats"] = std::move(stats);
    return cert;
}

// Combined divergence evidence for the syntactic solutions of a system.
struct DivergenceEvidence {
    DivergenceClass cls = DivergenceClass::DivergenceFree;
    json section;             // "divergence" part of the certificate
    std::string route;        // empty when no divergence route applies
    std::string refuse_text;  // for NonInnocuous
    size_t explored = 0;
};

DivergenceEvidence gather_divergence(const EquationSystem& S, const SyntacticSolution& sol,
                                     const Env& env, const CertifyOptions& opts) {
    DivergenceEvidence ev;
    CriterionResult crit = syntactic_criterion(S, env, opts.max_unfold);
    json cj;
    cj["satisfied"] = crit.satisfied;
    if (crit.satisfied) {
        json depths = json::object();
        for (size_t i = 0; i < S.vars.size(); ++i) depths[S.vars[i]] = crit.depths[i];
        cj["depths"] = std::move(depths);
    }
    cj["detail"] = crit.detail;

    // With the criterion in hand the exploration is opportunistic (it can
    // only upgrade the verdict), so it gets the small bound.
    size_t bound = crit.satisfied ? opts.refine_states : opts.max_states;
    bool all_complete = true;
    bool any_cycle = false;
    std::string witness_text, cycle_example;
    DivergenceClass combined = DivergenceClass::DivergenceFree;
    for (size_t i = 0; i < sol.names.size(); ++i) {
        Lts l = explore(mk_const(sol.names[i]), env, bound);
        ev.explored += l.num_states();
        DivergenceReport r = analyze_divergences(l);
        if (r.cls == DivergenceClass::NonInnocuous) {
            combined = DivergenceClass::NonInnocuous;
            witness_text = "solution of " + S.vars[i] + ": " +
                           (r.witness ? r.witness->text(l) : r.detail);
            break;
        }
        if (r.cls == DivergenceClass::UnknownTruncated) all_complete = false;
        if (r.cls == DivergenceClass::AllInnocuous) any_cycle = true;
        if (r.witness && cycle_example.empty())
            cycle_example = "solution of " + S.vars[i] + ": " + r.witness->text(l);
    }
    if (combined != DivergenceClass::NonInnocuous) {
        if (!all_complete)
            combined = DivergenceClass::UnknownTruncated;
        else if (any_cycle)
            combined = DivergenceClass::AllInnocuous;
    }

    json dj;
    switch (combined) {
        case DivergenceClass::NonInnocuous:
            dj["class"] = to_string(DivergenceClass::NonInnocuous);
            dj["basis"] = to_string(DivergenceBasis::WitnessFound);
            dj["route"] = nullptr;
            dj["witness"] = witness_text;
            ev.refuse_text = witness_text;
            break;
        case DivergenceClass::UnknownTruncated:
            if (crit.satisfied) {
                // The criterion stands on its own; truncation cannot shake it.
                dj["class"] = to_string(DivergenceClass::AllInnocuous);
                dj["basis"] = to_string(DivergenceBasis::SyntacticCriterion);
                dj["route"] = "syntactic-criterion";
                ev.route = "syntactic-criterion";
                combined = DivergenceClass::AllInnocuous;
                if (!cycle_example.empty()) dj["cycle_example"] = cycle_example;
            } else {
                dj["class"] = to_string(DivergenceClass::UnknownTruncated);
                dj["basis"] = to_string(DivergenceBasis::CompleteExploration);
                dj["route"] = nullptr;
            }
            break;
        case DivergenceClass::AllInnocuous:
            dj["class"] = to_string(DivergenceClass::AllInnocuous);
            dj["basis"] = to_string(DivergenceBasis::CompleteExploration);
            dj["route"] = "innocuous-only";
            ev.route = "innocuous-only";
            if (!cycle_example.empty()) dj["cycle_example"] = cycle_example;
            break;
        case DivergenceClass::DivergenceFree:
            dj["class"] = to_string(DivergenceClass::DivergenceFree);
            dj["basis"] = to_string(DivergenceBasis::CompleteExploration);
            dj["route"] = "divergence-free";
            ev.route = "divergence-free";
            break;
    }
    dj["criterion"] = std::move(cj);
    dj["explored_states"] = ev.explored;
    dj["explored_complete"] = all_complete;
    ev.cls = combined;
    ev.section = std::move(dj);
    return ev;
}

const SystemDef& require_system(const Program& prog, const std::string& name) {
    const SystemDef* sys = prog.find_system(name);
    if (!sys) throw std::invalid_argument("unknown system '" + name + "'");
    return *sys;
}

const CandidateDef& require_candidates(const Program& prog, const std::string& name,
                                       const std::string& system_name, size_t arity) {
    const CandidateDef* c = prog.find_candidates(name);
    if (!c) throw std::invalid_argument("unknown candidate binding '" + name + "'");
    if (c->system != system_name)
        throw std::invalid_argument("candidate binding '" + name + "' is for system '" +
                                    c->system + "', not '" + system_name + "'");
    if (c->tuple.size() != arity)
        throw std::invalid_argument("candidate binding '" + name + "' has the wrong arity");
    return *c;
}

}  // namespace

std::string canonical_bytes(const Certificate& c) {
    json copy = c.doc;
    copy.erase("stats");
    return copy.dump(2) + "\n";
}

Certificate certify_unique_solution(const Program& prog, const std::string& system_name,
                                    const std::vector<std::string>& candidate_names,
                                    const CertifyOptions& opts) {
    auto t0 = Clock::now();
    Certificate cert;
    json& doc = cert.doc;
    doc["schema"] = "usol-cert/1";
    doc["kind"] = "unique-solution";
    doc["system"] = system_name;

    const SystemDef& sys = require_system(prog, system_name);
    EquationSystem S = to_equation_system(sys);
    json eqs = json::object();
    for (size_t i = 0; i < S.vars.size(); ++i) eqs[S.vars[i]] = pretty(S.bodies[i]);
    doc["equations"] = std::move(eqs);

    std::vector<const CandidateDef*> bindings;
    json cands = json::object();
    for (const auto& name : candidate_names) {
        const CandidateDef& c = require_candidates(prog, name, system_name, S.vars.size());
        bindings.push_back(&c);
        json arr = json::array();
        for (const auto& t : c.tuple) arr.push_back(pretty(t));
        cands[name] = std::move(arr);
    }
    doc["candidates"] = std::move(cands);

    // Guardedness.
    GuardReport guard = check_guardedness(S, opts.max_unfold);
    json gj = guard_json(guard);
    if (!guard.guarded) {
        gj["route"] = nullptr;
        doc["guard"] = std::move(gj);
        return finish(std::move(cert), kVerdictRefused,
                      "equation system is not guarded: no unfolding up to depth " +
                          std::to_string(opts.max_unfold) +
                          " puts every variable occurrence under a prefix",
                      1, t0);
    }
    std::string guard_route = guard.unfold_depth_used == 0 ? "syntactic" : "unfolded";
    bool milner_ok = guard.strongly_guarded && guard.sequential;

    // Divergences of the syntactic solutions.
    SyntacticSolution sol = syntactic_solution(S);
    Env env(prog);
    for (const auto& d : sol.defs) env.add_const(d);
    json solj = json::object();
    for (size_t i = 0; i < S.vars.size(); ++i) solj[S.vars[i]] = sol.names[i];
    doc["syntactic_solution"] = std::move(solj);

    DivergenceEvidence ev = gather_divergence(S, sol, env, opts);
    bool divergence_ok = ev.cls == DivergenceClass::DivergenceFree ||
                         ev.cls == DivergenceClass::AllInnocuous;
    if (!divergence_ok && milner_ok) {
        // Strong guardedness plus sequentiality carries uniqueness on its
        // own; divergence findings are recorded but not relied upon.
        guard_route = "milner-sequential";
    }
    gj["route"] = guard_route;
    doc["guard"] = std::move(gj);
    doc["divergence"] = ev.section;

    if (!divergence_ok && !milner_ok) {
        if (ev.cls == DivergenceClass::NonInnocuous)
            return finish(std::move(cert), kVerdictRefused,
                          "the syntactic solutions have a non-innocuous divergence: " +
                              ev.refuse_text,
                          1, t0);
        return finish(std::move(cert), kVerdictUnknown,
                      "divergences could not be bounded: exploration of the syntactic solutions "
                      "was cut off and the syntactic criterion does not apply",
                      2, t0);
    }

    // Candidate tuples must actually solve the system.
    json checks = json::array();
    for (const CandidateDef* c : bindings) {
        SolutionCheck sc;
        try {
            sc = check_solution(S, c->tuple, env, opts.max_states);
        } catch (const TruncatedError&) {
            doc["solution_checks"] = std::move(checks);
            return finish(std::move(cert), kVerdictUnknown,
                          "state bound of " + std::to_string(opts.max_states) +
                              " exceeded while checking candidates '" + c->name + "'",
                          2, t0);
        }
        json entry;
        entry["candidates"] = c->name;
        entry["results"] = check_json(S, sc);
        checks.push_back(std::move(entry));
        if (!sc.all_ok) {
            for (size_t i = 0; i < sc.per_equation.size(); ++i) {
                if (!sc.per_equation[i].related) {
                    doc["solution_checks"] = std::move(checks);
                    return finish(std::move(cert), kVerdictRefused,
                                  "candidates '" + c->name + "' do not solve the system: " +
                                      "component " + S.vars[i] + " is not weakly bisimilar to " +
                                      "its body (" + sc.per_equation[i].explanation + ")",
                                  1, t0);
                }
            }
        }
    }
    doc["solution_checks"] = std::move(checks);

    json conclusions = json::array();
    conclusions.push_back("system " + system_name +
                          " has a unique solution up to weak bisimilarity");
    for (const CandidateDef* c : bindings)
        conclusions.push_back("candidates '" + c->name +
                              "' solve the system, hence are componentwise weakly bisimilar to "
                              "the syntactic solution");
    for (size_t i = 0; i < bindings.size(); ++i)
        for (size_t j = i + 1; j < bindings.size(); ++j)
            conclusions.push_back("candidates '" + bindings[i]->name + "' and '" +
                                  bindings[j]->name + "' are componentwise weakly bisimilar");
    doc["conclusions"] = std::move(conclusions);

    json stats;
    stats["solution_exploration_states"] = ev.explored;
    return finish(std::move(cert), kVerdictCertifiedEqual, "", 0, t0, std::move(stats));
}

Certificate certify_preorder(const Program& prog, const std::string& system_name,
                             const std::string& candidate_name, PreorderKind relation,
                             bool max_direction, const CertifyOptions& opts) {
    auto t0 = Clock::now();
    Certificate cert;
    json& doc = cert.doc;
    doc["schema"] = "usol-cert/1";
    doc["kind"] = "preorder";
    doc["system"] = system_name;
    doc["relation"] =
        relation == PreorderKind::TraceInclusion ? "trace-inclusion" : "weak-simulation";
    doc["direction"] = max_direction ? "max" : "min";

    const SystemDef& sys = require_system(prog, system_name);
    EquationSystem S = to_equation_system(sys);
    json eqs = json::object();
    for (size_t i = 0; i < S.vars.size(); ++i) eqs[S.vars[i]] = pretty(S.bodies[i]);
    doc["equations"] = std::move(eqs);
    const CandidateDef& cand = require_candidates(prog, candidate_name, system_name, S.vars.size());
    json arr = json::array();
    for (const auto& t : cand.tuple) arr.push_back(pretty(t));
    json cands = json::object();
    cands[candidate_name] = std::move(arr);
    doc["candidates"] = std::move(cands);

    GuardReport guard = check_guardedness(S, opts.max_unfold);
    json gj = guard_json(guard);
    gj["required"] = max_direction;

    SyntacticSolution sol = syntactic_solution(S);
    Env env(prog);
    for (const auto& d : sol.defs) env.add_const(d);
    json solj = json::object();
    for (size_t i = 0; i < S.vars.size(); ++i) solj[S.vars[i]] = sol.names[i];
    doc["syntactic_solution"] = std::move(solj);

    if (max_direction) {
        // Bounding a candidate from above by the syntactic solution needs
        // the full premises: guardedness and innocuous divergences only.
        if (!guard.guarded) {
            gj["route"] = nullptr;
            doc["guard"] = std::move(gj);
            return finish(std::move(cert), kVerdictRefused,
                          "equation system is not guarded: no unfolding up to depth " +
                              std::to_string(opts.max_unfold) +
                              " puts every variable occurrence under a prefix",
                          1, t0);
        }
        gj["route"] = guard.unfold_depth_used == 0 ? "syntactic" : "unfolded";
        doc["guard"] = std::move(gj);
        DivergenceEvidence ev = gather_divergence(S, sol, env, opts);
        doc["divergence"] = ev.section;
        if (ev.cls == DivergenceClass::NonInnocuous)
            return finish(std::move(cert), kVerdictRefused,
                          "the syntactic solutions have a non-innocuous divergence: " +
                              ev.refuse_text,
                          1, t0);
        if (ev.cls == DivergenceClass::UnknownTruncated)
            return finish(std::move(cert), kVerdictUnknown,
                          "divergences could not be bounded: exploration of the syntactic "
                          "solutions was cut off and the syntactic criterion does not apply",
                          2, t0);
    } else {
        // The lower bound needs no guardedness or divergence premises; the
        // report is informational.
        gj["route"] = guard.guarded
                          ? json(guard.unfold_depth_used == 0 ? "syntactic" : "unfolded")
                          : json(nullptr);
        doc["guard"] = std::move(gj);
        doc["divergence"] = nullptr;
    }

    SolutionCheck sc;
    try {
        sc = check_solution_preorder(S, cand.tuple, relation,
                                     max_direction ? SolutionSide::ComponentBelowBody
                                                   : SolutionSide::BodyBelowComponent,
                                     env, opts.max_states);
    } catch (const TruncatedError&) {
        return finish(std::move(cert), kVerdictUnknown,
                      "state bound of " + std::to_string(opts.max_states) +
                          " exceeded while checking candidates '" + candidate_name + "'",
                      2, t0);
    }
    json entry;
    entry["candidates"] = candidate_name;
    entry["results"] = check_json(S, sc);
    json checks = json::array();
    checks.push_back(std::move(entry));
    doc["solution_checks"] = std::move(checks);
    if (!sc.all_ok) {
        std::string why;
        for (size_t i = 0; i < sc.per_equation.size(); ++i)
            if (!sc.per_equation[i].related) {
                why = "component " + S.vars[i] +
                      (max_direction ? " is not below its body (" : " is not above its body (") +
                      sc.per_equation[i].explanation + ")";
                break;
            }
        return finish(std::move(cert), kVerdictRefused,
                      "candidates '" + candidate_name + "' fail the containment: " + why, 1, t0);
    }

    std::string rel_text =
        relation == PreorderKind::TraceInclusion ? "finite-trace inclusion" : "weak simulation";
    doc["statement"] = max_direction
                           ? "each component of '" + candidate_name +
                                 "' lies below the corresponding syntactic solution under " +
                                 rel_text
                           : "each syntactic solution component lies below the corresponding "
                             "component of '" +
                                 candidate_name + "' under " + rel_text;
    return finish(std::move(cert), kVerdictCertifiedBelow, "", 0, t0);
}

// ---------------------------------------------------------------------------
// Command line

namespace {

struct Loaded {
    Program pre;   // as written (for term parsing against families/channels)
    Program pure;  // desugared
};

int load_program(const std::string& path, Loaded& out) {
    std::ifstream f(path);
    if (!f) {
        std::cerr << "error: cannot open '" << path << "'\n";
        return 3;
    }
    std::stringstream ss;
    ss << f.rdbuf();
    ParseResult pr = parse_program(ss.str());
    for (const auto& d : pr.diags) std::cerr << path << ": " << d.render() << "\n";
    if (!pr.program) return 3;
    DesugarResult dr = desugar_values(*pr.program);
    for (const auto& d : dr.diags) std::cerr << path << ": " << d.render() << "\n";
    if (!dr.program) return 3;
    out.pre = std::move(*pr.program);
    out.pure = std::move(*dr.program);
    return 0;
}

TermPtr parse_term_or_report(const std::string& text, const Program& pre) {
    ParseTermResult r = parse_term(text, pre);
    for (const auto& d : r.diags) std::cerr << "term '" << text << "': " << d.render() << "\n";
    return r.term;
}

int reject_infinitary() {
    std::cerr << "error: infinitary trace relations are not supported: uniqueness fails for "
                 "them. The single guarded equation X = a + a.X has one solution without the "
                 "infinite trace 'a a a ...' and another with it, so no certificate could "
                 "follow from solution checking.\n";
    return 3;
}

int emit_certificate(const Certificate& cert, const std::string& out_path) {
    std::string text = cert.doc.dump(2) + "\n";
    if (!out_path.empty()) {
        std::ofstream f(out_path);
        if (!f) {
            std::cerr << "error: cannot write '" << out_path << "'\n";
            return 3;
        }
        f << text;
    }
    std::cout << text;
    if (!cert.reason.empty()) std::cerr << cert.verdict << ": " << cert.reason << "\n";
    return cert.exit_code;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"usolv: certifies unique-solution results for CCS-style equation systems"};
    app.require_subcommand(1);

    std::string file, term_text, lhs_text, rhs_text, system_name, out_path, dot_path, json_path;
    std::vector<std::string> candidate_names;
    std::string relation = "weak-bisim", direction = "max";
    size_t max_states = kDefaultMaxStates, refine_states = CertifyOptions{}.refine_states;
    int depth = 2, max_unfold = 8;
    bool pretty_flag = false, desugared_flag = false, raw_flag = false, infinitary = false;

    auto add_max_states = [&](CLI::App* cmd) {
        cmd->add_option("--max-states", max_states, "state bound for explorations")
            ->envname("USOL_MAX_STATES")
            ->capture_default_str();
    };

    CLI::App* c_parse = app.add_subcommand("parse", "parse and validate a program file");
    c_parse->add_option("file", file, "program file")->required();
    c_parse->add_flag("--pretty", pretty_flag, "print the program back");
    c_parse->add_flag("--desugared", desugared_flag, "print the desugared program");

    CLI::App* c_lts = app.add_subcommand("lts", "explore the transition system of a process");
    c_lts->add_option("file", file, "program file")->required();
    c_lts->add_option("--term", term_text, "process to explore")->required();
    c_lts->add_flag("--raw", raw_flag, "keep raw derivative terms (no canonicalization)");
    c_lts->add_option("--dot", dot_path, "write Graphviz output here");
    c_lts->add_option("--json", json_path, "write JSON output here");
    add_max_states(c_lts);

    CLI::App* c_unfold = app.add_subcommand("unfold", "print an unfolded equation system");
    c_unfold->add_option("file", file, "program file")->required();
    c_unfold->add_option("--system", system_name, "system to unfold")->required();
    c_unfold->add_option("--depth", depth, "unfolding depth")->required();

    CLI::App* c_equiv = app.add_subcommand("equiv", "compare two processes");
    c_equiv->add_option("file", file, "program file")->required();
    c_equiv->add_option("--left", lhs_text, "left process")->required();
    c_equiv->add_option("--right", rhs_text, "right process")->required();
    c_equiv->add_option("--relation", relation, "weak-bisim, weak-sim, trace-incl, or trace-eq")
        ->check(CLI::IsMember({"weak-bisim", "weak-sim", "trace-incl", "trace-eq"}))
        ->capture_default_str();
    c_equiv->add_flag("--infinitary", infinitary, "ask for infinitary traces (rejected)");
    add_max_states(c_equiv);

    CLI::App* c_div = app.add_subcommand("diverge", "analyse divergences");
    c_div->add_option("file", file, "program file")->required();
    c_div->add_option("--system", system_name, "classify the system's syntactic solutions");
    c_div->add_option("--term", term_text, "find a divergence of a process");
    add_max_states(c_div);
    c_div->add_option("--max-unfold", max_unfold, "criterion/guardedness unfolding bound")
        ->capture_default_str();

    CLI::App* c_check = app.add_subcommand("check", "certify unique-solution equalities");
    c_check->add_option("file", file, "program file")->required();
    c_check->add_option("--system", system_name, "equation system")->required();
    c_check->add_option("--candidates", candidate_names, "candidate binding name(s)")
        ->required()
        ->expected(-1);
    c_check->add_option("--out", out_path, "also write the certificate here");
    add_max_states(c_check);
    c_check->add_option("--max-unfold", max_unfold, "guardedness unfolding bound")
        ->capture_default_str();
    c_check->add_option("--refine-states", refine_states, "bound for opportunistic exploration")
        ->capture_default_str();

    CLI::App* c_pre = app.add_subcommand("preorder", "certify one-sided containments");
    c_pre->add_option("file", file, "program file")->required();
    c_pre->add_option("--system", system_name, "equation system")->required();
    c_pre->add_option("--candidates", candidate_names, "candidate binding name")
        ->required()
        ->expected(1);
    c_pre->add_option("--relation", relation, "trace-incl or weak-sim")
        ->check(CLI::IsMember({"trace-incl", "weak-sim"}))
        ->required();
    c_pre->add_option("--direction", direction, "max (candidate below solution) or min")
        ->check(CLI::IsMember({"max", "min"}))
        ->capture_default_str();
    c_pre->add_flag("--infinitary", infinitary, "ask for infinitary traces (rejected)");
    c_pre->add_option("--out", out_path, "also write the certificate here");
    add_max_states(c_pre);
    c_pre->add_option("--max-unfold", max_unfold, "guardedness unfolding bound")
        ->capture_default_str();
    c_pre->add_option("--refine-states", refine_states, "bound for opportunistic exploration")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    try {
        if (infinitary) return reject_infinitary();

        Loaded prog;
        int rc = load_program(file, prog);
        if (rc != 0) return rc;

        if (c_parse->parsed()) {
            if (pretty_flag) std::cout << pretty(prog.pre);
            if (desugared_flag) std::cout << pretty(prog.pure);
            if (!pretty_flag && !desugared_flag)
                std::cout << "ok: " << prog.pure.consts.size() << " constant(s), "
                          << prog.pure.systems.size() << " system(s), "
                          << prog.pure.candidates.size() << " candidate binding(s)\n";
            return 0;
        }

        if (c_lts->parsed()) {
            TermPtr t = parse_term_or_report(term_text, prog.pre);
            if (!t) return 3;
            Env env(prog.pure);
            Lts l = explore(t, env, max_states, !raw_flag);
            if (!dot_path.empty()) {
                std::ofstream f(dot_path);
                if (!f) {
                    std::cerr << "error: cannot write '" << dot_path << "'\n";
                    return 3;
                }
                write_dot(f, l);
            }
            if (!json_path.empty()) {
                std::ofstream f(json_path);
                if (!f) {
                    std::cerr << "error: cannot write '" << json_path << "'\n";
                    return 3;
                }
                f << lts_json(l).dump(2) << "\n";
            }
            std::cout << "states " << l.num_states() << ", transitions " << l.num_transitions()
                      << ", " << (l.complete ? "complete" : "truncated") << "\n";
            return 0;
        }

        if (c_unfold->parsed()) {
            const SystemDef& sys = require_system(prog.pure, system_name);
            EquationSystem u = unfold(to_equation_system(sys), depth);
            for (size_t i = 0; i < u.vars.size(); ++i)
                std::cout << u.vars[i] << " = " << pretty(u.bodies[i]) << ";\n";
            return 0;
        }

        if (c_equiv->parsed()) {
            TermPtr l = parse_term_or_report(lhs_text, prog.pre);
            TermPtr r = parse_term_or_report(rhs_text, prog.pre);
            if (!l || !r) return 3;
            Env env(prog.pure);
            EquivResult res;
            if (relation == "weak-bisim")
                res = weak_bisim(l, r, env, max_states);
            else if (relation == "weak-sim")
                res = weak_sim(l, r, env, max_states);
            else
                res = trace_relation(l, r,
                                     relation == "trace-eq" ? TraceMode::Equality
                                                            : TraceMode::Inclusion,
                                     env, max_states);
            if (res.related) {
                std::cout << "holds\n";
                return 0;
            }
            std::cout << "fails: " << res.explanation << "\n";
            return 1;
        }

        if (c_div->parsed()) {
            if (system_name.empty() == term_text.empty()) {
                std::cerr << "error: pass exactly one of --system or --term\n";
                return 3;
            }
            Env env(prog.pure);
            if (!term_text.empty()) {
                TermPtr t = parse_term_or_report(term_text, prog.pre);
                if (!t) return 3;
                Lts l = explore(t, env, max_states);
                auto wit = find_divergence_witness(l, false);
                if (wit) {
                    std::cout << "divergence: " << wit->text(l) << "\n";
                    return 0;
                }
                if (!l.complete) {
                    std::cout << "unknown: exploration truncated at " << l.num_states()
                              << " states, no tau cycle in the explored part\n";
                    return 2;
                }
                std::cout << "divergence-free\n";
                return 0;
            }
            const SystemDef& sysd = require_system(prog.pure, system_name);
            EquationSystem S = to_equation_system(sysd);
            SyntacticSolution sol = syntactic_solution(S);
            for (const auto& d : sol.defs) env.add_const(d);
            CertifyOptions opts;
            opts.max_states = max_states;
            opts.max_unfold = max_unfold;
            opts.refine_states = max_states;
            DivergenceEvidence ev = gather_divergence(S, sol, env, opts);
            std::cout << "system " << system_name << ": "
                      << ev.section["class"].get<std::string>() << " (basis "
                      << ev.section["basis"].get<std::string>() << ")\n";
            if (ev.section.contains("witness"))
                std::cout << "  witness: " << ev.section["witness"].get<std::string>() << "\n";
            if (ev.section.contains("cycle_example"))
                std::cout << "  cycle: " << ev.section["cycle_example"].get<std::string>() << "\n";
            std::cout << "  criterion: " << ev.section["criterion"]["detail"].get<std::string>()
                      << "\n";
            switch (ev.cls) {
                case DivergenceClass::DivergenceFree:
                case DivergenceClass::AllInnocuous: return 0;
                case DivergenceClass::NonInnocuous: return 1;
                case DivergenceClass::UnknownTruncated: return 2;
            }
            return 2;
        }

        CertifyOptions opts;
        opts.max_states = max_states;
        opts.max_unfold = max_unfold;
        opts.refine_states = refine_states;
        if (c_check->parsed()) {
            Certificate cert =
                certify_unique_solution(prog.pure, system_name, candidate_names, opts);
            return emit_certificate(cert, out_path);
        }
        if (c_pre->parsed()) {
            PreorderKind kind = relation == "weak-sim" ? PreorderKind::WeakSimulation
                                                       : PreorderKind::TraceInclusion;
            Certificate cert = certify_preorder(prog.pure, system_name, candidate_names[0], kind,
                                                direction == "max", opts);
            return emit_certificate(cert, out_path);
        }
        std::cerr << "error: no subcommand\n";
        return 3;
    } catch (const TruncatedError& e) {
        std::cerr << "unknown: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace usolv
