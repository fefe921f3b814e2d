// Copyright 2026 The usolv Authors
// SPDX-License-Identifier: Apache-2.0

#include "usolv/divergence.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

namespace usolv {

const char* to_string(DivergenceClass c) {
    switch (c) {
        case DivergenceClass::DivergenceFree: return "divergence-free";
        case DivergenceClass::AllInnocuous: return "all-innocuous";
        case DivergenceClass::NonInnocuous: return "non-innocuous";
        case DivergenceClass::UnknownTruncated: return "unknown-truncated";
    }
    return "?";
}

const char* to_string(DivergenceBasis b) {
    switch (b) {
        case DivergenceBasis::CompleteExploration: return "complete-exploration";
        case DivergenceBasis::WitnessFound: return "witness-found";
        case DivergenceBasis::SyntacticCriterion: return "syntactic-criterion";
    }
    return "?";
}

std::string DivergenceWitness::text(const Lts& l) const {
    std::ostringstream os;
    os << "prefix [";
    for (size_t i = 0; i < prefix.size(); ++i) {
        if (i) os << " ";
        os << prefix[i].label.text();
    }
    os << "] to state '" << l.state_text[cycle.front().src] << "', cycle [";
    for (size_t i = 0; i < cycle.size(); ++i) {
        if (i) os << " ";
        os << "tau(" << cycle[i].count << ")";
    }
    os << "], total annotation " << total_count;
    return os.str();
}

// ---------------------------------------------------------------------------

namespace {

// Components containing a qualifying internal tau edge. A cycle with
// positive total annotation exists inside a component exactly when some
// internal tau edge has positive count: close the cycle through it.
std::vector<char> qualifying_comps(const Lts& l, const std::vector<int>& comp, int num_comps,
                                   bool annotated_only) {
    std::vector<char> q(num_comps, 0);
    for (const auto& row : l.out)
        for (const auto& tr : row)
            if (tr.label.is_tau() && comp[tr.src] == comp[tr.dst] &&
                (!annotated_only || tr.count > 0))
                q[comp[tr.src]] = 1;
    return q;
}

}  // namespace

std::optional<DivergenceWitness> find_divergence_witness(const Lts& l, bool annotated_only) {
    int n = static_cast<int>(l.num_states());
    if (n == 0) return std::nullopt;
    int num_comps = 0;
    std::vector<int> comp = tau_components(l, &num_comps);
    std::vector<char> qual = qualifying_comps(l, comp, num_comps, annotated_only);

    // Shortest path from the initial state to any state in a qualifying
    // component, over all edges.
    std::vector<int> parent(n, -2);
    std::vector<const Transition*> via(n, nullptr);
    std::deque<int> queue;
    parent[l.initial] = -1;
    queue.push_back(l.initial);
    int entry = -1;
    if (qual[comp[l.initial]]) entry = l.initial;
    while (entry == -1 && !queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        for (const auto& tr : l.out[s]) {
            if (parent[tr.dst] != -2) continue;
            parent[tr.dst] = s;
            via[tr.dst] = &tr;
            if (qual[comp[tr.dst]]) {
                entry = tr.dst;
                break;
            }
            queue.push_back(tr.dst);
        }
    }
    if (entry == -1) return std::nullopt;

    DivergenceWitness wit;
    for (int s = entry; parent[s] != -1; s = parent[s]) wit.prefix.push_back(*via[s]);
    std::reverse(wit.prefix.begin(), wit.prefix.end());

    // Shortest tau cycle through `entry` inside its component. For the
    // annotated search the state space is (state, positive edge seen yet).
    const int c = comp[entry];
    struct Hop {
        int state;
        int flag;
        const Transition* via;
        int prev;  // node index
    };
    std::vector<Hop> nodes;
    std::vector<char> seen(static_cast<size_t>(n) * 2, 0);
    auto push = [&](int st, int flag, const Transition* via_tr, int prev) {
        if (seen[st * 2 + flag]) return;
        seen[st * 2 + flag] = 1;
        nodes.push_back({st, flag, via_tr, prev});
    };
    int want_flag = annotated_only ? 1 : 0;
    push(entry, 0, nullptr, -1);
    int goal = -1;
    for (size_t head = 0; head < nodes.size() && goal == -1; ++head) {
        Hop h = nodes[head];
        for (const auto& tr : l.out[h.state]) {
            if (!tr.label.is_tau() || comp[tr.dst] != c) continue;
            int flag = h.flag | (tr.count > 0 ? 1 : 0);
            if (tr.dst == entry && flag >= want_flag) {
                nodes.push_back({tr.dst, flag, &tr, static_cast<int>(head)});
                goal = static_cast<int>(nodes.size()) - 1;
                break;
            }
            push(tr.dst, flag, &tr, static_cast<int>(head));
        }
    }
    if (goal == -1) return std::nullopt;  // entry not on a qualifying cycle itself
    for (int i = goal; nodes[i].prev != -1; i = nodes[i].prev) wit.cycle.push_back(*nodes[i].via);
    std::reverse(wit.cycle.begin(), wit.cycle.end());
    for (const auto& tr : wit.cycle) wit.total_count += tr.count;
    return wit;
}

DivergenceReport analyze_divergences(const Lts& l) {
    DivergenceReport rep;
    int num_comps = 0;
    std::vector<int> comp = tau_components(l, &num_comps);
    bool annotated = false, any_cycle = false;
    for (const auto& row : l.out) {
        for (const auto& tr : row) {
            if (!tr.label.is_tau() || comp[tr.src] != comp[tr.dst]) continue;
            any_cycle = true;
            if (tr.count > 0) annotated = true;
        }
    }
    if (annotated) {
        rep.cls = DivergenceClass::NonInnocuous;
        rep.basis = DivergenceBasis::WitnessFound;
        rep.witness = find_divergence_witness(l, true);
        rep.detail =
            "a reachable tau cycle keeps unfolding solution constants (positive annotation)";
        return rep;
    }
    if (!l.complete) {
        rep.cls = DivergenceClass::UnknownTruncated;
        rep.basis = DivergenceBasis::CompleteExploration;
        rep.detail = "exploration was cut off at " + std::to_string(l.limit) +
                     " states; no annotated tau cycle in the explored part";
        // A zero-annotated cycle in the explored part is still worth showing.
        rep.witness = find_divergence_witness(l, false);
        return rep;
    }
    if (any_cycle) {
        rep.cls = DivergenceClass::AllInnocuous;
        rep.basis = DivergenceBasis::CompleteExploration;
        rep.witness = find_divergence_witness(l, false);
        rep.detail = "tau cycles exist but every one carries zero unfolding annotation";
        return rep;
    }
    rep.cls = DivergenceClass::DivergenceFree;
    rep.basis = DivergenceBasis::CompleteExploration;
    rep.detail = "no reachable tau cycle";
    return rep;
}

// ---------------------------------------------------------------------------
// Syntactic criterion

namespace {

void collect_action_occs(const TermPtr& t, std::set<std::pair<int, std::string>>& occs) {
    if (t->kind == TermKind::Prefix && t->act.kind != ActKind::Tau)
        occs.insert({t->act.kind == ActKind::Input ? 0 : 1, t->act.name});
    for (const auto& k : t->kids) collect_action_occs(k, occs);
}

void collect_const_refs(const TermPtr& t, std::set<std::string>& refs) {
    if (t->kind == TermKind::Const) refs.insert(t->name);
    for (const auto& k : t->kids) collect_const_refs(k, refs);
}

}  // namespace

CriterionResult syntactic_criterion(const EquationSystem& s, const Env& env, int max_depth) {
    CriterionResult res;

    // Action occurrences across all bodies and every constant reachable from
    // them; an occurrence under a restriction still counts (it can react
    // with a parallel component inside the restriction).
    std::set<std::pair<int, std::string>> occs;
    std::set<std::string> refs, done;
    for (const auto& b : s.bodies) {
        collect_action_occs(b, occs);
        collect_const_refs(b, refs);
    }
    while (!refs.empty()) {
        std::string name = *refs.begin();
        refs.erase(refs.begin());
        if (!done.insert(name).second) continue;
        const TermPtr* body = env.body(name);
        if (!body) continue;
        collect_action_occs(*body, occs);
        collect_const_refs(*body, refs);
    }
    auto safe = [&](const Action& a) {
        if (a.kind == ActKind::Tau) return false;
        int co = a.kind == ActKind::Input ? 1 : 0;
        return occs.find({co, a.name}) == occs.end();
    };

    res.depths.assign(s.vars.size(), 0);
    for (size_t i = 0; i < s.vars.size(); ++i) {
        bool found = false;
        for (int n = 1; n <= max_depth && !found; ++n) {
            TermPtr body = unfold(s, n).bodies[i];
            bool ok = true;
            std::function<void(const TermPtr&, bool)> walk = [&](const TermPtr& t,
                                                                 bool protected_) {
                switch (t->kind) {
                    case TermKind::Var:
                        if (!protected_) ok = false;
                        break;
                    case TermKind::Prefix:
                        walk(t->kids[0], protected_ || safe(t->act));
                        break;
                    default:
                        for (const auto& k : t->kids) walk(k, protected_);
                        break;
                }
            };
            walk(body, false);
            if (ok) {
                res.depths[i] = n;
                found = true;
            }
        }
        if (!found) {
            res.satisfied = false;
            res.detail = "equation " + s.vars[i] +
                         " has a variable occurrence with no protecting visible prefix whose "
                         "complement is absent (checked unfoldings up to depth " +
                         std::to_string(max_depth) + ")";
            return res;
        }
    }
    res.satisfied = true;
    std::ostringstream os;
    os << "every variable occurrence is protected by a visible prefix whose complement does not "
          "occur; depths:";
    for (size_t i = 0; i < s.vars.size(); ++i) os << " " << s.vars[i] << "=" << res.depths[i];
    res.detail = os.str();
    return res;
}

}  // namespace usolv
