// Copyright 2026 The usolv Authors
// SPDX-License-Identifier: Apache-2.0

#include "usolv/equiv.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace usolv {

std::string EquivResult::trail_text() const {
    std::string out;
    for (size_t i = 0; i < trail.size(); ++i) {
        if (i) out += " ";
        out += trail[i].text();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Weak bisimilarity by leveled partition refinement.
//
// Over the saturated relation, strong-style refinement decides weak
// bisimilarity. The partition after k rounds identifies exactly the states
// that no experiment of depth <= k distinguishes, so the first round that
// separates the two roots gives a depth-minimal distinguishing trail.

namespace {

struct Refinement {
    const WeakLts& w;
    // levels[k][s] = block of s after k rounds; levels[0] is all-zero.
    std::vector<std::vector<int>> levels;

    // Signature of s over the blocks of `blocks`: sorted unique
    // (label_index, block) pairs, with tau as label index 0 and visible
    // label i as i + 1.
    std::vector<std::pair<int, int>> signature(int s, const std::vector<int>& blocks) const {
        std::vector<std::pair<int, int>> sig;
        for (int j = w.tau_closure[s].next(0); j != -1; j = w.tau_closure[s].next(j + 1))
            sig.push_back({0, blocks[j]});
        for (size_t a = 0; a < w.alphabet.size(); ++a)
            for (int j = w.vis[a][s].next(0); j != -1; j = w.vis[a][s].next(j + 1))
                sig.push_back({static_cast<int>(a) + 1, blocks[j]});
        std::sort(sig.begin(), sig.end());
        sig.erase(std::unique(sig.begin(), sig.end()), sig.end());
        return sig;
    }

    void run() {
        int n = w.n;
        levels.push_back(std::vector<int>(n, 0));
        size_t num_blocks = 1;
        for (;;) {
            const std::vector<int>& prev = levels.back();
            std::map<std::pair<int, std::vector<std::pair<int, int>>>, int> ids;
            std::vector<int> next(n);
            for (int s = 0; s < n; ++s) {
                auto key = std::make_pair(prev[s], signature(s, prev));
                auto it = ids.find(key);
                if (it == ids.end()) it = ids.emplace(key, static_cast<int>(ids.size())).first;
                next[s] = it->second;
            }
            size_t nb = ids.size();
            if (nb == num_blocks) break;  // stable: no block split this round
            num_blocks = nb;
            levels.push_back(std::move(next));
        }
    }

    // States reachable from s by the weak move with signature label index li.
    std::vector<int> moves(int s, int li) const {
        std::vector<int> out;
        const Bits& row = li == 0 ? w.tau_closure[s] : w.vis[li - 1][s];
        for (int j = row.next(0); j != -1; j = row.next(j + 1)) out.push_back(j);
        return out;
    }

    Label label_of(int li) const { return li == 0 ? Label::tau() : w.alphabet[li - 1]; }

    // First level at which a and b land in different blocks, or -1.
    int first_diff(int a, int b) const {
        for (size_t k = 0; k < levels.size(); ++k)
            if (levels[k][a] != levels[k][b]) return static_cast<int>(k);
        return -1;
    }

    // Builds a depth-minimal distinguishing trail for states differing first
    // at level k (k >= 1). `left_leads` tracks which input the current
    // left-hand state descends from, for the explanation text.
    void distinguish(int a, int b, int k, bool left_is_first, std::vector<Label>& trail,
                     std::string& explanation) {
        const std::vector<int>& prev = levels[k - 1];
        auto sa = signature(a, prev);
        auto sb = signature(b, prev);
        std::vector<std::pair<int, int>> only_a, only_b;
        std::set_difference(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(only_a));
        std::set_difference(sb.begin(), sb.end(), sa.begin(), sa.end(), std::back_inserter(only_b));
        std::pair<int, int> e;
        int from, other;
        bool from_is_first;
        if (!only_a.empty() && (only_b.empty() || only_a.front() <= only_b.front())) {
            e = only_a.front();
            from = a;
            other = b;
            from_is_first = left_is_first;
        } else {
            e = only_b.front();
            from = b;
            other = a;
            from_is_first = !left_is_first;
        }
        Label l = label_of(e.first);
        trail.push_back(l);
        std::vector<int> from_moves = moves(from, e.first);
        std::vector<int> other_moves = moves(other, e.first);
        const char* side = from_is_first ? "left" : "right";
        const char* oside = from_is_first ? "right" : "left";
        if (k == 1) {
            explanation = std::string(side) + " admits a weak '" + l.text() + "' move that " +
                          oside + " has no weak '" + l.text() + "' answer to";
            return;
        }
        int a2 = -1;
        for (int j : from_moves)
            if (prev[j] == e.second) {
                a2 = j;
                break;
            }
        // A partner matching one level shallower exists, else the roots
        // would already have differed one round earlier.
        const std::vector<int>& prev2 = levels[k - 2];
        int b2 = -1;
        for (int j : other_moves)
            if (prev2[j] == prev2[a2]) {
                b2 = j;
                break;
            }
        if (b2 == -1) {
            explanation = std::string(side) + " admits a weak '" + l.text() + "' move that " +
                          oside + " has no weak '" + l.text() + "' answer to";
            return;
        }
        distinguish(a2, b2, k - 1, from == a ? left_is_first : !left_is_first, trail, explanation);
    }
};

}  // namespace

EquivResult weak_bisim(const TermPtr& p, const TermPtr& q, const Env& env, size_t max_states) {
    PairLts pl = explore_pair(p, q, env, max_states);
    WeakLts w = saturate(pl.lts);
    EquivResult res;
    if (pl.init_a == pl.init_b) {
        res.related = true;
        return res;
    }
    Refinement ref{w, {}};
    ref.run();
    int k = ref.first_diff(pl.init_a, pl.init_b);
    if (k == -1) {
        res.related = true;
        return res;
    }
    res.related = false;
    std::string why;
    ref.distinguish(pl.init_a, pl.init_b, k, true, res.trail, why);
    res.explanation =
        "distinguished at depth " + std::to_string(k) + " by '" + res.trail_text() + "': " + why;
    return res;
}

// ---------------------------------------------------------------------------
// Weak simulation as a greatest fixpoint over state pairs.

namespace {

struct SimEngine {
    const Lts& l;
    const WeakLts& w;
    int n;
    std::vector<char> rel;              // rel[s*n+t]: s still simulated by t
    std::vector<int> round;             // removal round, 0 = never
    std::vector<std::pair<Label, int>> cause;  // failing move (label, s')

    explicit SimEngine(const Lts& lts, const WeakLts& weak)
        : l(lts), w(weak), n(weak.n), rel(n * n, 1), round(n * n, 0), cause(n * n, {Label::tau(), -1}) {}

    bool matched(int s2, int t, const Label& mu) const {
        const Bits& row = mu.is_tau() ? w.tau_closure[t] : w.vis[w.label_index(mu)][t];
        for (int j = row.next(0); j != -1; j = row.next(j + 1))
            if (rel[s2 * n + j]) return true;
        return false;
    }

    void run() {
        for (int r = 1;; ++r) {
            bool changed = false;
            for (int s = 0; s < n; ++s) {
                for (int t = 0; t < n; ++t) {
                    if (!rel[s * n + t]) continue;
                    for (const auto& tr : l.out[s]) {
                        if (!matched(tr.dst, t, tr.label)) {
                            rel[s * n + t] = 0;
                            round[s * n + t] = r;
                            cause[s * n + t] = {tr.label, tr.dst};
                            changed = true;
                            break;
                        }
                    }
                }
            }
            if (!changed) break;
        }
    }

    void trail(int s, int t, std::vector<Label>& out) const {
        for (;;) {
            auto [mu, s2] = cause[s * n + t];
            if (s2 == -1) return;
            out.push_back(mu);
            // Partner that survived the longest; every candidate was removed
            // in an earlier round, so this walk terminates.
            const Bits& row = mu.is_tau() ? w.tau_closure[t] : w.vis[w.label_index(mu)][t];
            int best = -1, best_round = -1;
            for (int j = row.next(0); j != -1; j = row.next(j + 1))
                if (round[s2 * n + j] > best_round) {
                    best = j;
                    best_round = round[s2 * n + j];
                }
            if (best == -1) return;  // no weak answer at all
            s = s2;
            t = best;
        }
    }
};

}  // namespace

EquivResult weak_sim(const TermPtr& p, const TermPtr& q, const Env& env, size_t max_states) {
    PairLts pl = explore_pair(p, q, env, max_states);
    WeakLts w = saturate(pl.lts);
    EquivResult res;
    if (pl.init_a == pl.init_b) {
        res.related = true;
        return res;
    }
    SimEngine eng(pl.lts, w);
    eng.run();
    res.related = eng.rel[pl.init_a * eng.n + pl.init_b] != 0;
    if (!res.related) {
        eng.trail(pl.init_a, pl.init_b, res.trail);
        res.explanation = "left escapes the simulation along '" + res.trail_text() + "'";
    }
    return res;
}

// ---------------------------------------------------------------------------
// Finite-trace inclusion by subset construction with antichain pruning.

namespace {

struct TraceSearch {
    const WeakLts& w;

    struct Node {
        int s;        // left state
        Bits macro;   // right macro-state
        int parent;   // node index, -1 at root
        int label;    // alphabet index of the edge into this node
    };

    // Returns nullopt when traces(left init) is included in traces(right
    // init), else a shortest offending trace.
    std::optional<std::vector<Label>> missing_trace(int pi, int qi) const {
        std::vector<Node> nodes;
        // visited[s] holds the antichain of minimal macro-states seen with s.
        std::vector<std::vector<Bits>> visited(w.n);
        std::deque<int> queue;
        Bits q0(w.n);
        q0.or_with(w.tau_closure[qi]);
        nodes.push_back({pi, q0, -1, -1});
        visited[pi].push_back(q0);
        queue.push_back(0);
        while (!queue.empty()) {
            int ni = queue.front();
            queue.pop_front();
            const int s = nodes[ni].s;
            for (size_t a = 0; a < w.alphabet.size(); ++a) {
                Bits next_macro(w.n);
                bool have_macro = false;
                for (int s2 = w.vis[a][s].next(0); s2 != -1; s2 = w.vis[a][s].next(s2 + 1)) {
                    if (!have_macro) {
                        const Bits& macro = nodes[ni].macro;
                        for (int t = macro.next(0); t != -1; t = macro.next(t + 1))
                            next_macro.or_with(w.vis[a][t]);
                        have_macro = true;
                    }
                    if (!next_macro.any()) {
                        // Shortest offending trace: path labels plus this one.
                        std::vector<Label> trace;
                        trace.push_back(w.alphabet[a]);
                        for (int cur = ni; nodes[cur].parent != -1; cur = nodes[cur].parent)
                            trace.push_back(w.alphabet[nodes[cur].label]);
                        std::reverse(trace.begin(), trace.end());
                        return trace;
                    }
                    bool subsumed = false;
                    for (const Bits& seen : visited[s2])
                        if (seen.subset_of(next_macro)) {
                            subsumed = true;
                            break;
                        }
                    if (subsumed) continue;
                    visited[s2].push_back(next_macro);
                    nodes.push_back({s2, next_macro, ni, static_cast<int>(a)});
                    queue.push_back(static_cast<int>(nodes.size()) - 1);
                }
            }
        }
        return std::nullopt;
    }
};

}  // namespace

EquivResult trace_relation(const TermPtr& p, const TermPtr& q, TraceMode mode, const Env& env,
                           size_t max_states) {
    PairLts pl = explore_pair(p, q, env, max_states);
    WeakLts w = saturate(pl.lts);
    EquivResult res;
    TraceSearch ts{w};
    auto fwd = ts.missing_trace(pl.init_a, pl.init_b);
    if (fwd) {
        res.related = false;
        res.trail = *fwd;
        res.explanation = "left performs the trace '" + res.trail_text() + "'; right cannot";
        return res;
    }
    if (mode == TraceMode::Equality) {
        auto bwd = ts.missing_trace(pl.init_b, pl.init_a);
        if (bwd) {
            res.related = false;
            res.trail = *bwd;
            res.explanation = "right performs the trace '" + res.trail_text() + "'; left cannot";
            return res;
        }
    }
    res.related = true;
    return res;
}

EquivResult preorder_holds(const TermPtr& p, const TermPtr& q, PreorderKind kind, const Env& env,
                           size_t max_states) {
    return kind == PreorderKind::WeakSimulation
               ? weak_sim(p, q, env, max_states)
               : trace_relation(p, q, TraceMode::Inclusion, env, max_states);
}

// ---------------------------------------------------------------------------
// Solution checking

SolutionCheck check_solution(const EquationSystem& s, const std::vector<TermPtr>& tuple,
                             const Env& env, size_t max_states) {
    SolutionCheck out;
    std::map<std::string, TermPtr> binding;
    for (size_t i = 0; i < s.vars.size(); ++i) binding[s.vars[i]] = tuple[i];
    for (size_t i = 0; i < s.vars.size(); ++i) {
        TermPtr rhs = substitute(s.bodies[i], binding);
        EquivResult r = weak_bisim(tuple[i], rhs, env, max_states);
        out.all_ok = out.all_ok && r.related;
        out.per_equation.push_back(std::move(r));
    }
    return out;
}

SolutionCheck check_solution_preorder(const EquationSystem& s, const std::vector<TermPtr>& tuple,
                                      PreorderKind kind, SolutionSide side, const Env& env,
                                      size_t max_states) {
    SolutionCheck out;
    std::map<std::string, TermPtr> binding;
    for (size_t i = 0; i < s.vars.size(); ++i) binding[s.vars[i]] = tuple[i];
    for (size_t i = 0; i < s.vars.size(); ++i) {
        TermPtr rhs = substitute(s.bodies[i], binding);
        EquivResult r = side == SolutionSide::ComponentBelowBody
                            ? preorder_holds(tuple[i], rhs, kind, env, max_states)
                            : preorder_holds(rhs, tuple[i], kind, env, max_states);
        out.all_ok = out.all_ok && r.related;
        out.per_equation.push_back(std::move(r));
    }
    return out;
}

}  // namespace usolv
