// Copyright 2026 The usolv Authors
// SPDX-License-Identifier: Apache-2.0
//
// Operational semantics: single steps with derivation annotations, state
// canonicalization, bounded reachability exploration, and weak-transition
// saturation. Exploration works over closed, desugared terms; constants are
// resolved through an Env.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "usolv/equations.hpp"
#include "usolv/syntax.hpp"

namespace usolv {

// ---------------------------------------------------------------------------
// Labels

struct Label {
    ActKind kind = ActKind::Tau;
    std::string name;  // empty for tau

    bool is_tau() const { return kind == ActKind::Tau; }
    std::string text() const {
        if (kind == ActKind::Tau) return "tau";
        return kind == ActKind::Output ? "'" + name : name;
    }
    static Label tau() { return {}; }
    static Label in(std::string n) {
        Label l;
        l.kind = ActKind::Input;
        l.name = std::move(n);
        return l;
    }
    static Label out(std::string n) {
        Label l;
        l.kind = ActKind::Output;
        l.name = std::move(n);
        return l;
    }
    static Label of(const Action& a) {
        Label l;
        l.kind = a.kind;
        if (a.kind != ActKind::Tau) l.name = a.name;
        return l;
    }
};

// Tau sorts first, then by name, inputs before outputs.
int label_cmp(const Label& a, const Label& b);
inline bool operator==(const Label& a, const Label& b) { return label_cmp(a, b) == 0; }
inline bool operator!=(const Label& a, const Label& b) { return label_cmp(a, b) != 0; }
inline bool operator<(const Label& a, const Label& b) { return label_cmp(a, b) < 0; }

// ---------------------------------------------------------------------------
// Constant environment

// Resolves constant names to bodies and answers free-name queries, computing
// constant free-name sets to a fixpoint so that restriction pruning sees
// names introduced through recursive constants.
class Env {
  public:
    Env() = default;
    explicit Env(const Program& desugared);

    void add_const(const ConstDef& d);

    const TermPtr* body(const std::string& name) const;
    // True for generated syntactic-solution constants.
    bool is_solution(const std::string& name) const;

    // Free action names of a closed term, looking through constants.
    std::set<std::string> free_names(const TermPtr& t) const;

  private:
    std::map<std::string, ConstDef> consts_;
    mutable std::map<std::string, std::set<std::string>> const_free_;
    mutable bool dirty_ = true;
    void refresh() const;
};

// ---------------------------------------------------------------------------
// Single steps

struct Step {
    Label label;
    TermPtr target;        // raw derivative, not canonicalized
    int sol_unfold_count;  // constant-rule uses on solution constants in this derivation
};

// All single-step derivatives of t, deduplicated on (label, target, count).
// Distinct derivations of the same labelled move with different annotation
// counts are kept as separate entries. Structurally equal parallel components
// are stepped once: their derivatives differ only by swapping equal
// components, and one representative placement is kept. Deterministic order.
std::vector<Step> step(const TermPtr& t, const Env& env);

// Normal form under: associativity/commutativity and unit 0 for parallel
// (left-nested, sorted components), associativity/commutativity for sums
// (sorted summands, duplicates kept), removal of restrictions whose name is
// not free in the body, and sorting of adjacent restriction binders.
TermPtr canonicalize(const TermPtr& t, const Env& env);

// Total deterministic structural order used by canonicalize.
int term_cmp(const TermPtr& a, const TermPtr& b);

// ---------------------------------------------------------------------------
// Explored transition systems

struct Transition {
    int src = 0;
    Label label;
    int dst = 0;
    int count = 0;  // solution-constant unfolding annotation
};

struct Lts {
    std::vector<TermPtr> states;
    std::vector<std::string> state_text;
    std::vector<std::vector<Transition>> out;  // indexed by src
    int initial = 0;
    // False when the state bound cut the exploration off: some discovered
    // transitions were dropped because their target exceeded the bound.
    bool complete = true;
    size_t limit = 0;

    size_t num_states() const { return states.size(); }
    size_t num_transitions() const {
        size_t n = 0;
        for (const auto& v : out) n += v.size();
        return n;
    }
};

constexpr size_t kDefaultMaxStates = 100000;

// Breadth-first reachability from p. States are canonicalized unless
// canonical is false (raw derivative terms, useful for validating that
// canonicalization preserves behaviour). max_states == 0 stores the root
// only and marks the result incomplete.
Lts explore(const TermPtr& p, const Env& env, size_t max_states = kDefaultMaxStates,
            bool canonical = true);

// Exploration from two roots into one shared state space.
struct PairLts {
    Lts lts;
    int init_a = 0;
    int init_b = 0;
};
PairLts explore_pair(const TermPtr& a, const TermPtr& b, const Env& env,
                     size_t max_states = kDefaultMaxStates, bool canonical = true);

// Thrown by operations that require a complete exploration.
struct TruncatedError : std::runtime_error {
    explicit TruncatedError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Weak-transition saturation

// Fixed-width bit rows for saturation and refinement.
class Bits {
  public:
    Bits() = default;
    explicit Bits(int n) : n_(n), w_((n + 63) / 64, 0) {}
    void set(int i) { w_[i >> 6] |= uint64_t(1) << (i & 63); }
    bool get(int i) const { return (w_[i >> 6] >> (i & 63)) & 1; }
    bool or_with(const Bits& o) {  // returns true when this changed
        bool changed = false;
        for (size_t k = 0; k < w_.size(); ++k) {
            uint64_t nv = w_[k] | o.w_[k];
            changed |= (nv != w_[k]);
            w_[k] = nv;
        }
        return changed;
    }
    int size() const { return n_; }
    // First set bit at index >= from, or -1.
    int next(int from) const;
    bool any() const {
        for (uint64_t x : w_)
            if (x) return true;
        return false;
    }
    bool subset_of(const Bits& o) const {
        for (size_t k = 0; k < w_.size(); ++k)
            if (w_[k] & ~o.w_[k]) return false;
        return true;
    }
    bool operator==(const Bits& o) const { return w_ == o.w_; }

  private:
    int n_ = 0;
    std::vector<uint64_t> w_;
};

// Reified weak transitions over a complete Lts:
//   tau_closure[i]     all j with i => j        (reflexive, transitive)
//   vis[a][i]          all j with i => -a-> => j
struct WeakLts {
    int n = 0;
    std::vector<Label> alphabet;  // visible labels, sorted
    std::vector<Bits> tau_closure;
    std::vector<std::vector<Bits>> vis;  // indexed [alphabet][state]

    int label_index(const Label& l) const {
        for (size_t i = 0; i < alphabet.size(); ++i)
            if (alphabet[i] == l) return static_cast<int>(i);
        return -1;
    }
};

// Throws TruncatedError when l is incomplete: weak transitions computed from
// a cut-off graph would be missing moves and every downstream answer would
// be unsound.
WeakLts saturate(const Lts& l);

// Tau-SCC component ids, in reverse topological order of the condensation
// (every tau edge leaving a component points to a smaller id).
std::vector<int> tau_components(const Lts& l, int* num_comps);

// ---------------------------------------------------------------------------
// Export

// Graphviz rendering: tau edges dashed, annotation shown as " [k]" for k > 0,
// initial state drawn with a double border.
void write_dot(std::ostream& os, const Lts& l);

// {"states": [...], "transitions": [{"src","label","dst","count"}...],
//  "initial": i, "complete": b}
nlohmann::ordered_json lts_json(const Lts& l);

}  // namespace usolv
