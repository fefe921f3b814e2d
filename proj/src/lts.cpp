// Copyright 2026 The usolv Authors
// SPDX-License-Identifier: Apache-2.0

#include "usolv/lts.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <ostream>
#include <unordered_map>

namespace usolv {

int label_cmp(const Label& a, const Label& b) {
    auto rank = [](ActKind k) { return k == ActKind::Tau ? 0 : (k == ActKind::Input ? 1 : 2); };
    if (rank(a.kind) == 0 || rank(b.kind) == 0) {
        if (rank(a.kind) == rank(b.kind)) return 0;
        return rank(a.kind) < rank(b.kind) ? -1 : 1;
    }
    if (a.name != b.name) return a.name < b.name ? -1 : 1;
    if (rank(a.kind) != rank(b.kind)) return rank(a.kind) < rank(b.kind) ? -1 : 1;
    return 0;
}

int Bits::next(int from) const {
    for (int i = from; i < n_; ++i) {
        uint64_t word = w_[i >> 6] >> (i & 63);
        if (word == 0) {
            i = ((i >> 6) + 1) * 64 - 1;  // skip the rest of this word
            continue;
        }
        if (word & 1) return i;
    }
    return -1;
}

// ---------------------------------------------------------------------------
// Env

Env::Env(const Program& desugared) {
    for (const auto& c : desugared.consts) consts_[c.name] = c;
    dirty_ = true;
}

void Env::add_const(const ConstDef& d) {
    consts_[d.name] = d;
    dirty_ = true;
}

const TermPtr* Env::body(const std::string& name) const {
    auto it = consts_.find(name);
    return it == consts_.end() ? nullptr : &it->second.body;
}

bool Env::is_solution(const std::string& name) const {
    auto it = consts_.find(name);
    return it != consts_.end() && it->second.solution;
}

namespace {

// Free action names of t where constants contribute `cf` entries; `bound`
// is the stack of enclosing restriction binders.
void scoped_names(const TermPtr& t, const std::map<std::string, std::set<std::string>>& cf,
                  std::vector<std::string>& bound, std::set<std::string>& out) {
    switch (t->kind) {
        case TermKind::Prefix:
            if (t->act.kind != ActKind::Tau &&
                std::find(bound.begin(), bound.end(), t->act.name) == bound.end())
                out.insert(t->act.name);
            scoped_names(t->kids[0], cf, bound, out);
            break;
        case TermKind::Res:
            bound.push_back(t->name);
            scoped_names(t->kids[0], cf, bound, out);
            bound.pop_back();
            break;
        case TermKind::Const: {
            auto it = cf.find(t->name);
            if (it != cf.end())
                for (const auto& n : it->second)
                    if (std::find(bound.begin(), bound.end(), n) == bound.end()) out.insert(n);
            break;
        }
        default:
            for (const auto& k : t->kids) scoped_names(k, cf, bound, out);
            break;
    }
}

}  // namespace

void Env::refresh() const {
    if (!dirty_) return;
    const_free_.clear();
    for (const auto& [name, def] : consts_) const_free_[name] = {};
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [name, def] : consts_) {
            std::set<std::string> f;
            std::vector<std::string> bound;
            scoped_names(def.body, const_free_, bound, f);
            if (f != const_free_[name]) {
                const_free_[name] = std::move(f);
                changed = true;
            }
        }
    }
    dirty_ = false;
}

std::set<std::string> Env::free_names(const TermPtr& t) const {
    refresh();
    std::set<std::string> out;
    std::vector<std::string> bound;
    scoped_names(t, const_free_, bound, out);
    return out;
}

// ---------------------------------------------------------------------------
// term_cmp

static int kind_rank(TermKind k) {
    switch (k) {
        case TermKind::Nil: return 0;
        case TermKind::Prefix: return 1;
        case TermKind::Sum: return 2;
        case TermKind::Par: return 3;
        case TermKind::Res: return 4;
        case TermKind::Const: return 5;
        case TermKind::Var: return 6;
    }
    return 7;
}

int term_cmp(const TermPtr& a, const TermPtr& b) {
    if (a == b) return 0;
    if (kind_rank(a->kind) != kind_rank(b->kind))
        return kind_rank(a->kind) < kind_rank(b->kind) ? -1 : 1;
    switch (a->kind) {
        case TermKind::Nil:
            return 0;
        case TermKind::Prefix: {
            int c = action_cmp(a->act, b->act);
            if (c) return c;
            return term_cmp(a->kids[0], b->kids[0]);
        }
        case TermKind::Sum:
        case TermKind::Par: {
            if (a->kids.size() != b->kids.size())
                return a->kids.size() < b->kids.size() ? -1 : 1;
            for (size_t i = 0; i < a->kids.size(); ++i) {
                int c = term_cmp(a->kids[i], b->kids[i]);
                if (c) return c;
            }
            return 0;
        }
        case TermKind::Res: {
            if (a->name != b->name) return a->name < b->name ? -1 : 1;
            return term_cmp(a->kids[0], b->kids[0]);
        }
        case TermKind::Const:
        case TermKind::Var:
            if (a->name != b->name) return a->name < b->name ? -1 : 1;
            return 0;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// step

namespace {

void dedup_steps(std::vector<Step>& v) {
    // Hash-first ordering keeps this sort cheap on wide parallel states whose
    // derivatives differ deep inside; the structural hash is computed without
    // std::hash, so the order is still identical across runs. The structural
    // compare only breaks hash ties.
    std::sort(v.begin(), v.end(), [](const Step& a, const Step& b) {
        int c = label_cmp(a.label, b.label);
        if (c) return c < 0;
        if (a.sol_unfold_count != b.sol_unfold_count)
            return a.sol_unfold_count < b.sol_unfold_count;
        if (a.target->hash != b.target->hash) return a.target->hash < b.target->hash;
        return term_cmp(a.target, b.target) < 0;
    });
    v.erase(std::unique(v.begin(), v.end(),
                        [](const Step& a, const Step& b) {
                            return label_cmp(a.label, b.label) == 0 &&
                                   a.sol_unfold_count == b.sol_unfold_count &&
                                   term_eq(a.target, b.target);
                        }),
            v.end());
}

void flatten_par(const TermPtr& t, std::vector<TermPtr>& leaves) {
    if (t->kind == TermKind::Par) {
        flatten_par(t->kids[0], leaves);
        flatten_par(t->kids[1], leaves);
    } else {
        leaves.push_back(t);
    }
}

struct Stepper {
    const Env& env;
    std::set<std::string> in_progress;

    std::vector<Step> go(const TermPtr& t) {
        std::vector<Step> out;
        switch (t->kind) {
            case TermKind::Nil:
                break;
            case TermKind::Prefix:
                out.push_back({Label::of(t->act), t->kids[0], 0});
                break;
            case TermKind::Sum:
                for (const auto& k : t->kids) {
                    auto ks = go(k);
                    out.insert(out.end(), ks.begin(), ks.end());
                }
                break;
            case TermKind::Par: {
                // Step the flattened component list once per structural
                // equivalence class of components: equal components at
                // different positions have interchangeable derivatives, and
                // generating one per position makes wide compositions of
                // identical processes quadratically expensive.
                std::vector<TermPtr> comps;
                flatten_par(t, comps);
                std::vector<size_t> first, second;  // positions per class
                for (size_t i = 0; i < comps.size(); ++i) {
                    bool dup = false;
                    for (size_t c = 0; c < first.size(); ++c) {
                        if (term_eq(comps[first[c]], comps[i])) {
                            if (second[c] == SIZE_MAX) second[c] = i;
                            dup = true;
                            break;
                        }
                    }
                    if (!dup) {
                        first.push_back(i);
                        second.push_back(SIZE_MAX);
                    }
                }
                std::vector<std::vector<Step>> per_class(first.size());
                for (size_t c = 0; c < first.size(); ++c) per_class[c] = go(comps[first[c]]);

                auto assemble = [&comps](size_t i, const TermPtr& di, size_t j,
                                         const TermPtr& dj) {
                    TermPtr acc = 0 == i ? di : (0 == j ? dj : comps[0]);
                    for (size_t k = 1; k < comps.size(); ++k)
                        acc = mk_par(acc, k == i ? di : (k == j ? dj : comps[k]));
                    return acc;
                };
                for (size_t c = 0; c < first.size(); ++c)
                    for (const auto& s : per_class[c])
                        out.push_back({s.label, assemble(first[c], s.target, SIZE_MAX, nullptr),
                                       s.sol_unfold_count});
                auto complementary = [](const Label& a, const Label& b) {
                    return !a.is_tau() && !b.is_tau() && a.name == b.name && a.kind != b.kind;
                };
                for (size_t c1 = 0; c1 < first.size(); ++c1) {
                    // Within a class the two derivative placements only
                    // differ by swapping equal components, so one ordered
                    // pair per unordered step pair is enough.
                    if (second[c1] != SIZE_MAX) {
                        const auto& ss = per_class[c1];
                        for (size_t x = 0; x < ss.size(); ++x)
                            for (size_t y = x + 1; y < ss.size(); ++y)
                                if (complementary(ss[x].label, ss[y].label))
                                    out.push_back(
                                        {Label::tau(),
                                         assemble(first[c1], ss[x].target, second[c1],
                                                  ss[y].target),
                                         ss[x].sol_unfold_count + ss[y].sol_unfold_count});
                    }
                    for (size_t c2 = c1 + 1; c2 < first.size(); ++c2)
                        for (const auto& s : per_class[c1])
                            for (const auto& r : per_class[c2])
                                if (complementary(s.label, r.label))
                                    out.push_back(
                                        {Label::tau(),
                                         assemble(first[c1], s.target, first[c2], r.target),
                                         s.sol_unfold_count + r.sol_unfold_count});
                }
                break;
            }
            case TermKind::Res: {
                auto ks = go(t->kids[0]);
                for (const auto& k : ks) {
                    if (!k.label.is_tau() && k.label.name == t->name) continue;
                    out.push_back({k.label, mk_res(t->name, k.target), k.sol_unfold_count});
                }
                break;
            }
            case TermKind::Const: {
                const TermPtr* b = env.body(t->name);
                if (!b) throw std::invalid_argument("step: unknown constant '" + t->name + "'");
                if (!in_progress.insert(t->name).second)
                    throw std::logic_error("step: unguarded recursion through constant '" +
                                           t->name + "'");
                auto ks = go(*b);
                in_progress.erase(t->name);
                int bump = env.is_solution(t->name) ? 1 : 0;
                for (const auto& k : ks)
                    out.push_back({k.label, k.target, k.sol_unfold_count + bump});
                break;
            }
            case TermKind::Var:
                throw std::invalid_argument("step: open term (equation variable '" + t->name +
                                            "')");
        }
        // Deduplicating at every level keeps wide parallel compositions from
        // multiplying identical derivatives combinatorially.
        dedup_steps(out);
        return out;
    }
};

}  // namespace

std::vector<Step> step(const TermPtr& t, const Env& env) {
    Stepper s{env, {}};
    return s.go(t);
}

// ---------------------------------------------------------------------------
// canonicalize

namespace {

void flatten_sum(const TermPtr& t, std::vector<TermPtr>& leaves) {
    if (t->kind == TermKind::Sum) {
        for (const auto& k : t->kids) flatten_sum(k, leaves);
    } else {
        leaves.push_back(t);
    }
}

}  // namespace

TermPtr canonicalize(const TermPtr& t, const Env& env) {
    switch (t->kind) {
        case TermKind::Nil:
        case TermKind::Const:
        case TermKind::Var:
            return t;
        case TermKind::Prefix: {
            TermPtr kid = canonicalize(t->kids[0], env);
            return kid == t->kids[0] ? t : mk_prefix(t->act, kid);
        }
        case TermKind::Sum: {
            std::vector<TermPtr> raw;
            flatten_sum(t, raw);
            std::vector<TermPtr> kids;
            for (const auto& k : raw) {
                TermPtr c = canonicalize(k, env);
                if (c->kind == TermKind::Sum)
                    kids.insert(kids.end(), c->kids.begin(), c->kids.end());
                else
                    kids.push_back(c);
            }
            std::sort(kids.begin(), kids.end(),
                      [](const TermPtr& a, const TermPtr& b) { return term_cmp(a, b) < 0; });
            if (kids.size() == 1) return kids[0];
            return mk_sum(std::move(kids));
        }
        case TermKind::Par: {
            std::vector<TermPtr> raw;
            flatten_par(t, raw);
            std::vector<TermPtr> comps;
            for (const auto& k : raw) {
                TermPtr c = canonicalize(k, env);
                if (c->kind == TermKind::Par) {
                    std::vector<TermPtr> inner;
                    flatten_par(c, inner);
                    comps.insert(comps.end(), inner.begin(), inner.end());
                } else if (c->kind != TermKind::Nil) {
                    comps.push_back(c);
                }
            }
            if (comps.empty()) return mk_nil();
            std::sort(comps.begin(), comps.end(),
                      [](const TermPtr& a, const TermPtr& b) { return term_cmp(a, b) < 0; });
            TermPtr acc = comps[0];
            for (size_t i = 1; i < comps.size(); ++i) acc = mk_par(acc, comps[i]);
            return acc;
        }
        case TermKind::Res: {
            // Gather the maximal restriction chain, canonicalize the core,
            // drop binders that are not free in it, sort the survivors.
            std::vector<std::string> names;
            TermPtr core = t;
            while (core->kind == TermKind::Res) {
                names.push_back(core->name);
                core = core->kids[0];
            }
            core = canonicalize(core, env);
            if (core->kind == TermKind::Res) {
                while (core->kind == TermKind::Res) {
                    names.push_back(core->name);
                    core = core->kids[0];
                }
            }
            std::set<std::string> fn = env.free_names(core);
            std::set<std::string> kept;
            for (const auto& n : names)
                if (fn.count(n)) kept.insert(n);
            TermPtr acc = core;
            for (auto it = kept.rbegin(); it != kept.rend(); ++it) acc = mk_res(*it, acc);
            return acc;
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// explore

namespace {

struct TermPtrHash {
    size_t operator()(const TermPtr& t) const { return t->hash; }
};
struct TermPtrEq {
    bool operator()(const TermPtr& a, const TermPtr& b) const { return term_eq(a, b); }
};

struct Explorer {
    const Env& env;
    size_t max_states;
    bool canonical;
    Lts l;
    std::unordered_map<TermPtr, int, TermPtrHash, TermPtrEq> ids;

    int intern(const TermPtr& t, bool* added) {
        auto it = ids.find(t);
        if (it != ids.end()) {
            if (added) *added = false;
            return it->second;
        }
        int id = static_cast<int>(l.states.size());
        ids.emplace(t, id);
        l.states.push_back(t);
        l.state_text.push_back(pretty(t));
        l.out.emplace_back();
        if (added) *added = true;
        return id;
    }

    std::vector<int> run(const std::vector<TermPtr>& roots) {
        std::vector<int> root_ids;
        std::deque<int> queue;
        for (const auto& r : roots) {
            TermPtr rc = canonical ? canonicalize(r, env) : r;
            bool added = false;
            int id = intern(rc, &added);
            root_ids.push_back(id);
            if (added) queue.push_back(id);
        }
        if (max_states == 0) {
            l.complete = false;
            return root_ids;
        }
        while (!queue.empty()) {
            int s = queue.front();
            queue.pop_front();
            for (const auto& st : step(l.states[s], env)) {
                TermPtr tgt = canonical ? canonicalize(st.target, env) : st.target;
                auto it = ids.find(tgt);
                int d;
                if (it != ids.end()) {
                    d = it->second;
                } else if (l.states.size() < max_states) {
                    d = intern(tgt, nullptr);
                    queue.push_back(d);
                } else {
                    l.complete = false;
                    continue;
                }
                l.out[s].push_back({s, st.label, d, st.sol_unfold_count});
            }
        }
        return root_ids;
    }
};

}  // namespace

Lts explore(const TermPtr& p, const Env& env, size_t max_states, bool canonical) {
    Explorer ex{env, max_states, canonical, {}, {}};
    ex.l.limit = max_states;
    std::vector<int> roots = ex.run({p});
    ex.l.initial = roots[0];
    return std::move(ex.l);
}

PairLts explore_pair(const TermPtr& a, const TermPtr& b, const Env& env, size_t max_states,
                     bool canonical) {
    Explorer ex{env, max_states, canonical, {}, {}};
    ex.l.limit = max_states;
    std::vector<int> roots = ex.run({a, b});
    ex.l.initial = roots[0];
    PairLts out;
    out.init_a = roots[0];
    out.init_b = roots[1];
    out.lts = std::move(ex.l);
    return out;
}

// ---------------------------------------------------------------------------
// saturate

// Tarjan over the tau subgraph; returns component ids (0-based, in reverse
// topological order of the condensation).
std::vector<int> tau_components(const Lts& l, int* num_comps) {
    int n = static_cast<int>(l.num_states());
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<bool> on_stack(n, false);
    std::vector<int> stack;
    int next_index = 0, next_comp = 0;

    // Iterative Tarjan: frame = (state, next edge position).
    std::vector<std::pair<int, size_t>> frames;
    for (int s0 = 0; s0 < n; ++s0) {
        if (index[s0] != -1) continue;
        frames.push_back({s0, 0});
        while (!frames.empty()) {
            auto& [v, pos] = frames.back();
            if (pos == 0) {
                index[v] = low[v] = next_index++;
                stack.push_back(v);
                on_stack[v] = true;
            }
            bool descended = false;
            while (pos < l.out[v].size()) {
                const Transition& tr = l.out[v][pos];
                ++pos;
                if (!tr.label.is_tau()) continue;
                int w = tr.dst;
                if (index[w] == -1) {
                    frames.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w]) low[v] = std::min(low[v], index[w]);
            }
            if (descended) continue;
            if (low[v] == index[v]) {
                for (;;) {
                    int w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = next_comp;
                    if (w == v) break;
                }
                ++next_comp;
            }
            int vv = v;
            frames.pop_back();
            if (!frames.empty()) low[frames.back().first] = std::min(low[frames.back().first], low[vv]);
        }
    }
    *num_comps = next_comp;
    return comp;
}

WeakLts saturate(const Lts& l) {
    if (!l.complete)
        throw TruncatedError(
            "saturate: exploration was cut off at " + std::to_string(l.limit) +
            " states; weak transitions over a truncated graph would be unsound");
    WeakLts w;
    int n = static_cast<int>(l.num_states());
    w.n = n;

    // Tau closure. Tarjan component ids come out in reverse topological
    // order, so a plain ascending sweep sees successors first.
    int num_comps = 0;
    std::vector<int> comp = tau_components(l, &num_comps);
    std::vector<Bits> comp_closure(num_comps, Bits(n));
    std::vector<std::vector<int>> comp_succs(num_comps);
    for (int s = 0; s < n; ++s) {
        comp_closure[comp[s]].set(s);
        for (const auto& tr : l.out[s])
            if (tr.label.is_tau() && comp[tr.dst] != comp[s])
                comp_succs[comp[s]].push_back(comp[tr.dst]);
    }
    for (int c = 0; c < num_comps; ++c)
        for (int d : comp_succs[c]) comp_closure[c].or_with(comp_closure[d]);
    w.tau_closure.reserve(n);
    for (int s = 0; s < n; ++s) w.tau_closure.push_back(comp_closure[comp[s]]);

    // Alphabet.
    std::vector<Label> labels;
    for (int s = 0; s < n; ++s)
        for (const auto& tr : l.out[s])
            if (!tr.label.is_tau()) labels.push_back(tr.label);
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    w.alphabet = labels;

    // vis[a][i] = union over j in tau_closure[i] of union over j -a-> k of
    // tau_closure[k]; computed via per-state post sets.
    for (const auto& a : labels) {
        std::vector<Bits> post(n, Bits(n));
        std::vector<bool> has_post(n, false);
        for (int s = 0; s < n; ++s)
            for (const auto& tr : l.out[s])
                if (tr.label == a) {
                    post[s].or_with(w.tau_closure[tr.dst]);
                    has_post[s] = true;
                }
        std::vector<Bits> rows;
        rows.reserve(n);
        for (int i = 0; i < n; ++i) {
            Bits row(n);
            for (int j = w.tau_closure[i].next(0); j != -1; j = w.tau_closure[i].next(j + 1))
                if (has_post[j]) row.or_with(post[j]);
            rows.push_back(std::move(row));
        }
        w.vis.push_back(std::move(rows));
    }
    return w;
}

// ---------------------------------------------------------------------------
// Export

namespace {

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

void write_dot(std::ostream& os, const Lts& l) {
    os << "digraph lts {\n";
    os << "  rankdir=LR;\n";
    os << "  node [shape=ellipse, fontsize=10];\n";
    for (size_t s = 0; s < l.num_states(); ++s) {
        os << "  s" << s << " [label=\"" << dot_escape(l.state_text[s]) << "\"";
        if (static_cast<int>(s) == l.initial) os << ", peripheries=2";
        os << "];\n";
    }
    for (const auto& row : l.out) {
        for (const auto& tr : row) {
            os << "  s" << tr.src << " -> s" << tr.dst << " [label=\""
               << dot_escape(tr.label.text());
            if (tr.count > 0) os << " [" << tr.count << "]";
            os << "\"";
            if (tr.label.is_tau()) os << ", style=dashed";
            os << "];\n";
        }
    }
    os << "}\n";
}

nlohmann::ordered_json lts_json(const Lts& l) {
    nlohmann::ordered_json j;
    j["states"] = l.state_text;
    nlohmann::ordered_json trs = nlohmann::ordered_json::array();
    for (const auto& row : l.out) {
        for (const auto& tr : row) {
            nlohmann::ordered_json e;
            e["src"] = tr.src;
            e["label"] = tr.label.text();
            e["dst"] = tr.dst;
            e["count"] = tr.count;
            trs.push_back(std::move(e));
        }
    }
    j["transitions"] = std::move(trs);
    j["initial"] = l.initial;
    j["complete"] = l.complete;
    return j;
}

}  // namespace usolv
