// Copyright 2026 the larstream authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "larstream/asp.hpp"

#include <deque>
#include <stdexcept>

namespace larstream::asp {

namespace {

enum : signed char { kFalse = 0, kTrue = 1, kOpen = 2 };

// Worklist unit propagation over occurrence lists. Only sound consequences
// are derived: a satisfied body forces its head, an atom with no live
// support becomes false, and the last open literal of a false-headed rule is
// forced to falsify the body. Rules whose head occurs in their own negative
// body never count as support (the reduct drops them whenever the head is
// true), which turns the constraint idiom into a plain clause.
struct Search {
    const Program& prog;
    const std::vector<int>& order;
    std::vector<Model>* out;
    std::size_t max_models;

    struct Occurrence {
        int rule;
        bool negated;
    };
    std::vector<std::vector<Occurrence>> occurs;   // atom -> body occurrences
    std::vector<std::vector<int>> rules_for_head;  // atom -> rule ids
    std::vector<bool> self_negating;               // rule id -> head in own neg body

    // Per-branch state, copied on descent.
    struct State {
        std::vector<signed char> assign;
        std::vector<int> open;        // unassigned body occurrences per rule
        std::vector<unsigned char> dead;
        std::vector<int> live;        // live supporting rules per atom
        std::deque<int> queue;        // atoms with fresh assignments
        bool conflict = false;
    };

    Search(const Program& p, const std::vector<int>& ord, std::vector<Model>* sink,
           std::size_t cap)
        : prog(p), order(ord), out(sink), max_models(cap) {
        occurs.resize(static_cast<std::size_t>(p.atom_count));
        rules_for_head.resize(static_cast<std::size_t>(p.atom_count));
        self_negating.resize(p.rules.size(), false);
        for (std::size_t ri = 0; ri < p.rules.size(); ++ri) {
            const Rule& r = p.rules[ri];
            rules_for_head[static_cast<std::size_t>(r.head)].push_back(static_cast<int>(ri));
            for (int x : r.pos) occurs[static_cast<std::size_t>(x)].push_back({static_cast<int>(ri), false});
            for (int x : r.neg) {
                occurs[static_cast<std::size_t>(x)].push_back({static_cast<int>(ri), true});
                if (x == r.head) self_negating[ri] = true;
            }
        }
    }

    State initial_state() const {
        State s;
        s.assign.assign(static_cast<std::size_t>(prog.atom_count), kOpen);
        s.open.resize(prog.rules.size());
        s.dead.assign(prog.rules.size(), 0);
        s.live.assign(static_cast<std::size_t>(prog.atom_count), 0);
        for (std::size_t ri = 0; ri < prog.rules.size(); ++ri) {
            s.open[ri] = static_cast<int>(prog.rules[ri].pos.size() + prog.rules[ri].neg.size());
            if (!self_negating[ri]) s.live[static_cast<std::size_t>(prog.rules[ri].head)]++;
        }
        return s;
    }

    void assign(State& s, int atom, signed char v) const {
        signed char& slot = s.assign[static_cast<std::size_t>(atom)];
        if (slot == v) return;
        if (slot != kOpen) {
            s.conflict = true;
            return;
        }
        slot = v;
        s.queue.push_back(atom);
    }

    void kill(State& s, int ri) const {
        if (s.dead[static_cast<std::size_t>(ri)]) return;
        s.dead[static_cast<std::size_t>(ri)] = 1;
        if (self_negating[ri]) return;
        int head = prog.rules[static_cast<std::size_t>(ri)].head;
        if (--s.live[static_cast<std::size_t>(head)] == 0) {
            if (s.assign[static_cast<std::size_t>(head)] == kTrue)
                s.conflict = true;
            else
                assign(s, head, kFalse);
        }
    }

    // Re-examines a rule after its open count dropped or its head changed.
    void inspect(State& s, int ri) const {
        if (s.dead[static_cast<std::size_t>(ri)] || s.conflict) return;
        const Rule& r = prog.rules[static_cast<std::size_t>(ri)];
        if (s.open[static_cast<std::size_t>(ri)] == 0) {
            assign(s, r.head, kTrue);
            return;
        }
        if (s.open[static_cast<std::size_t>(ri)] == 1 &&
            s.assign[static_cast<std::size_t>(r.head)] == kFalse) {
            for (int x : r.pos)
                if (s.assign[static_cast<std::size_t>(x)] == kOpen) {
                    assign(s, x, kFalse);
                    return;
                }
            for (int x : r.neg)
                if (s.assign[static_cast<std::size_t>(x)] == kOpen) {
                    assign(s, x, kTrue);
                    return;
                }
        }
    }

    bool propagate(State& s) const {
        while (!s.queue.empty() && !s.conflict) {
            int atom = s.queue.front();
            s.queue.pop_front();
            signed char v = s.assign[static_cast<std::size_t>(atom)];
            for (const Occurrence& occ : occurs[static_cast<std::size_t>(atom)]) {
                if (s.dead[static_cast<std::size_t>(occ.rule)]) continue;
                bool falsifies = occ.negated ? v == kTrue : v == kFalse;
                if (falsifies) {
                    kill(s, occ.rule);
                } else {
                    s.open[static_cast<std::size_t>(occ.rule)]--;
                    inspect(s, occ.rule);
                }
                if (s.conflict) return false;
            }
            if (v == kFalse) {
                // False heads enable body-falsifying unit steps.
                for (int ri : rules_for_head[static_cast<std::size_t>(atom)]) {
                    inspect(s, ri);
                    if (s.conflict) return false;
                }
            }
        }
        return !s.conflict;
    }

    void seed(State& s) const {
        for (std::size_t ri = 0; ri < prog.rules.size(); ++ri)
            if (s.open[ri] == 0) assign(s, prog.rules[ri].head, kTrue);
        for (int a = 0; a < prog.atom_count; ++a)
            if (s.live[static_cast<std::size_t>(a)] == 0) assign(s, a, kFalse);
    }

    bool dfs(State& s) {  // returns false to stop the whole search
        if (!propagate(s)) return true;
        int pick = -1;
        for (int atom : order) {
            if (s.assign[static_cast<std::size_t>(atom)] == kOpen) {
                pick = atom;
                break;
            }
        }
        if (pick < 0) {
            Model m(static_cast<std::size_t>(prog.atom_count));
            for (int i = 0; i < prog.atom_count; ++i)
                m[static_cast<std::size_t>(i)] = s.assign[static_cast<std::size_t>(i)] == kTrue;
            if (is_stable_model(prog, m)) {
                out->push_back(std::move(m));
                if (out->size() >= max_models) return false;
            }
            return true;
        }
        for (signed char val : {kTrue, kFalse}) {
            State next = s;
            assign(next, pick, val);
            if (!dfs(next)) return false;
        }
        return true;
    }
};

}  // namespace

bool is_stable_model(const Program& p, const Model& m) {
    if (static_cast<int>(m.size()) != p.atom_count)
        throw std::invalid_argument("model size mismatch");
    // Least model of the reduct via counter-based forward chaining.
    std::vector<int> missing(p.rules.size(), 0);
    std::vector<std::vector<int>> watch(static_cast<std::size_t>(p.atom_count));
    std::deque<int> queue;
    std::vector<bool> lm(m.size(), false);
    auto derive = [&](int atom) {
        if (!lm[static_cast<std::size_t>(atom)]) {
            lm[static_cast<std::size_t>(atom)] = true;
            queue.push_back(atom);
        }
    };
    for (std::size_t ri = 0; ri < p.rules.size(); ++ri) {
        const Rule& r = p.rules[ri];
        bool blocked = false;
        for (int x : r.neg)
            if (m[static_cast<std::size_t>(x)]) { blocked = true; break; }
        if (blocked) {
            missing[ri] = -1;
            continue;
        }
        missing[ri] = static_cast<int>(r.pos.size());
        for (int x : r.pos) watch[static_cast<std::size_t>(x)].push_back(static_cast<int>(ri));
        if (missing[ri] == 0) derive(r.head);
    }
    while (!queue.empty()) {
        int atom = queue.front();
        queue.pop_front();
        for (int ri : watch[static_cast<std::size_t>(atom)])
            if (missing[static_cast<std::size_t>(ri)] > 0 && --missing[static_cast<std::size_t>(ri)] == 0)
                derive(p.rules[static_cast<std::size_t>(ri)].head);
    }
    return lm == m;
}

std::vector<Model> stable_models(const Program& p, const std::vector<int>& order,
                                 std::size_t max_models) {
    if (static_cast<int>(order.size()) != p.atom_count)
        throw std::invalid_argument("branch order must cover every atom");
    std::vector<Model> out;
    if (max_models == 0) return out;
    Search search(p, order, &out, max_models);
    Search::State root = search.initial_state();
    search.seed(root);
    search.dfs(root);
    return out;
}

std::optional<Model> first_stable_model(const Program& p, const std::vector<int>& order) {
    auto models = stable_models(p, order, 1);
    if (models.empty()) return std::nullopt;
    return models.front();
}

}  // namespace larstream::asp
