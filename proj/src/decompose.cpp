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

#include "larstream/decompose.hpp"

#include <algorithm>
#include <functional>

#include <nlohmann/json.hpp>

namespace larstream::decompose {

using lang::LitForm;
using lang::ProgramSource;

std::string DepAtom::text() const {
    std::string base;
    switch (form) {
        case LitForm::Plain: base = pred; break;
        case LitForm::At: base = pred + " at T"; break;
        case LitForm::WinAt:
            base = pred + " at T [" + std::to_string(window->size) + "]";
            break;
        case LitForm::WinDiamond:
            base = pred + " in [" + std::to_string(window->size) + "]";
            break;
        case LitForm::WinBox:
            base = pred + " always [" + std::to_string(window->size) + "]";
            break;
        case LitForm::Cmp: base = "?"; break;
    }
    if (window && window->kind == WindowKind::Tuple)
        base += "#";
    return negation_node ? "not " + base : base;
}

bool DepAtom::operator<(const DepAtom& o) const {
    if (pred != o.pred) return pred < o.pred;
    if (form != o.form) return form < o.form;
    if (window.has_value() != o.window.has_value()) return o.window.has_value();
    if (window && !(*window == *o.window)) return *window < *o.window;
    return negation_node < o.negation_node;
}

int DepGraph::index_of(const DepAtom& a) const {
    auto it = std::find(nodes.begin(), nodes.end(), a);
    return it == nodes.end() ? -1 : static_cast<int>(it - nodes.begin());
}

namespace {

DepAtom plain_node(const std::string& pred) {
    DepAtom a;
    a.form = LitForm::Plain;
    a.pred = pred;
    return a;
}

DepAtom literal_node(const lang::Literal& lit) {
    DepAtom a;
    a.form = lit.form;
    a.window = lit.window;
    a.pred = lit.atom.pred;
    return a;
}

struct NodeTable {
    std::vector<DepAtom> nodes;
    std::map<DepAtom, int> index;

    int intern(const DepAtom& a) {
        auto it = index.find(a);
        if (it != index.end()) return it->second;
        int id = static_cast<int>(nodes.size());
        nodes.push_back(a);
        index.emplace(a, id);
        return id;
    }
};

}  // namespace

DepGraph build_dep_graph(const ProgramSource& prepared) {
    NodeTable table;
    std::set<std::tuple<int, Rel, int>> edges;

    auto add_atom_edges = [&](int node_id, const DepAtom& node) {
        // @-forms tie the streaming atom to its inner atom in both
        // directions; window box/diamond forms cross a temporal boundary.
        int inner = table.intern(plain_node(node.pred));
        switch (node.form) {
            case LitForm::At:
            case LitForm::WinAt:
                if (node_id != inner) {
                    edges.insert({node_id, Rel::Eq, inner});
                    edges.insert({inner, Rel::Eq, node_id});
                }
                break;
            case LitForm::WinDiamond:
            case LitForm::WinBox:
                edges.insert({node_id, Rel::Gt, inner});
                break;
            default:
                break;
        }
    };

    for (const auto& rule : prepared.rules) {
        DepAtom head;
        head.pred = rule.head.pred;
        head.form = rule.head_time ? LitForm::At : LitForm::Plain;
        int head_id = table.intern(head);
        add_atom_edges(head_id, head);

        for (const auto& lit : rule.body) {
            if (lit.form == LitForm::Cmp) continue;
            DepAtom body = literal_node(lit);
            int body_id = table.intern(body);
            add_atom_edges(body_id, body);
            edges.insert({head_id, Rel::Geq, body_id});
            if (lit.negations > 0) {
                DepAtom neg = body;
                neg.negation_node = true;
                int neg_id = table.intern(neg);
                edges.insert({body_id, Rel::Geq, neg_id});
            }
        }
    }

    DepGraph g;
    g.nodes = std::move(table.nodes);
    g.edges = std::move(edges);
    return g;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
    }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

}  // namespace

ComponentGraph build_component_graph(const DepGraph& g, const ProgramSource& prepared) {
    UnionFind uf(g.nodes.size());
    for (const auto& [from, rel, to] : g.edges)
        if (rel != Rel::Gt) uf.unite(from, to);

    // Group dep nodes by connected component root.
    std::map<int, std::set<int>> groups;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        groups[uf.find(static_cast<int>(i))].insert(static_cast<int>(i));

    // A rule belongs with the atoms its head derives.
    std::map<int, std::vector<int>> rules_by_root;
    for (std::size_t ri = 0; ri < prepared.rules.size(); ++ri) {
        int head_node = g.index_of(plain_node(prepared.rules[ri].head.pred));
        if (head_node < 0) throw Error("head atom missing from dependency graph");
        rules_by_root[uf.find(head_node)].push_back(static_cast<int>(ri));
    }

    // Order components deterministically by their smallest predicate name,
    // then assign ids. Atom groups without any deriving rule stay with the
    // master (purely extensional input).
    std::vector<std::pair<std::string, int>> roots;
    for (const auto& [root, rule_ids] : rules_by_root) {
        (void)rule_ids;
        std::string least;
        for (int node : groups[root]) {
            const std::string& p = g.nodes[static_cast<std::size_t>(node)].pred;
            if (least.empty() || p < least) least = p;
        }
        roots.push_back({least, root});
    }
    std::sort(roots.begin(), roots.end());

    ComponentGraph out;
    out.extensional = prepared.extensional_preds();
    out.visible_intensional = prepared.visible_intensional_preds();

    std::map<int, int> comp_of_root;
    for (const auto& [least, root] : roots) {
        (void)least;
        Component c;
        c.id = static_cast<int>(out.components.size()) + 1;
        c.rules = rules_by_root[root];
        // Window atoms reference a producer elsewhere; only the plain atom
        // nodes say which atoms live in this component.
        for (int node : groups[root]) {
            const DepAtom& n = g.nodes[static_cast<std::size_t>(node)];
            if (n.form == LitForm::Plain && !n.negation_node) c.atom_preds.insert(n.pred);
        }
        for (int ri : c.rules) {
            const auto& rule = prepared.rules[static_cast<std::size_t>(ri)];
            c.prod.insert(rule.head.pred);
            for (const auto& lit : rule.body)
                if (lit.form != LitForm::Cmp) c.want.insert(lit.atom.pred);
        }
        comp_of_root[root] = c.id;
        out.components.push_back(std::move(c));
    }

    // Lift window-crossing edges, producer component -> consumer component.
    for (const auto& [from, rel, to] : g.edges) {
        if (rel != Rel::Gt) continue;
        auto consumer = comp_of_root.find(uf.find(from));
        auto producer = comp_of_root.find(uf.find(to));
        if (consumer == comp_of_root.end()) continue;
        if (producer == comp_of_root.end()) continue;  // extensional input: fed by master
        out.edges.insert({producer->second, consumer->second});
    }

    for (const auto& c : out.components) {
        bool has_in = false, has_out = false;
        for (const auto& [p, q] : out.edges) {
            if (q == c.id && p != c.id) has_in = true;
            if (p == c.id && q != c.id) has_out = true;
        }
        if (!has_in) out.sources.insert(c.id);
        if (!has_out) out.sinks.insert(c.id);
    }

    // Topological layers over the component DAG (self-loops and proper cycles
    // leave layers at their defaults; stratification is checked separately).
    std::map<int, int> indeg;
    for (const auto& c : out.components) indeg[c.id] = 0;
    for (const auto& [p, q] : out.edges)
        if (p != q) indeg[q]++;
    std::vector<int> frontier;
    for (const auto& [id, d] : indeg)
        if (d == 0) frontier.push_back(id);
    int layer = 0;
    while (!frontier.empty()) {
        std::sort(frontier.begin(), frontier.end());
        std::vector<int> next;
        for (int id : frontier) {
            out.components[static_cast<std::size_t>(id) - 1].layer = layer;
            for (const auto& [p, q] : out.edges)
                if (p == id && q != id && --indeg[q] == 0) next.push_back(q);
            ++layer;
        }
        frontier = std::move(next);
    }
    return out;
}

bool is_stream_stratified(const ComponentGraph& c) {
    return find_unstratified_cycle(c).empty();
}

std::vector<int> find_unstratified_cycle(const ComponentGraph& c) {
    // DFS over component-to-component edges; the master is not part of them.
    std::map<int, int> state;  // 0 new, 1 active, 2 done
    std::vector<int> stack;
    std::vector<int> cycle;

    std::function<bool(int)> dfs = [&](int node) {
        state[node] = 1;
        stack.push_back(node);
        for (const auto& [p, q] : c.edges) {
            if (p != node) continue;
            if (q == node) {  // self-loop
                cycle = {node, node};
                return true;
            }
            if (state[q] == 1) {
                auto it = std::find(stack.begin(), stack.end(), q);
                cycle.assign(it, stack.end());
                cycle.push_back(q);
                return true;
            }
            if (state[q] == 0 && dfs(q)) return true;
        }
        stack.pop_back();
        state[node] = 2;
        return false;
    };
    for (const auto& comp : c.components) {
        if (state[comp.id] == 0 && dfs(comp.id)) return cycle;
    }
    return {};
}

NodeLabels label(const ComponentGraph& c) {
    if (!is_stream_stratified(c)) throw Error("program is not stream-stratified");

    NodeLabels out;
    for (const auto& comp : c.components) {
        out.want[comp.id] = comp.want;
        out.prod[comp.id] = comp.prod;
        out.pub[comp.id] = {};
        out.augwant[comp.id] = comp.want;
    }
    // Master boundary: publishes the extensional atoms, wants the visible
    // intensional ones, relays nothing back.
    out.want[kMasterNode] = c.visible_intensional;
    out.augwant[kMasterNode] = c.visible_intensional;
    out.prod[kMasterNode] = c.extensional;
    out.pub[kMasterNode] = c.extensional;

    // All dataflow edges including the master closure.
    std::vector<std::pair<int, int>> edges;
    for (int src : c.sources) edges.push_back({kMasterNode, src});
    for (const auto& e : c.edges) edges.push_back(e);
    for (int sink : c.sinks) edges.push_back({sink, kMasterNode});

    // Monotone iteration to the least fixpoint of
    //   pub(u)      = union of successors' augwant
    //   augwant(u)  = want(u) + (pub(u) - prod(u))
    // with the master's sets held fixed.
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& comp : c.components) {
            std::set<std::string> pub;
            for (const auto& [from, to] : edges)
                if (from == comp.id) pub.insert(out.augwant[to].begin(), out.augwant[to].end());
            if (pub != out.pub[comp.id]) {
                out.pub[comp.id] = std::move(pub);
                changed = true;
            }
            std::set<std::string> aug = out.want[comp.id];
            for (const auto& p : out.pub[comp.id])
                if (out.prod[comp.id].count(p) == 0) aug.insert(p);
            if (aug != out.augwant[comp.id]) {
                out.augwant[comp.id] = std::move(aug);
                changed = true;
            }
        }
    }
    for (const auto& [from, to] : edges) {
        std::set<std::string> l;
        for (const auto& p : out.pub[from])
            if (out.augwant[to].count(p) > 0) l.insert(p);
        out.listening[{from, to}] = std::move(l);
    }
    return out;
}

std::string to_dot(const ComponentGraph& c, const NodeLabels& labels) {
    std::string out = "digraph components {\n  master [shape=doublecircle];\n";
    for (const auto& comp : c.components) {
        out += "  c" + std::to_string(comp.id) + " [shape=box,label=\"c" + std::to_string(comp.id) + "\\n";
        bool first = true;
        for (const auto& p : comp.atom_preds) {
            if (!first) out += ",";
            out += p;
            first = false;
        }
        out += "\"];\n";
    }
    auto edge_label = [&](int from, int to) {
        auto it = labels.listening.find({from, to});
        if (it == labels.listening.end()) return std::string();
        std::string s;
        for (const auto& p : it->second) {
            if (!s.empty()) s += ",";
            s += p;
        }
        return s;
    };
    for (int src : c.sources)
        out += "  master -> c" + std::to_string(src) + " [label=\"" + edge_label(kMasterNode, src) + "\"];\n";
    for (const auto& [p, q] : c.edges)
        out += "  c" + std::to_string(p) + " -> c" + std::to_string(q) + " [label=\"" + edge_label(p, q) + "\"];\n";
    for (int sink : c.sinks)
        out += "  c" + std::to_string(sink) + " -> master [label=\"" + edge_label(sink, kMasterNode) + "\"];\n";
    out += "}\n";
    return out;
}

std::string to_json(const ComponentGraph& c, const NodeLabels& labels,
                    const lang::ProgramSource& prepared) {
    nlohmann::json j;
    j["stratified"] = is_stream_stratified(c);
    j["master"] = {{"pub", c.extensional}, {"want", c.visible_intensional}};
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& comp : c.components) {
        nlohmann::json jc;
        jc["id"] = comp.id;
        jc["layer"] = comp.layer;
        jc["rules"] = comp.rules;
        nlohmann::json texts = nlohmann::json::array();
        for (int ri : comp.rules) texts.push_back(prepared.rules[static_cast<std::size_t>(ri)].text());
        jc["rule_texts"] = std::move(texts);
        jc["atoms"] = comp.atom_preds;
        auto set_or_empty = [&](const std::map<int, std::set<std::string>>& m) {
            auto it = m.find(comp.id);
            return it == m.end() ? std::set<std::string>{} : it->second;
        };
        jc["want"] = set_or_empty(labels.want);
        jc["prod"] = set_or_empty(labels.prod);
        jc["pub"] = set_or_empty(labels.pub);
        jc["augwant"] = set_or_empty(labels.augwant);
        comps.push_back(std::move(jc));
    }
    j["components"] = std::move(comps);
    nlohmann::json edges = nlohmann::json::array();
    auto emit_edge = [&](int from, int to) {
        nlohmann::json je;
        je["from"] = from;
        je["to"] = to;
        auto it = labels.listening.find({from, to});
        je["listening"] = it == labels.listening.end() ? std::set<std::string>{} : it->second;
        edges.push_back(std::move(je));
    };
    for (int src : c.sources) emit_edge(kMasterNode, src);
    for (const auto& [p, q] : c.edges) emit_edge(p, q);
    for (int sink : c.sinks) emit_edge(sink, kMasterNode);
    j["edges"] = std::move(edges);
    return j.dump(2);
}

}  // namespace larstream::decompose
