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

#ifndef LARSTREAM_DECOMPOSE_HPP
#define LARSTREAM_DECOMPOSE_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "larstream/program.hpp"

namespace larstream::decompose {

/// Predicate-level streaming atom, the dependency-graph node. Each predicate
/// abstracts all its ground atoms; a separate negation node is added per
/// negated body atom.
struct DepAtom {
    lang::LitForm form = lang::LitForm::Plain;  // Plain/At/WinAt/WinDiamond/WinBox
    std::optional<WindowSpec> window;
    std::string pred;
    bool negation_node = false;

    std::string text() const;
    bool operator==(const DepAtom& o) const {
        return form == o.form && window == o.window && pred == o.pred &&
               negation_node == o.negation_node;
    }
    bool operator<(const DepAtom& o) const;
};

enum class Rel { Geq, Gt, Eq };

struct DepGraph {
    std::vector<DepAtom> nodes;
    std::set<std::tuple<int, Rel, int>> edges;  // (from, rel, to)

    int index_of(const DepAtom& a) const;
};

constexpr int kMasterNode = 0;

struct Component {
    int id = 0;                       // 1-based; 0 is the master
    std::vector<int> rules;           // indices into the prepared program
    std::set<std::string> atom_preds; // predicates whose atoms live here
    std::set<std::string> want;       // body atoms of some rule here
    std::set<std::string> prod;       // head atoms of some rule here
    int layer = 0;                    // position in topological order
};

struct ComponentGraph {
    std::vector<Component> components;          // excluding master
    std::set<std::pair<int, int>> edges;        // producer -> consumer, component ids
    std::set<int> sources, sinks;               // component ids wired to the master
    std::set<std::string> extensional;          // predicate level
    std::set<std::string> visible_intensional;  // master's wanted atoms

    const Component& component(int id) const { return components.at(static_cast<std::size_t>(id) - 1); }
};

/// Per-node and per-edge atom sets (predicate level).
struct NodeLabels {
    std::map<int, std::set<std::string>> want, prod, pub, augwant;
    std::map<std::pair<int, int>, std::set<std::string>> listening;  // includes master edges
};

DepGraph build_dep_graph(const lang::ProgramSource& prepared);

ComponentGraph build_component_graph(const DepGraph& g, const lang::ProgramSource& prepared);

/// True iff every directed cycle passes through the master, i.e. the
/// component-to-component subgraph is acyclic.
bool is_stream_stratified(const ComponentGraph& c);

/// Some component cycle avoiding the master, for diagnostics.
std::vector<int> find_unstratified_cycle(const ComponentGraph& c);

/// Least fixpoint of the pub/augwant/listening equations with the master
/// publishing all extensional and wanting all visible intensional atoms.
NodeLabels label(const ComponentGraph& c);

std::string to_dot(const ComponentGraph& c, const NodeLabels& labels);
std::string to_json(const ComponentGraph& c, const NodeLabels& labels,
                    const lang::ProgramSource& prepared);

}  // namespace larstream::decompose

#endif  // LARSTREAM_DECOMPOSE_HPP
