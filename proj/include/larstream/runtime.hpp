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

#ifndef LARSTREAM_RUNTIME_HPP
#define LARSTREAM_RUNTIME_HPP

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "larstream/decompose.hpp"
#include "larstream/node.hpp"

namespace larstream {

/// One line on the wire: begin/end carry an atom, tick and eos do not.
struct WireEvent {
    enum class Op { Begin, End, Tick, Eos };
    Op op = Op::Tick;
    TimePoint t = 0;
    std::optional<Atom> atom;

    static WireEvent begin(TimePoint t, Atom a);
    static WireEvent end(TimePoint t, Atom a);
    static WireEvent tick(TimePoint t);
    static WireEvent eos(TimePoint t);

    std::string to_ndjson() const;
    static WireEvent from_ndjson(std::string_view line);

    bool operator==(const WireEvent& o) const {
        return op == o.op && t == o.t && atom == o.atom;
    }
    bool operator<(const WireEvent& o) const;
};

enum class TransportKind { InProcess, Tcp };

struct EngineOptions {
    TransportKind transport = TransportKind::InProcess;
    bool single_node = false;
    TimePoint origin = 0;
    bool cleanup = true;
    std::optional<std::string> external_solver;
    std::string listen_address;  // TCP master bind; LARSTREAM_LISTEN overrides empty
    std::string debug_dir;       // when set, nodes dump store + last delta here
};

/// Planned network: reasoner configurations plus the filtered channels
/// between them. Node index -1 denotes the master.
struct Topology {
    static constexpr int kMaster = -1;

    lang::ProgramSource prepared;
    decompose::ComponentGraph graph;
    decompose::NodeLabels labels;
    std::vector<NodeConfig> nodes;

    struct Edge {
        int from = kMaster;
        int to = kMaster;
        std::set<std::string> listening;  // predicate filter
    };
    std::vector<Edge> edges;
    std::set<std::string> extensional;
    bool single_node = false;
};

/// Plans the component network for a source program: transforms, grounding,
/// stratification check, labeling and per-node rule assignment.
Topology deploy(const lang::ProgramSource& source, const EngineOptions& opts);

class EventSource {
public:
    virtual ~EventSource() = default;
    /// Next input event; nullopt at end of input (treated as eos).
    virtual std::optional<WireEvent> next() = 0;
};

class EventSink {
public:
    virtual ~EventSink() = default;
    virtual void push(const WireEvent& ev) = 0;
};

struct RunStats {
    bool inconsistent = false;
    std::int64_t ticks = 0;
    std::int64_t events_out = 0;
};

/// Executes the topology on an input stream: spawns one thread per reasoner,
/// wires the channels for the chosen transport, forwards tick barriers and
/// merges sink output into the external answer stream.
RunStats run(const Topology& topology, EventSource& source, EventSink& sink,
             const EngineOptions& opts);

/// NDJSON in, NDJSON out.
RunStats run_streams(const Topology& topology, std::istream& in, std::ostream& out,
                     const EngineOptions& opts);

/// Materialized canonical answer stream per output tick; used to compare runs
/// mode against mode.
std::vector<std::pair<TimePoint, IntervalStream>> per_tick_streams(
    const std::vector<WireEvent>& output, TimePoint origin = 0);

}  // namespace larstream

#endif  // LARSTREAM_RUNTIME_HPP
