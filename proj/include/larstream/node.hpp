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

#ifndef LARSTREAM_NODE_HPP
#define LARSTREAM_NODE_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "larstream/interval_db.hpp"
#include "larstream/program.hpp"

namespace larstream {

/// Log of derivations dated beyond the current tick, re-injected into the
/// input when their time arrives.
class FutureLog {
public:
    void record(const Atom& a, TimePoint due, TimePoint now);
    std::vector<Atom> release_due(TimePoint t);
    std::optional<TimePoint> next_due() const;
    bool empty() const { return entries_.empty(); }

private:
    std::multimap<TimePoint, Atom> entries_;
};

struct NodeConfig {
    int component_id = 0;
    std::string name;
    std::vector<lang::DeployRule> rules;
    std::set<std::string> want_preds;  // referenced by rule bodies
    std::set<std::string> prod_preds;  // derived here
    std::set<std::string> pub_preds;   // emitted downstream (own part)
    std::map<std::string, int> atom_layers;  // deterministic solver order
    TimePoint origin = 0;
    bool cleanup_enabled = true;
    std::optional<std::string> external_solver;
};

struct SolveResult {
    bool sat = false;
    std::set<Atom> true_now;
    std::vector<std::pair<Atom, TimePoint>> future;  // future-dated heads
};

/// Rule split computed once per deployment: instances without temporal
/// variables convert to ground rules up front, the rest bind per tick.
struct PreparedRules {
    std::vector<GroundRule> static_rules;
    std::vector<lang::DeployRule> temporal;
};

PreparedRules prepare_rules(const std::vector<lang::DeployRule>& rules);

SolveResult solve_prepared(const PreparedRules& rules, const IntervalDB& db, TimePoint tick,
                           const NodeConfig& config);

/// Grounds the rules' window atoms against the store as of `tick`, reduces
/// them to a propositional residual over the current tick's own atoms and
/// solves it, deterministically picking the least answer under the
/// (layer, atom) order. Future-dated heads of fired rules are reported, past
/// dated ones dropped.
SolveResult solve_component(const std::vector<lang::DeployRule>& rules, const IntervalDB& db,
                            TimePoint tick, const NodeConfig& config);

struct StepResult {
    std::vector<std::pair<Atom, bool>> changes;  // (atom, begins) at this tick
    bool evaluated = false;
    bool inconsistent = false;
    std::optional<TimePoint> next_due;
};

/// One reasoner in the network: ingests occurrence batches, re-evaluates on
/// new data or due timers, and reports its answer-stream delta per tick.
class ReasonerNode {
public:
    explicit ReasonerNode(NodeConfig config);

    const NodeConfig& config() const { return config_; }

    /// Processes one tick barrier. Events in the batch must carry the tick's
    /// time; ticks must strictly increase.
    StepResult step(TimePoint tick, const OccurrenceBatch& batch);

    /// Earliest pending self-trigger (timer or future inference), if any.
    std::optional<TimePoint> next_due() const;

    const IntervalDB& db() const { return db_; }

    /// Debug snapshot: store contents and last delta as JSON.
    std::string debug_json(TimePoint t_now) const;

private:
    bool relevant(const OccurrenceBatch& batch) const;
    void refresh_schedule(TimePoint tick);

    NodeConfig config_;
    PreparedRules prepared_;
    IntervalDB db_;
    FutureLog future_;
    std::set<TimePoint> dues_;
    std::map<Atom, bool> prev_truth_;  // downstream-visible truth
    std::map<Atom, bool> prev_own_;    // derived truth only
    std::vector<StreamingAtom> tracked_;
    bool per_tick_reeval_ = false;
    bool warned_past_heads_ = false;
    TimePoint last_tick_;
    std::int64_t max_window_ = 0;
    std::optional<TimePoint> cleanup_floor_;  // lowest @-constant referenced
    std::vector<std::pair<Atom, bool>> last_delta_;
};

}  // namespace larstream

#endif  // LARSTREAM_NODE_HPP
