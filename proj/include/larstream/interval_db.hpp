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

#ifndef LARSTREAM_INTERVAL_DB_HPP
#define LARSTREAM_INTERVAL_DB_HPP

#include <limits>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "larstream/logic.hpp"
#include "larstream/stream.hpp"

namespace larstream {

/// Atom occurrences beginning and ending at one time point. An end event at t
/// means the atom was last observed at t-1.
struct OccurrenceBatch {
    TimePoint at = 0;
    std::vector<Atom> begins;
    std::vector<Atom> ends;
};

/// Placeholder time for tracked @-window atoms whose time variable is bound
/// per evaluation rather than fixed in the rule.
inline constexpr TimePoint kUnboundTime = std::numeric_limits<TimePoint>::min();

using TriggerSchedule = std::map<TimePoint, std::set<StreamingAtom>>;

/// Per-node canonical interval store. Two lanes per atom: observed data
/// (inbound events plus re-injected future inferences) whose open intervals
/// extend to the query time, and the node's own derivations, frozen strictly
/// below the current evaluation tick.
class IntervalDB {
public:
    explicit IntervalDB(TimePoint origin = 0)
        : origin_(origin), watermark_(origin) {}

    TimePoint origin() const { return origin_; }
    TimePoint watermark() const { return watermark_; }

    /// Ingests observation changes; batch times must not regress.
    void apply(const OccurrenceBatch& batch);

    /// Records a committed point occurrence [t, t] in the data lane.
    void inject(const Atom& a, TimePoint t);

    /// Updates the node's own truth of an atom at tick t.
    void assert_own(const Atom& a, TimePoint t, bool now_true);

    bool own_open(const Atom& a) const;

    /// Snapshot with data-lane open intervals closed at t_now and own-lane
    /// occurrences frozen at t_now - 1.
    IntervalStream materialize(TimePoint t_now) const;

    /// Direct evaluation against the stored intervals; equals holds() on the
    /// materialized snapshot. Throws when the queried range reaches below the
    /// watermark.
    bool query(TimePoint t_now, const StreamingAtom& phi) const;

    /// Time points in the (windowed) range where the atom is true; binds
    /// temporal variables of @-atoms.
    std::vector<TimePoint> at_bindings(TimePoint t_now, const std::optional<WindowSpec>& window,
                                       const Atom& a) const;

    /// Range queries over the merged lanes as of t_now.
    bool covers(const Atom& a, TimePoint lo, TimePoint hi, TimePoint t_now) const;
    bool any_in(const Atom& a, TimePoint lo, TimePoint hi, TimePoint t_now) const;

    /// Forgets everything strictly below t and advances the watermark.
    void cleanup(TimePoint t);

    /// Earliest re-evaluation times for the tracked window atoms, all
    /// strictly beyond t_now:
    ///   - box currently false with an open observation from s: due s+n
    ///   - box currently true backed by a closed run ending at e: due e+1
    ///   - diamond currently true with last closed occurrence e: due e+n+1
    ///   - @-window bindings: earliest closed-run point exit u+n+1 (ongoing
    ///     observations keep refreshing their bindings); constant future
    ///     @-times come due when the timeline reaches them
    ///   - tuple windows re-evaluate every tick while data exists
    TriggerSchedule next_trigger(TimePoint t_now, const std::vector<StreamingAtom>& tracked) const;

    bool empty() const { return state_.empty(); }

private:
    struct Track {
        std::vector<Interval> closed;  // canonical: disjoint, non-adjacent
        std::optional<TimePoint> open_since;
    };
    struct AtomState {
        Track data, own;
    };

    static void open_at(Track& t, TimePoint at);
    static void close_at(Track& t, TimePoint at);  // last observed at-1
    static void insert_point(Track& t, TimePoint at);

    // Merged cover of both lanes at evaluation time t_now; open data extends
    // to t_now, open own to own_cap (t_now-1 for the pre-solve view, t_now
    // for post-solve trigger planning). `unbounded_open` reports whether the
    // last run keeps extending with time.
    std::vector<Interval> cover_at(const Atom& a, TimePoint t_now, bool* unbounded_open = nullptr,
                                   std::optional<TimePoint> own_cap = std::nullopt) const;
    bool true_at(const Atom& a, TimePoint u, TimePoint t_now) const;
    void check_range(TimePoint lo) const;

    TimePoint origin_;
    TimePoint watermark_;
    TimePoint last_batch_ = std::numeric_limits<TimePoint>::min();
    std::map<Atom, AtomState> state_;
};

}  // namespace larstream

#endif  // LARSTREAM_INTERVAL_DB_HPP
