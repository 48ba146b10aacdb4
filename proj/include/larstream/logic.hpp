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

#ifndef LARSTREAM_LOGIC_HPP
#define LARSTREAM_LOGIC_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "larstream/stream.hpp"

namespace larstream {

enum class WindowKind { Time, Tuple };

/// Sliding window selector; sizes are tick counts for time windows and
/// occurrence counts for tuple windows.
struct WindowSpec {
    WindowKind kind = WindowKind::Time;
    std::int64_t size = 0;

    WindowSpec() = default;
    WindowSpec(WindowKind k, std::int64_t n) : kind(k), size(n) {
        if (k == WindowKind::Time && n < 0) throw Error("time window size must be >= 0");
        if (k == WindowKind::Tuple && n < 1) throw Error("tuple window size must be >= 1");
    }

    bool operator==(const WindowSpec& o) const { return kind == o.kind && size == o.size; }
    bool operator<(const WindowSpec& o) const {
        if (kind != o.kind) return kind < o.kind;
        return size < o.size;
    }
};

enum class Modality { Plain, At, Diamond, Box };

/// Temporal formula over one atom: a | @t a | [win]@t a | [win]<>a | [win][]a.
/// Bare <>a / []a (no window) are accepted for evaluation over the full
/// timeline even though rule bodies never contain them.
struct StreamingAtom {
    Modality mod = Modality::Plain;
    std::optional<WindowSpec> window;
    TimePoint at_time = 0;  // meaningful iff mod == At
    Atom atom;

    static StreamingAtom plain(Atom a);
    static StreamingAtom at(TimePoint t, Atom a);
    static StreamingAtom win_at(WindowSpec w, TimePoint t, Atom a);
    static StreamingAtom win_diamond(WindowSpec w, Atom a);
    static StreamingAtom win_box(WindowSpec w, Atom a);
    static StreamingAtom diamond(Atom a);
    static StreamingAtom box(Atom a);

    std::string text() const;

    bool operator==(const StreamingAtom& o) const {
        return mod == o.mod && window == o.window &&
               (mod != Modality::At || at_time == o.at_time) && atom == o.atom;
    }
    bool operator!=(const StreamingAtom& o) const { return !(*this == o); }
    bool operator<(const StreamingAtom& o) const;
};

/// Normal rule over streaming atoms. The head is a plain or @-atom whose
/// predicate must be intensional in the owning program.
struct GroundRule {
    StreamingAtom head;
    std::vector<StreamingAtom> pos;
    std::vector<StreamingAtom> neg;

    std::string text() const;
};

struct GroundProgram {
    std::vector<GroundRule> rules;
    std::set<std::string> extensional;  // predicate names

    bool is_extensional(const Atom& a) const { return extensional.count(a.pred) > 0; }
    bool has_tuple_windows() const;
    void validate() const;  // head shape + intensional heads
};

/// Clips the stream to [max(l, t-n), t].
IntervalStream time_window(const IntervalStream& s, TimePoint t, std::int64_t n);

/// Clips to the shortest [t', t] holding at least n occurrence pairs of the
/// canonical form; falls back to [l, t] when fewer exist in total.
IntervalStream tuple_window(const IntervalStream& s, TimePoint t, std::int64_t n);

bool holds(const IntervalStream& s, TimePoint t, const StreamingAtom& phi);
bool body_holds(const IntervalStream& s, TimePoint t, const GroundRule& r);
bool rule_holds(const IntervalStream& s, TimePoint t, const GroundRule& r);
bool is_model(const IntervalStream& s, TimePoint t, const GroundProgram& p);

/// Rules whose body holds in s at t.
std::vector<GroundRule> reduct(const GroundProgram& p, const IntervalStream& s, TimePoint t);

inline constexpr std::size_t kDefaultEnumerationBudget = 20;

/// Checks the two answer-stream conditions: candidate models the program at t
/// and no strictly smaller interpretation stream models the reduct. Programs
/// without tuple windows use a least-model minimality check; otherwise proper
/// substreams are enumerated, guarded by the budget.
bool is_answer_stream(const IntervalStream& data, const IntervalStream& candidate,
                      const GroundProgram& p, TimePoint t,
                      std::size_t budget = kDefaultEnumerationBudget);

/// All canonical answer streams, by brute-force enumeration of subsets of the
/// derivable (intensional atom, time point) pairs, in lexicographic order by
/// atom then time.
std::vector<IntervalStream> enumerate_answer_streams(const IntervalStream& data,
                                                     const GroundProgram& p, TimePoint t,
                                                     std::size_t budget = kDefaultEnumerationBudget);

/// The (atom, time) pairs some rule head can derive at evaluation time t.
/// Intensional occurrences of any answer stream are confined to these.
std::vector<std::pair<Atom, TimePoint>> derivable_pairs(const GroundProgram& p, TimePoint t);

/// Occurrence pairs of the canonical form, sorted by atom then time; the
/// ordering key used for deterministic answer selection.
std::vector<std::pair<Atom, TimePoint>> occurrence_list(const IntervalStream& s);

}  // namespace larstream

#endif  // LARSTREAM_LOGIC_HPP
