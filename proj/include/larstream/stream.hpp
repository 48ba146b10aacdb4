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

#ifndef LARSTREAM_STREAM_HPP
#define LARSTREAM_STREAM_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace larstream {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Logical tick index. Timelines are closed integer intervals; any mapping
/// from wall-clock time to ticks happens before values reach this layer.
using TimePoint = std::int64_t;

/// Nonempty closed interval [lo, hi] of time points.
struct Interval {
    TimePoint lo = 0;
    TimePoint hi = 0;

    Interval() = default;
    Interval(TimePoint l, TimePoint h) : lo(l), hi(h) {
        if (l > h) throw Error("empty interval [" + std::to_string(l) + "," + std::to_string(h) + "]");
    }

    bool contains(TimePoint t) const { return lo <= t && t <= hi; }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
    TimePoint length() const { return hi - lo + 1; }

    bool operator==(const Interval& o) const { return lo == o.lo && hi == o.hi; }
    bool operator!=(const Interval& o) const { return !(*this == o); }
    bool operator<(const Interval& o) const { return lo != o.lo ? lo < o.lo : hi < o.hi; }
};

using Timeline = Interval;

/// Ground term: integer or symbolic constant. Integers order before symbols.
struct Value {
    std::variant<std::int64_t, std::string> v;

    Value() : v(std::int64_t{0}) {}
    Value(std::int64_t i) : v(i) {}
    Value(std::string s) : v(std::move(s)) {}
    Value(const char* s) : v(std::string(s)) {}

    bool is_int() const { return v.index() == 0; }
    std::int64_t as_int() const { return std::get<0>(v); }
    const std::string& as_sym() const { return std::get<1>(v); }
    std::string text() const;

    bool operator==(const Value& o) const { return v == o.v; }
    bool operator!=(const Value& o) const { return v != o.v; }
    bool operator<(const Value& o) const { return v < o.v; }
};

/// Ground atom: predicate plus constant arguments. Whether an atom is
/// extensional or intensional is a property of the program, not the atom.
struct Atom {
    std::string pred;
    std::vector<Value> args;

    Atom() = default;
    explicit Atom(std::string p) : pred(std::move(p)) {}
    Atom(std::string p, std::vector<Value> a) : pred(std::move(p)), args(std::move(a)) {}

    std::string text() const;

    bool operator==(const Atom& o) const { return pred == o.pred && args == o.args; }
    bool operator!=(const Atom& o) const { return !(*this == o); }
    bool operator<(const Atom& o) const { return pred != o.pred ? pred < o.pred : args < o.args; }
};

/// Parses "pred" or "pred(c1,...,ck)" with integer or symbolic constants.
Atom parse_atom(std::string_view text);

/// Timeline plus a per-atom set of occurrence intervals. Values are immutable
/// once built up; all operations below return fresh streams.
class IntervalStream {
public:
    IntervalStream() : timeline_(0, 0) {}
    explicit IntervalStream(Timeline t) : timeline_(t) {}

    const Timeline& timeline() const { return timeline_; }

    /// Inserts an occurrence interval, kept ordered by lo. The interval must
    /// lie within the timeline.
    void add(const Atom& a, Interval iv);

    const std::map<Atom, std::vector<Interval>>& atoms() const { return eta_; }
    const std::vector<Interval>* intervals(const Atom& a) const;

    /// True iff t lies in some interval of eta(a).
    bool holds_at(const Atom& a, TimePoint t) const;

    /// Union of eta(a) as maximal disjoint, non-adjacent intervals.
    std::vector<Interval> cover(const Atom& a) const;

    bool empty() const { return eta_.empty(); }

    bool operator==(const IntervalStream& o) const {
        return timeline_ == o.timeline_ && eta_ == o.eta_;
    }
    bool operator!=(const IntervalStream& o) const { return !(*this == o); }

private:
    Timeline timeline_;
    std::map<Atom, std::vector<Interval>> eta_;
};

/// Per-point evaluation view of a stream.
class PointStream {
public:
    PointStream() : timeline_(0, 0) {}
    explicit PointStream(Timeline t) : timeline_(t) {}

    const Timeline& timeline() const { return timeline_; }
    void add(TimePoint t, const Atom& a);
    const std::map<TimePoint, std::set<Atom>>& evaluations() const { return nu_; }
    std::set<Atom> at(TimePoint t) const;
    bool holds_at(const Atom& a, TimePoint t) const;

    bool operator==(const PointStream& o) const {
        return timeline_ == o.timeline_ && nu_ == o.nu_;
    }
    bool operator!=(const PointStream& o) const { return !(*this == o); }

private:
    Timeline timeline_;
    std::map<TimePoint, std::set<Atom>> nu_;  // only nonempty sets stored
};

/// Unique normal form: per atom, intervals pairwise disjoint with a gap of at
/// least one tick between any two; atoms with no occurrences dropped.
IntervalStream canonicalize(const IntervalStream& s);

/// Same timeline and, per atom, the same set of covered time points.
bool equivalent(const IntervalStream& a, const IntervalStream& b);

/// sub's timeline lies within sup's and every interval of sub is contained in
/// a single interval of sup for the same atom.
bool is_substream(const IntervalStream& sub, const IntervalStream& sup);

PointStream to_point_stream(const IntervalStream& s);

/// Point intervals [t,t] per occurrence; no merging.
IntervalStream from_point_stream(const PointStream& p);

/// JSON form: {"timeline":[i,j],"atoms":{"pred(a,b)":[[lo,hi],...]}}
std::string stream_to_json(const IntervalStream& s, bool pretty = false);
IntervalStream stream_from_json(std::string_view text);

}  // namespace larstream

#endif  // LARSTREAM_STREAM_HPP
