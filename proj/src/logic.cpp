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

#include "larstream/logic.hpp"

#include <algorithm>

namespace larstream {

StreamingAtom StreamingAtom::plain(Atom a) {
    StreamingAtom s;
    s.mod = Modality::Plain;
    s.atom = std::move(a);
    return s;
}

StreamingAtom StreamingAtom::at(TimePoint t, Atom a) {
    StreamingAtom s;
    s.mod = Modality::At;
    s.at_time = t;
    s.atom = std::move(a);
    return s;
}

StreamingAtom StreamingAtom::win_at(WindowSpec w, TimePoint t, Atom a) {
    StreamingAtom s = at(t, std::move(a));
    s.window = w;
    return s;
}

StreamingAtom StreamingAtom::win_diamond(WindowSpec w, Atom a) {
    StreamingAtom s = diamond(std::move(a));
    s.window = w;
    return s;
}

StreamingAtom StreamingAtom::win_box(WindowSpec w, Atom a) {
    StreamingAtom s = box(std::move(a));
    s.window = w;
    return s;
}

StreamingAtom StreamingAtom::diamond(Atom a) {
    StreamingAtom s;
    s.mod = Modality::Diamond;
    s.atom = std::move(a);
    return s;
}

StreamingAtom StreamingAtom::box(Atom a) {
    StreamingAtom s;
    s.mod = Modality::Box;
    s.atom = std::move(a);
    return s;
}

std::string StreamingAtom::text() const {
    std::string win;
    if (window) {
        win = " [" + std::string(window->kind == WindowKind::Tuple ? "#" : "") +
              std::to_string(window->size) + "]";
    }
    switch (mod) {
        case Modality::Plain: return atom.text();
        case Modality::At: return atom.text() + " at " + std::to_string(at_time) + win;
        case Modality::Diamond:
            return window ? atom.text() + " in" + win : "<>" + atom.text();
        case Modality::Box:
            return window ? atom.text() + " always" + win : "[]" + atom.text();
    }
    return atom.text();
}

bool StreamingAtom::operator<(const StreamingAtom& o) const {
    if (mod != o.mod) return mod < o.mod;
    if (window.has_value() != o.window.has_value()) return o.window.has_value();
    if (window && !(*window == *o.window)) return *window < *o.window;
    if (mod == Modality::At && at_time != o.at_time) return at_time < o.at_time;
    return atom < o.atom;
}

std::string GroundRule::text() const {
    std::string out = head.text();
    if (pos.empty() && neg.empty()) return out + ".";
    out += " :- ";
    bool first = true;
    for (const auto& b : pos) {
        if (!first) out += ", ";
        out += b.text();
        first = false;
    }
    for (const auto& b : neg) {
        if (!first) out += ", ";
        out += "not " + b.text();
        first = false;
    }
    return out + ".";
}

bool GroundProgram::has_tuple_windows() const {
    auto tuple = [](const StreamingAtom& a) {
        return a.window && a.window->kind == WindowKind::Tuple;
    };
    for (const auto& r : rules) {
        if (std::any_of(r.pos.begin(), r.pos.end(), tuple)) return true;
        if (std::any_of(r.neg.begin(), r.neg.end(), tuple)) return true;
    }
    return false;
}

void GroundProgram::validate() const {
    for (const auto& r : rules) {
        if (r.head.window || (r.head.mod != Modality::Plain && r.head.mod != Modality::At))
            throw Error("rule head must be a plain or @-atom: " + r.head.text());
        if (extensional.count(r.head.atom.pred) > 0)
            throw Error("rule head over extensional predicate '" + r.head.atom.pred + "'");
    }
}

IntervalStream time_window(const IntervalStream& s, TimePoint t, std::int64_t n) {
    if (!s.timeline().contains(t)) throw Error("evaluation time outside timeline");
    Timeline win(std::max(s.timeline().lo, t - n), t);
    IntervalStream out(win);
    for (const auto& [atom, ivs] : s.atoms()) {
        for (const Interval& iv : ivs) {
            TimePoint lo = std::max(iv.lo, win.lo), hi = std::min(iv.hi, win.hi);
            if (lo <= hi) out.add(atom, Interval(lo, hi));
        }
    }
    return out;
}

IntervalStream tuple_window(const IntervalStream& s, TimePoint t, std::int64_t n) {
    if (!s.timeline().contains(t)) throw Error("evaluation time outside timeline");
    if (n < 1) throw Error("tuple window size must be >= 1");
    const TimePoint l = s.timeline().lo;
    // Occurrence pairs per time point, from the canonical cover.
    const std::size_t len = static_cast<std::size_t>(t - l + 1);
    std::vector<std::int64_t> per_point(len, 0);
    for (const auto& [atom, ivs] : s.atoms()) {
        (void)ivs;
        for (const Interval& iv : s.cover(atom)) {
            TimePoint lo = std::max(iv.lo, l), hi = std::min(iv.hi, t);
            for (TimePoint u = lo; u <= hi; ++u) per_point[static_cast<std::size_t>(u - l)]++;
        }
    }
    TimePoint start = l;
    std::int64_t count = 0;
    for (TimePoint u = t; u >= l; --u) {
        count += per_point[static_cast<std::size_t>(u - l)];
        if (count >= n) {
            start = u;
            break;
        }
    }
    Timeline win(start, t);
    IntervalStream out(win);
    for (const auto& [atom, ivs] : s.atoms()) {
        for (const Interval& iv : ivs) {
            TimePoint lo = std::max(iv.lo, win.lo), hi = std::min(iv.hi, win.hi);
            if (lo <= hi) out.add(atom, Interval(lo, hi));
        }
    }
    return out;
}

namespace {

bool covers_timeline(const IntervalStream& s, const Atom& a) {
    auto cov = s.cover(a);
    return cov.size() == 1 && cov[0].lo <= s.timeline().lo && cov[0].hi >= s.timeline().hi;
}

bool holds_unwindowed(const IntervalStream& s, TimePoint t, const StreamingAtom& phi) {
    switch (phi.mod) {
        case Modality::Plain:
            return s.holds_at(phi.atom, t);
        case Modality::At:
            return s.timeline().contains(phi.at_time) && s.holds_at(phi.atom, phi.at_time);
        case Modality::Diamond:
            return !s.cover(phi.atom).empty();
        case Modality::Box:
            return covers_timeline(s, phi.atom);
    }
    return false;
}

}  // namespace

bool holds(const IntervalStream& s, TimePoint t, const StreamingAtom& phi) {
    if (!s.timeline().contains(t)) throw Error("evaluation time outside timeline");
    if (!phi.window) return holds_unwindowed(s, t, phi);
    IntervalStream w = phi.window->kind == WindowKind::Time
                           ? time_window(s, t, phi.window->size)
                           : tuple_window(s, t, phi.window->size);
    StreamingAtom inner = phi;
    inner.window.reset();
    return holds_unwindowed(w, t, inner);
}

bool body_holds(const IntervalStream& s, TimePoint t, const GroundRule& r) {
    for (const auto& b : r.pos)
        if (!holds(s, t, b)) return false;
    for (const auto& b : r.neg)
        if (holds(s, t, b)) return false;
    return true;
}

bool rule_holds(const IntervalStream& s, TimePoint t, const GroundRule& r) {
    return !body_holds(s, t, r) || holds(s, t, r.head);
}

bool is_model(const IntervalStream& s, TimePoint t, const GroundProgram& p) {
    for (const auto& r : p.rules)
        if (!rule_holds(s, t, r)) return false;
    return true;
}

std::vector<GroundRule> reduct(const GroundProgram& p, const IntervalStream& s, TimePoint t) {
    std::vector<GroundRule> out;
    for (const auto& r : p.rules)
        if (body_holds(s, t, r)) out.push_back(r);
    return out;
}

std::vector<std::pair<Atom, TimePoint>> derivable_pairs(const GroundProgram& p, TimePoint t) {
    std::set<std::pair<Atom, TimePoint>> seen;
    for (const auto& r : p.rules) {
        TimePoint when = r.head.mod == Modality::At ? r.head.at_time : t;
        seen.insert({r.head.atom, when});
    }
    return {seen.begin(), seen.end()};
}

std::vector<std::pair<Atom, TimePoint>> occurrence_list(const IntervalStream& s) {
    std::vector<std::pair<Atom, TimePoint>> out;
    for (const auto& [atom, ivs] : s.atoms()) {
        (void)ivs;
        for (const Interval& iv : s.cover(atom))
            for (TimePoint u = iv.lo; u <= iv.hi; ++u) out.push_back({atom, u});
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

std::map<Atom, std::vector<Interval>> extensional_part(const IntervalStream& s,
                                                       const GroundProgram& p) {
    IntervalStream canon = canonicalize(s);
    std::map<Atom, std::vector<Interval>> out;
    for (const auto& [atom, ivs] : canon.atoms())
        if (p.is_extensional(atom)) out[atom] = ivs;
    return out;
}

std::vector<std::pair<Atom, TimePoint>> intensional_points(const IntervalStream& s,
                                                           const GroundProgram& p) {
    std::vector<std::pair<Atom, TimePoint>> out;
    for (const auto& [atom, time] : occurrence_list(s))
        if (!p.is_extensional(atom)) out.push_back({atom, time});
    return out;
}

IntervalStream with_points(const IntervalStream& base,
                           const std::vector<std::pair<Atom, TimePoint>>& points,
                           std::uint64_t mask) {
    IntervalStream out = base;
    for (std::size_t i = 0; i < points.size(); ++i)
        if (mask & (std::uint64_t{1} << i)) out.add(points[i].first, Interval(points[i].second, points[i].second));
    return out;
}

bool models_rules(const IntervalStream& s, TimePoint t, const std::vector<GroundRule>& rules) {
    for (const auto& r : rules)
        if (!rule_holds(s, t, r)) return false;
    return true;
}

/// Least interpretation-stream model of the reduct with negative literals
/// dropped. Valid for minimality only when every window is time-based, which
/// makes all streaming atoms monotone under stream growth.
IntervalStream reduct_least_model(const IntervalStream& data,
                                  const std::vector<GroundRule>& reduct_rules, TimePoint t) {
    IntervalStream lm = data;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& r : reduct_rules) {
            bool fires = true;
            for (const auto& b : r.pos)
                if (!holds(lm, t, b)) { fires = false; break; }
            if (!fires) continue;
            TimePoint when = r.head.mod == Modality::At ? r.head.at_time : t;
            if (!lm.timeline().contains(when)) continue;
            if (!lm.holds_at(r.head.atom, when)) {
                lm.add(r.head.atom, Interval(when, when));
                changed = true;
            }
        }
    }
    return lm;
}

}  // namespace

bool is_answer_stream(const IntervalStream& data, const IntervalStream& candidate,
                      const GroundProgram& p, TimePoint t, std::size_t budget) {
    p.validate();
    if (!data.timeline().contains(t)) throw Error("evaluation time outside timeline");
    for (const auto& [atom, ivs] : data.atoms()) {
        (void)ivs;
        if (!p.is_extensional(atom))
            throw Error("data stream contains non-extensional atom " + atom.text());
    }
    if (candidate.timeline() != data.timeline() ||
        extensional_part(candidate, p) != extensional_part(data, p))
        throw Error("candidate not an interpretation stream");

    if (!is_model(candidate, t, p)) return false;

    std::vector<GroundRule> red = reduct(p, candidate, t);
    if (!p.has_tuple_windows()) {
        IntervalStream lm = reduct_least_model(data, red, t);
        return equivalent(lm, candidate);
    }

    // Tuple windows break monotonicity; fall back to enumerating proper
    // substreams of the candidate's intensional occurrences.
    std::vector<std::pair<Atom, TimePoint>> points = intensional_points(candidate, p);
    if (points.size() > budget) throw Error("instance too large for enumeration");
    const std::uint64_t full = (points.size() == 64) ? ~std::uint64_t{0}
                                                     : (std::uint64_t{1} << points.size()) - 1;
    for (std::uint64_t mask = 0; mask < full; ++mask) {
        IntervalStream sub = with_points(data, points, mask);
        if (models_rules(sub, t, red)) return false;
    }
    return true;
}

std::vector<IntervalStream> enumerate_answer_streams(const IntervalStream& data,
                                                     const GroundProgram& p, TimePoint t,
                                                     std::size_t budget) {
    p.validate();
    std::vector<std::pair<Atom, TimePoint>> cands;
    for (const auto& [atom, when] : derivable_pairs(p, t)) {
        if (p.is_extensional(atom))
            throw Error("rule head over extensional predicate '" + atom.pred + "'");
        if (data.timeline().contains(when)) cands.push_back({atom, when});
    }
    if (cands.size() > budget) throw Error("instance too large for enumeration");

    std::vector<IntervalStream> found;
    const std::uint64_t total = std::uint64_t{1} << cands.size();
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        IntervalStream cand = with_points(data, cands, mask);
        if (is_answer_stream(data, cand, p, t, budget)) found.push_back(canonicalize(cand));
    }
    std::sort(found.begin(), found.end(), [](const IntervalStream& a, const IntervalStream& b) {
        return occurrence_list(a) < occurrence_list(b);
    });
    return found;
}

}  // namespace larstream
