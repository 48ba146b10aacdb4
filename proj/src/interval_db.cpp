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

#include "larstream/interval_db.hpp"

#include <algorithm>

namespace larstream {

void IntervalDB::open_at(Track& t, TimePoint at) {
    if (t.open_since) return;  // idempotent
    TimePoint start = at;
    // Reopening right after (or inside) the last closed run continues it.
    while (!t.closed.empty() && t.closed.back().hi >= at - 1) {
        start = std::min(start, t.closed.back().lo);
        t.closed.pop_back();
    }
    t.open_since = start;
}

void IntervalDB::close_at(Track& t, TimePoint at) {
    if (!t.open_since) return;  // idempotent
    TimePoint s = *t.open_since;
    t.open_since.reset();
    if (at - 1 >= s) t.closed.push_back(Interval(s, at - 1));
    // else: began and ended at the same tick, never observed
}

void IntervalDB::insert_point(Track& t, TimePoint at) {
    if (t.open_since && *t.open_since <= at) return;
    if (!t.closed.empty() && t.closed.back().hi >= at - 1 && !t.open_since) {
        if (t.closed.back().hi < at) t.closed.back().hi = at;
        return;
    }
    // General sorted insert with adjacency merge.
    Interval p(at, at);
    auto it = std::upper_bound(t.closed.begin(), t.closed.end(), p);
    it = t.closed.insert(it, p);
    // merge with neighbours
    std::size_t i = static_cast<std::size_t>(it - t.closed.begin());
    if (i > 0 && t.closed[i - 1].hi >= t.closed[i].lo - 1) {
        t.closed[i - 1].hi = std::max(t.closed[i - 1].hi, t.closed[i].hi);
        t.closed.erase(t.closed.begin() + static_cast<std::ptrdiff_t>(i));
        --i;
    }
    if (i + 1 < t.closed.size() && t.closed[i].hi >= t.closed[i + 1].lo - 1) {
        t.closed[i].hi = std::max(t.closed[i].hi, t.closed[i + 1].hi);
        t.closed.erase(t.closed.begin() + static_cast<std::ptrdiff_t>(i) + 1);
    }
}

void IntervalDB::apply(const OccurrenceBatch& batch) {
    if (batch.at < last_batch_) throw Error("non-monotone time");
    for (const Atom& a : batch.begins)
        for (const Atom& b : batch.ends)
            if (a == b) throw Error("atom " + a.text() + " both begins and ends at " +
                                    std::to_string(batch.at));
    last_batch_ = batch.at;
    for (const Atom& a : batch.begins) open_at(state_[a].data, batch.at);
    for (const Atom& a : batch.ends) close_at(state_[a].data, batch.at);
}

void IntervalDB::inject(const Atom& a, TimePoint t) {
    insert_point(state_[a].data, t);
}

void IntervalDB::assert_own(const Atom& a, TimePoint t, bool now_true) {
    Track& own = state_[a].own;
    if (now_true)
        open_at(own, t);
    else
        close_at(own, t);
}

bool IntervalDB::own_open(const Atom& a) const {
    auto it = state_.find(a);
    return it != state_.end() && it->second.own.open_since.has_value();
}

std::vector<Interval> IntervalDB::cover_at(const Atom& a, TimePoint t_now, bool* unbounded_open,
                                           std::optional<TimePoint> own_cap) const {
    if (unbounded_open) *unbounded_open = false;
    auto it = state_.find(a);
    if (it == state_.end()) return {};
    std::vector<Interval> raw;
    auto lane = [&](const Track& t, TimePoint open_cap, bool extends) {
        for (const Interval& iv : t.closed) raw.push_back(iv);
        if (t.open_since && *t.open_since <= open_cap) {
            raw.push_back(Interval(*t.open_since, open_cap));
            if (extends && unbounded_open) *unbounded_open = true;
        }
    };
    lane(it->second.data, t_now, true);
    lane(it->second.own, own_cap.value_or(t_now - 1), true);
    std::sort(raw.begin(), raw.end());
    std::vector<Interval> out;
    for (const Interval& iv : raw) {
        if (!out.empty() && iv.lo <= out.back().hi + 1)
            out.back().hi = std::max(out.back().hi, iv.hi);
        else
            out.push_back(iv);
    }
    return out;
}

bool IntervalDB::true_at(const Atom& a, TimePoint u, TimePoint t_now) const {
    for (const Interval& iv : cover_at(a, t_now)) {
        if (iv.lo > u) break;
        if (iv.contains(u)) return true;
    }
    return false;
}

void IntervalDB::check_range(TimePoint lo) const {
    if (lo < watermark_) throw Error("forgotten data queried");
}

IntervalStream IntervalDB::materialize(TimePoint t_now) const {
    IntervalStream out(Timeline(origin_, std::max(t_now, origin_)));
    for (const auto& [atom, lanes] : state_) {
        (void)lanes;
        for (const Interval& iv : cover_at(atom, t_now)) {
            if (iv.lo > t_now) continue;
            out.add(atom, Interval(iv.lo, std::min(iv.hi, t_now)));
        }
    }
    return out;
}

bool IntervalDB::query(TimePoint t_now, const StreamingAtom& phi) const {
    if (phi.window && phi.window->kind == WindowKind::Tuple) {
        // Tuple extents need global occurrence counts; evaluate on a snapshot.
        return holds(materialize(t_now), t_now, phi);
    }
    TimePoint win_lo = origin_;
    if (phi.window) win_lo = std::max(origin_, t_now - phi.window->size);
    switch (phi.mod) {
        case Modality::Plain:
            check_range(t_now);
            return true_at(phi.atom, t_now, t_now);
        case Modality::At: {
            if (phi.at_time < origin_ || phi.at_time > t_now) return false;
            if (phi.window && phi.at_time < win_lo) return false;
            check_range(phi.at_time);
            return true_at(phi.atom, phi.at_time, t_now);
        }
        case Modality::Diamond: {
            check_range(win_lo);
            for (const Interval& iv : cover_at(phi.atom, t_now))
                if (iv.hi >= win_lo && iv.lo <= t_now) return true;
            return false;
        }
        case Modality::Box: {
            check_range(win_lo);
            for (const Interval& iv : cover_at(phi.atom, t_now))
                if (iv.lo <= win_lo && iv.hi >= t_now) return true;
            return false;
        }
    }
    return false;
}

std::vector<TimePoint> IntervalDB::at_bindings(TimePoint t_now,
                                               const std::optional<WindowSpec>& window,
                                               const Atom& a) const {
    TimePoint lo = origin_, hi = t_now;
    if (window) {
        if (window->kind == WindowKind::Tuple) {
            IntervalStream snap = materialize(t_now);
            IntervalStream win = tuple_window(snap, t_now, window->size);
            lo = win.timeline().lo;
        } else {
            lo = std::max(origin_, t_now - window->size);
        }
    }
    check_range(lo);
    std::vector<TimePoint> out;
    for (const Interval& iv : cover_at(a, t_now)) {
        TimePoint from = std::max(iv.lo, lo), to = std::min(iv.hi, hi);
        for (TimePoint u = from; u <= to; ++u) out.push_back(u);
    }
    return out;
}

bool IntervalDB::covers(const Atom& a, TimePoint lo, TimePoint hi, TimePoint t_now) const {
    if (lo > hi) return true;
    check_range(lo);
    for (const Interval& iv : cover_at(a, t_now))
        if (iv.lo <= lo && iv.hi >= hi) return true;
    return false;
}

bool IntervalDB::any_in(const Atom& a, TimePoint lo, TimePoint hi, TimePoint t_now) const {
    if (lo > hi) return false;
    check_range(lo);
    for (const Interval& iv : cover_at(a, t_now))
        if (iv.hi >= lo && iv.lo <= hi) return true;
    return false;
}

void IntervalDB::cleanup(TimePoint t) {
    if (t <= watermark_) return;
    for (auto it = state_.begin(); it != state_.end();) {
        auto scrub = [&](Track& track) {
            std::vector<Interval> kept;
            for (Interval& iv : track.closed) {
                if (iv.hi < t) continue;
                if (iv.lo < t) iv.lo = t;
                kept.push_back(iv);
            }
            track.closed = std::move(kept);
            if (track.open_since && *track.open_since < t) track.open_since = t;
        };
        scrub(it->second.data);
        scrub(it->second.own);
        bool dead = it->second.data.closed.empty() && !it->second.data.open_since &&
                    it->second.own.closed.empty() && !it->second.own.open_since;
        it = dead ? state_.erase(it) : ++it;
    }
    watermark_ = t;
}

TriggerSchedule IntervalDB::next_trigger(TimePoint t_now,
                                         const std::vector<StreamingAtom>& tracked) const {
    TriggerSchedule out;
    auto schedule = [&](TimePoint due, const StreamingAtom& phi) {
        if (due > t_now) out[due].insert(phi);
    };
    for (const StreamingAtom& phi : tracked) {
        if (!phi.window) {
            if (phi.mod == Modality::At && phi.at_time > t_now) schedule(phi.at_time, phi);
            continue;
        }
        if (phi.window->kind == WindowKind::Tuple) {
            if (!state_.empty()) schedule(t_now + 1, phi);
            continue;
        }
        const std::int64_t n = phi.window->size;
        const TimePoint win_lo = std::max(origin_, t_now - n);
        // Post-solve view: the node's own truth at t_now is already decided.
        bool open = false;
        std::vector<Interval> cover = cover_at(phi.atom, t_now, &open, t_now);
        const Interval* last = cover.empty() ? nullptr : &cover.back();

        switch (phi.mod) {
            case Modality::Box: {
                bool now_true = false;
                for (const Interval& iv : cover)
                    if (iv.lo <= win_lo && iv.hi >= t_now) now_true = true;
                if (now_true) {
                    // An ongoing observation keeps the window covered; a
                    // closed run stops covering right after its end.
                    if (!open && last) schedule(last->hi + 1, phi);
                } else if (open && last) {
                    schedule(last->lo + n, phi);
                }
                break;
            }
            case Modality::Diamond: {
                bool now_true = false;
                for (const Interval& iv : cover)
                    if (iv.hi >= win_lo && iv.lo <= t_now) now_true = true;
                if (now_true && !open && last) schedule(last->hi + n + 1, phi);
                break;
            }
            case Modality::At: {
                if (phi.at_time != kUnboundTime) {
                    if (phi.at_time > t_now) schedule(phi.at_time, phi);
                    break;
                }
                // Earliest bound time point leaving the sliding window. Only
                // closed runs lose points for good; an ongoing observation
                // replaces every exiting point with a fresh one.
                std::size_t run_count = cover.size() - (open ? 1 : 0);
                for (std::size_t i = 0; i < run_count; ++i) {
                    TimePoint u = std::max(cover[i].lo, win_lo);
                    if (u <= std::min(cover[i].hi, t_now)) {
                        schedule(u + n + 1, phi);
                        break;
                    }
                }
                break;
            }
            default:
                break;
        }
    }
    return out;
}

}  // namespace larstream
