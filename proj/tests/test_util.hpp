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

#ifndef LARSTREAM_TESTS_TEST_UTIL_HPP
#define LARSTREAM_TESTS_TEST_UTIL_HPP

#include <random>
#include <string>
#include <vector>

#include "larstream/logic.hpp"
#include "larstream/stream.hpp"

namespace larstream {

// The running example stream: timeline [12,31], music video v observed on
// [15,20] and [24,27], meeting m on [21,29].
inline IntervalStream fig2_stream() {
    IntervalStream s(Timeline(12, 31));
    s.add(Atom("v"), Interval(15, 19));
    s.add(Atom("v"), Interval(17, 20));
    s.add(Atom("v"), Interval(24, 27));
    s.add(Atom("m"), Interval(21, 29));
    return s;
}

inline IntervalStream random_stream(std::mt19937& rng, int max_atoms, int max_len) {
    std::uniform_int_distribution<int> len(1, max_len);
    std::uniform_int_distribution<int> natoms(0, max_atoms);
    std::uniform_int_distribution<int> nivs(0, 4);
    const TimePoint lo = std::uniform_int_distribution<int>(0, 8)(rng);
    const TimePoint hi = lo + len(rng) - 1;
    IntervalStream s(Timeline(lo, hi));
    static const char* names[] = {"a", "b", "c", "d"};
    int count = natoms(rng);
    for (int i = 0; i < count; ++i) {
        Atom atom(names[i % 4]);
        int k = nivs(rng);
        for (int j = 0; j < k; ++j) {
            TimePoint a = std::uniform_int_distribution<TimePoint>(lo, hi)(rng);
            TimePoint b = std::uniform_int_distribution<TimePoint>(a, hi)(rng);
            s.add(atom, Interval(a, b));
        }
    }
    return s;
}

// Independent oracle: expand intervals to a point set, then re-chunk maximal
// runs. canonicalize() must agree with this on arbitrary streams.
inline IntervalStream pointset_canonical(const IntervalStream& s) {
    IntervalStream out(s.timeline());
    for (const auto& [atom, ivs] : s.atoms()) {
        std::set<TimePoint> pts;
        for (const Interval& iv : ivs)
            for (TimePoint t = iv.lo; t <= iv.hi; ++t) pts.insert(t);
        std::optional<TimePoint> start, prev;
        for (TimePoint t : pts) {
            if (prev && t == *prev + 1) {
                prev = t;
                continue;
            }
            if (start) out.add(atom, Interval(*start, *prev));
            start = prev = t;
        }
        if (start) out.add(atom, Interval(*start, *prev));
    }
    return out;
}

// Random evaluation instance for oracle-vs-implementation comparisons:
// ground rules over nullary atoms, short timeline, fixed extensional split.
struct RandomInstance {
    GroundProgram program;
    IntervalStream data;
    TimePoint t = 0;
};

inline RandomInstance random_small_instance(std::mt19937& rng, bool allow_tuple = false) {
    RandomInstance inst;
    const TimePoint len = 1 + static_cast<TimePoint>(rng() % 5);
    inst.data = IntervalStream(Timeline(0, len));
    inst.t = static_cast<TimePoint>(rng() % static_cast<unsigned long>(len + 1));
    inst.program.extensional = {"e1", "e2"};
    static const char* ext[] = {"e1", "e2"};
    static const char* intents[] = {"a", "b", "c"};

    for (const char* e : ext) {
        int occ = static_cast<int>(rng() % 3);
        for (int i = 0; i < occ; ++i) {
            TimePoint lo = static_cast<TimePoint>(rng() % static_cast<unsigned long>(len + 1));
            TimePoint hi = lo + static_cast<TimePoint>(rng() % 2);
            inst.data.add(Atom(e), Interval(lo, std::min(hi, len)));
        }
    }

    auto random_satom = [&]() {
        Atom atom(rng() % 3 == 0 ? ext[rng() % 2] : intents[rng() % 3]);
        WindowSpec win = allow_tuple && rng() % 5 == 0
                             ? WindowSpec(WindowKind::Tuple, 1 + static_cast<std::int64_t>(rng() % 3))
                             : WindowSpec(WindowKind::Time, static_cast<std::int64_t>(rng() % 5));
        TimePoint u = static_cast<TimePoint>(rng() % static_cast<unsigned long>(len + 1));
        switch (rng() % 5) {
            case 0: return StreamingAtom::plain(atom);
            case 1: return StreamingAtom::at(u, atom);
            case 2: return StreamingAtom::win_at(win, u, atom);
            case 3: return StreamingAtom::win_diamond(win, atom);
            default: return StreamingAtom::win_box(win, atom);
        }
    };

    int nrules = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < nrules; ++i) {
        GroundRule r;
        Atom head(intents[rng() % 3]);
        r.head = rng() % 3 == 0
                     ? StreamingAtom::at(static_cast<TimePoint>(rng() % static_cast<unsigned long>(len + 1)), head)
                     : StreamingAtom::plain(head);
        int body = static_cast<int>(rng() % 3);
        for (int j = 0; j < body; ++j) {
            if (rng() % 3 == 0)
                r.neg.push_back(random_satom());
            else
                r.pos.push_back(random_satom());
        }
        inst.program.rules.push_back(std::move(r));
    }
    return inst;
}

// Same point set, different chunking: splits each covered run into random
// overlapping pieces.
inline IntervalStream random_rechunk(std::mt19937& rng, const IntervalStream& s) {
    IntervalStream out(s.timeline());
    for (const auto& [atom, ivs] : s.atoms()) {
        (void)ivs;
        for (const Interval& run : s.cover(atom)) {
            TimePoint at = run.lo;
            while (at <= run.hi) {
                TimePoint end = std::uniform_int_distribution<TimePoint>(at, run.hi)(rng);
                // Occasionally stretch the piece to overlap the next one.
                TimePoint stretch = std::min(run.hi, end + std::uniform_int_distribution<TimePoint>(0, 2)(rng));
                out.add(atom, Interval(at, stretch));
                at = end + 1;
            }
        }
    }
    return out;
}

}  // namespace larstream

#endif  // LARSTREAM_TESTS_TEST_UTIL_HPP
