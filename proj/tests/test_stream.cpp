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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "larstream/stream.hpp"
#include "test_util.hpp"

using namespace larstream;

TEST_CASE("canonicalize merges overlapping and adjacent intervals") {
    IntervalStream s(Timeline(0, 40));
    Atom v("v");
    s.add(v, Interval(15, 19));
    s.add(v, Interval(17, 20));
    s.add(v, Interval(24, 27));
    IntervalStream c = canonicalize(s);
    REQUIRE(c.intervals(v) != nullptr);
    CHECK(*c.intervals(v) == std::vector<Interval>{{15, 20}, {24, 27}});

    IntervalStream adj(Timeline(0, 10));
    Atom a("a");
    adj.add(a, Interval(1, 2));
    adj.add(a, Interval(3, 4));
    CHECK(*canonicalize(adj).intervals(a) == std::vector<Interval>{{1, 4}});

    IntervalStream point(Timeline(0, 10));
    point.add(a, Interval(3, 3));
    CHECK(canonicalize(point) == point);
}

TEST_CASE("canonicalize drops atoms with no occurrences from comparisons") {
    IntervalStream s1(Timeline(0, 5));
    IntervalStream s2(Timeline(0, 5));
    Atom a("a");
    s1.add(a, Interval(1, 2));
    s2.add(a, Interval(1, 1));
    s2.add(a, Interval(2, 2));
    CHECK(canonicalize(s1) == canonicalize(s2));
}

TEST_CASE("equivalence: point-set comparison, reflexivity, timeline mismatch") {
    Atom a("a");
    IntervalStream s1(Timeline(0, 5)), s2(Timeline(0, 5));
    s1.add(a, Interval(1, 3));
    s2.add(a, Interval(1, 2));
    s2.add(a, Interval(2, 3));
    CHECK(equivalent(s1, s2));
    CHECK(equivalent(s1, s1));

    IntervalStream s3(Timeline(0, 6));
    s3.add(a, Interval(1, 3));
    CHECK_FALSE(equivalent(s1, s3));
}

TEST_CASE("substream containment requires a single covering interval") {
    Atom a("a");
    IntervalStream sub(Timeline(3, 7)), sup(Timeline(0, 10));
    sub.add(a, Interval(4, 5));
    sup.add(a, Interval(3, 7));
    CHECK(is_substream(sub, sup));

    IntervalStream sub2(Timeline(0, 10)), sup2(Timeline(0, 10));
    sub2.add(a, Interval(2, 5));
    sup2.add(a, Interval(2, 3));
    sup2.add(a, Interval(4, 5));
    CHECK_FALSE(is_substream(sub2, sup2));

    IntervalStream empty(Timeline(1, 4));
    CHECK(is_substream(empty, sup));
}

TEST_CASE("point stream unfolding") {
    Atom a("a");
    IntervalStream s(Timeline(0, 3));
    s.add(a, Interval(1, 2));
    PointStream p = to_point_stream(s);
    CHECK(p.at(1) == std::set<Atom>{a});
    CHECK(p.at(2) == std::set<Atom>{a});
    CHECK(p.at(0).empty());
    CHECK(p.at(3).empty());

    CHECK(to_point_stream(IntervalStream(Timeline(0, 3))).evaluations().empty());

    // Canonical example stream: v on [15,20] and [24,27], m on [21,29].
    IntervalStream fig = fig2_stream();
    PointStream pf = to_point_stream(fig);
    CHECK(pf.at(20) == std::set<Atom>{Atom("v")});
    CHECK(pf.at(25) == (std::set<Atom>{Atom("v"), Atom("m")}));
}

TEST_CASE("from_point_stream produces unmerged point intervals") {
    Atom a("a");
    PointStream p(Timeline(0, 5));
    p.add(1, a);
    p.add(2, a);
    IntervalStream s = from_point_stream(p);
    CHECK(*s.intervals(a) == std::vector<Interval>{{1, 1}, {2, 2}});

    PointStream single(Timeline(0, 5));
    single.add(3, a);
    CHECK(*from_point_stream(single).intervals(a) == std::vector<Interval>{{3, 3}});

    CHECK(from_point_stream(PointStream(Timeline(0, 5))).empty());
}

TEST_CASE("random streams: canonical oracle, idempotence, uniqueness, round trips") {
    std::mt19937 rng(777);
    for (int iter = 0; iter < 400; ++iter) {
        IntervalStream s = random_stream(rng, 4, 32);
        IntervalStream c = canonicalize(s);
        CHECK(c == pointset_canonical(s));
        CHECK(canonicalize(c) == c);
        CHECK(equivalent(s, c));

        // Uniqueness: a reshuffled equivalent stream has the same canonical form.
        IntervalStream shuffled = random_rechunk(rng, s);
        CHECK(equivalent(s, shuffled));
        CHECK(canonicalize(shuffled) == c);

        // Bijection with point streams.
        PointStream p = to_point_stream(s);
        CHECK(to_point_stream(from_point_stream(p)) == p);
        CHECK(equivalent(from_point_stream(to_point_stream(s)), s));

        // equivalent() agrees with a brute-force point-set comparison.
        IntervalStream other = random_stream(rng, 4, 32);
        bool brute = s.timeline() == other.timeline() &&
                     to_point_stream(s) == to_point_stream(other);
        CHECK(equivalent(s, other) == brute);
    }
}

TEST_CASE("json round trip") {
    IntervalStream s = fig2_stream();
    IntervalStream back = stream_from_json(stream_to_json(s));
    CHECK(back == s);
    CHECK(stream_from_json(stream_to_json(canonicalize(s))) == canonicalize(s));

    Atom p = parse_atom("edge(a,3)");
    CHECK(p.pred == "edge");
    REQUIRE(p.args.size() == 2);
    CHECK(p.args[0] == Value("a"));
    CHECK(p.args[1] == Value(std::int64_t{3}));
    CHECK(p.text() == "edge(a,3)");
    CHECK_THROWS_AS(parse_atom("Bad(X)"), Error);
}

TEST_CASE("interval validation") {
    CHECK_THROWS_AS(Interval(5, 4), Error);
    IntervalStream s(Timeline(0, 5));
    CHECK_THROWS_AS(s.add(Atom("a"), Interval(4, 7)), Error);
}
