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

#include <algorithm>

#include "larstream/program.hpp"

using namespace larstream;
using namespace larstream::lang;

namespace {

const char* kCaching = R"(
high :- value(V), alpha(V) at T [3], 18 <= V.
mid  :- value(V), alpha(V) at T [3], 12 <= V, V < 18.
low  :- value(V), alpha(V) at T [3], V <= 12.
lfu :- high always [3].
lru :- mid always [3].
fifo :- low always [3], rtm50 in [3].
done :- lfu.
done :- lru.
done :- fifo.
random :- not done.
value(5). value(15). value(25).
)";

}  // namespace

TEST_CASE("parses window forms") {
    ProgramSource p = parse("lfu :- high always [3].");
    REQUIRE(p.rules.size() == 1);
    REQUIRE(p.rules[0].body.size() == 1);
    const Literal& lit = p.rules[0].body[0];
    CHECK(lit.form == LitForm::WinBox);
    CHECK(lit.window->kind == WindowKind::Time);
    CHECK(lit.window->size == 3);
    CHECK(lit.atom.pred == "high");

    ProgramSource q = parse("q1(1,Y) :- send0(Y) in [1], d1(Y).");
    REQUIRE(q.rules.size() == 1);
    CHECK(q.rules[0].body[0].form == LitForm::WinDiamond);
    CHECK(q.rules[0].body[0].atom.args[0].kind == Term::Kind::Var);

    ProgramSource t = parse("a :- b in [#5].");
    CHECK(t.rules[0].body[0].window->kind == WindowKind::Tuple);

    CHECK(parse("").rules.empty());
}

TEST_CASE("parses the caching program") {
    ProgramSource p = parse(kCaching);
    CHECK(p.rules.size() == 13);
    CHECK(p.head_preds() ==
          std::set<std::string>{"high", "mid", "low", "lfu", "lru", "fifo", "done", "random", "value"});
    CHECK(p.extensional_preds() == std::set<std::string>{"alpha", "rtm50"});
}

TEST_CASE("syntax errors carry positions") {
    try {
        parse("a :- b,\n  c(.\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.loc.line == 2);
        std::string msg = e.what();
        CHECK(msg.find("expected") != std::string::npos);
    }
}

TEST_CASE("safety violations name the variable") {
    CHECK_THROWS_WITH_AS(parse("p(X) :- q(Y)."), "1:1: unsafe variable 'X'", ParseError);
    CHECK_THROWS_WITH_AS(parse("p :- q(Y), not r(Z)."), "1:1: unsafe variable 'Z'", ParseError);
    CHECK_THROWS_WITH_AS(parse("p :- q(Y), Y < Z."), "1:1: unsafe variable 'Z'", ParseError);
    // Temporal binding makes T safe.
    CHECK_NOTHROW(parse("p at T :- q at T [3]."));
    CHECK_THROWS_AS(parse("p at T :- q."), ParseError);
}

TEST_CASE("declaration handling") {
    ProgramSource p = parse("#ext alpha/1.\nhigh :- alpha(V) at T [3], 18 <= V.\n");
    CHECK(p.ext_decls.at("alpha") == 1);
    CHECK_THROWS_AS(parse("#ext p/0.\np :- q."), ParseError);       // extensional head
    CHECK_THROWS_AS(parse("p(1) :- q.\np(1,2) :- q."), ParseError); // arity clash
    CHECK_NOTHROW(parse("#show send1/1.\nsend1(X) :- q1(X)."));
}

TEST_CASE("pretty-print round trip is a fixpoint") {
    for (const char* src : {kCaching,
                            "q1(1,Y) :- send0(Y) in [50], d1(Y).\nd1(1..18).\n"
                            ":- q1(X1,Y), q1(X2,Y), X1 < X2.\n"
                            ":- q1(X1,Y1), q1(X2,Y2), X1 < X2, X2 - X1 = |Y2 - Y1|.\n",
                            "#ext s/1.\np(X) at T + 2 :- s(X) at T [4], not q(X).\nq(X) :- s(X) in [#3].\n"}) {
        std::string once = pretty(parse(src));
        std::string twice = pretty(parse(once));
        CHECK(once == twice);
    }
}

TEST_CASE("constraint transform introduces guarded rules") {
    ProgramSource p = constraints_to_rules(parse(":- a, b."));
    REQUIRE(p.rules.size() == 1);
    const RuleTpl& r = p.rules[0];
    CHECK_FALSE(r.is_constraint);
    CHECK(p.internal_preds.count(r.head.pred) == 1);
    REQUIRE(r.body.size() == 3);
    CHECK(r.body[2].negations == 1);
    CHECK(r.body[2].atom.pred == r.head.pred);

    ProgramSource untouched = constraints_to_rules(parse("a :- b."));
    CHECK(untouched.rules[0].text() == "a :- b.");
    CHECK(untouched.internal_preds.empty());
}

TEST_CASE("double negation becomes a choice pair") {
    ProgramSource p = eliminate_double_negation(parse("q(R,C) :- d(R), d(C), not not q(R,C).\nd(1..2)."));
    REQUIRE(p.rules.size() == 3);
    const RuleTpl& choice = p.rules[0];
    CHECK(choice.body[2].negations == 1);
    CHECK(choice.body[2].atom.pred == "naux__q");
    const RuleTpl& companion = p.rules[2];
    CHECK(companion.head.pred == "naux__q");
    REQUIRE(companion.body.size() == 3);
    CHECK(companion.body[2].negations == 1);
    CHECK(companion.body[2].atom.pred == "q");
}

TEST_CASE("grounding instantiates over the universe") {
    auto rules = ground(parse("d(1..2).\np(X) :- d(X)."));
    std::vector<std::string> texts;
    for (const auto& r : rules) texts.push_back(r.tpl.text());
    std::sort(texts.begin(), texts.end());
    CHECK(texts == std::vector<std::string>{"d(1).", "d(2).", "p(1) :- d(1).", "p(2) :- d(2)."});
}

TEST_CASE("grounding counts: 4-queens column constraint") {
    ProgramSource p = prepare(parse(
        "d(1..4).\n"
        "q(R,C) :- d(R), d(C), not not q(R,C).\n"
        ":- q(X1,Y), q(X2,Y), X1 < X2.\n"));
    auto rules = ground(p);
    // The constraint is source rule 2 after the constraint transform.
    int constraint_instances = 0;
    for (const auto& r : rules)
        if (r.source_rule == 2) ++constraint_instances;
    CHECK(constraint_instances == 24);  // 4 columns x C(4,2) row pairs
}

TEST_CASE("builtins filter instances at grounding time") {
    auto rules = ground(parse("value(5). value(15). value(25).\nhigh :- value(V), 18 <= V."));
    int high_rules = 0;
    for (const auto& r : rules)
        if (r.tpl.head.pred == "high") {
            ++high_rules;
            CHECK(r.tpl.body[0].atom.args[0].ival == 25);
        }
    CHECK(high_rules == 1);
}

TEST_CASE("temporal variables survive grounding and bind later") {
    ProgramSource p = parse("#ext alpha/1.\nvalue(25).\nhigh :- value(V), alpha(V) at T [3], 18 <= V.");
    auto rules = ground(p);
    const DeployRule* high = nullptr;
    for (const auto& r : rules)
        if (r.tpl.head.pred == "high") high = &r;
    REQUIRE(high != nullptr);
    CHECK(high->temporal_vars == std::vector<std::string>{"T"});
    CHECK(high->max_window() == 3);

    auto bound = bind_temporal(*high, {{"T", {7, 9}}});
    REQUIRE(bound.size() == 2);
    CHECK(bound[0].pos[1].mod == Modality::At);
    CHECK(bound[0].pos[1].at_time == 7);
    CHECK(bound[1].pos[1].at_time == 9);

    auto none = bind_temporal(*high, {{"T", {}}});
    CHECK(none.empty());
}

TEST_CASE("head time arithmetic evaluates on binding") {
    ProgramSource p = parse("#ext ping/0.\necho at T + 2 :- ping at T [3].");
    auto rules = ground(p);
    REQUIRE(rules.size() == 1);
    auto bound = bind_temporal(rules[0], {{"T", {5}}});
    REQUIRE(bound.size() == 1);
    CHECK(bound[0].head.mod == Modality::At);
    CHECK(bound[0].head.at_time == 7);
}

TEST_CASE("arithmetic overflow is reported") {
    ProgramSource p = parse("p(9223372036854775806).\nq(X + 2) :- p(X).");
    CHECK_THROWS_WITH_AS(ground(p), "arithmetic overflow", Error);
}

TEST_CASE("whole-program expansion over a timeline") {
    ProgramSource p = parse("#ext b/0.\na :- b in [2].");
    GroundProgram gp = to_ground_program(p, Timeline(0, 5));
    REQUIRE(gp.rules.size() == 1);
    CHECK(gp.extensional == std::set<std::string>{"b"});

    ProgramSource with_time = parse("#ext b/0.\na :- b at T [2].");
    GroundProgram expanded = to_ground_program(with_time, Timeline(0, 5));
    CHECK(expanded.rules.size() == 6);  // one instance per timeline point
}
