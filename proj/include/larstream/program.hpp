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

#ifndef LARSTREAM_PROGRAM_HPP
#define LARSTREAM_PROGRAM_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "larstream/logic.hpp"
#include "larstream/stream.hpp"

namespace larstream::lang {

struct SourceLoc {
    int line = 0;
    int col = 0;
};

struct ParseError : Error {
    SourceLoc loc;
    ParseError(SourceLoc l, const std::string& msg)
        : Error(std::to_string(l.line) + ":" + std::to_string(l.col) + ": " + msg), loc(l) {}
};

/// Terms: constants, variables, integer arithmetic (+, -, absolute value) and
/// range shorthand `lo..hi` (facts only).
struct Term {
    enum class Kind { Int, Sym, Var, Add, Sub, Abs, Range };
    Kind kind = Kind::Int;
    std::int64_t ival = 0;       // Int
    std::string name;            // Sym | Var
    std::vector<Term> kids;      // Add/Sub/Range: 2, Abs: 1

    static Term integer(std::int64_t v);
    static Term sym(std::string s);
    static Term var(std::string v);
    static Term add(Term l, Term r);
    static Term sub(Term l, Term r);
    static Term abs(Term t);
    static Term range(std::int64_t lo, std::int64_t hi);

    bool is_const() const;
    std::string text() const;
};

struct AtomTpl {
    std::string pred;
    std::vector<Term> args;
    std::string text() const;
};

enum class CmpOp { Lt, Le, Eq, Ne, Gt, Ge };

enum class LitForm { Plain, At, WinAt, WinDiamond, WinBox, Cmp };

struct Literal {
    LitForm form = LitForm::Plain;
    int negations = 0;  // 0 positive, 1 "not", 2 "not not"
    AtomTpl atom;
    std::optional<Term> time;          // At / WinAt
    std::optional<WindowSpec> window;  // Win*
    CmpOp cmp = CmpOp::Eq;             // Cmp
    Term lhs, rhs;                     // Cmp
    SourceLoc loc;

    std::string text() const;
};

struct RuleTpl {
    bool is_constraint = false;
    AtomTpl head;                   // unused for constraints
    std::optional<Term> head_time;  // @-head
    std::vector<Literal> body;
    SourceLoc loc;

    std::string text() const;
};

struct ProgramSource {
    std::vector<RuleTpl> rules;
    std::map<std::string, int> ext_decls;   // #ext pred/arity
    std::set<std::string> internal_preds;   // introduced by transforms

    std::set<std::string> head_preds() const;
    /// Declared extensional predicates plus body-only predicates.
    std::set<std::string> extensional_preds() const;
    std::set<std::string> intensional_preds() const;
    /// Intensional predicates minus transform-internal helpers.
    std::set<std::string> visible_intensional_preds() const;
};

/// Parses program text; reports syntax and safety violations with positions.
ProgramSource parse(std::string_view text);

std::string pretty(const ProgramSource& src);

/// Replaces each integrity constraint `:- B` with `fail__k :- B, not fail__k`
/// over a fresh internal predicate.
ProgramSource constraints_to_rules(ProgramSource src);

/// Rewrites `not not p(..)` into `not naux__p(..)` plus the choice companion
/// rule `naux__p(..) :- <positive host body>, not p(..)`.
ProgramSource eliminate_double_negation(ProgramSource src);

/// Both transforms, in order.
ProgramSource prepare(ProgramSource src);

/// Object-ground rule; any remaining variables are temporal and are bound
/// against stream contents at evaluation time.
struct DeployRule {
    RuleTpl tpl;
    std::vector<std::string> temporal_vars;
    int source_rule = -1;

    bool fully_ground() const { return temporal_vars.empty(); }
    /// Largest time window mentioned, for retention planning.
    std::int64_t max_window() const;
};

/// Instantiates object variables over the Herbrand universe (constants from
/// facts, ranges and rule atoms), evaluating builtins and dropping failed
/// instances. Temporal variables survive.
std::vector<DeployRule> ground(const ProgramSource& src);

/// Substitutes temporal variables from the given per-variable domains,
/// evaluates leftover builtins and returns fully ground rules.
std::vector<GroundRule> bind_temporal(const DeployRule& rule,
                                      const std::map<std::string, std::vector<TimePoint>>& domains);

/// Binds every temporal variable over the whole timeline. Suitable for
/// whole-stream verification; evaluation-time binding is the fast path.
std::vector<GroundRule> expand_over_timeline(const std::vector<DeployRule>& rules, Timeline t);

/// Convenience: prepared + ground + timeline-expanded program for the
/// declarative checking paths.
GroundProgram to_ground_program(const ProgramSource& prepared, Timeline t);

}  // namespace larstream::lang

#endif  // LARSTREAM_PROGRAM_HPP
