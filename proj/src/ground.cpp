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

#include <algorithm>
#include <map>
#include <set>

#include "larstream/program.hpp"

namespace larstream::lang {

namespace {

using Binding = std::map<std::string, Value>;

constexpr std::size_t kGroundingCap = 50'000'000;

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw Error("arithmetic overflow");
    return r;
}

std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_sub_overflow(a, b, &r)) throw Error("arithmetic overflow");
    return r;
}

std::optional<Value> try_eval(const Term& t, const Binding& b) {
    switch (t.kind) {
        case Term::Kind::Int: return Value(t.ival);
        case Term::Kind::Sym: return Value(t.name);
        case Term::Kind::Var: {
            auto it = b.find(t.name);
            if (it == b.end()) return std::nullopt;
            return it->second;
        }
        case Term::Kind::Range:
            throw Error("range terms are only allowed in facts");
        case Term::Kind::Abs: {
            auto inner = try_eval(t.kids[0], b);
            if (!inner) return std::nullopt;
            if (!inner->is_int()) throw Error("arithmetic over non-integer term");
            std::int64_t v = inner->as_int();
            return Value(v < 0 ? checked_sub(0, v) : v);
        }
        case Term::Kind::Add:
        case Term::Kind::Sub: {
            auto l = try_eval(t.kids[0], b);
            auto r = try_eval(t.kids[1], b);
            if (!l || !r) return std::nullopt;
            if (!l->is_int() || !r->is_int()) throw Error("arithmetic over non-integer term");
            return Value(t.kind == Term::Kind::Add ? checked_add(l->as_int(), r->as_int())
                                                   : checked_sub(l->as_int(), r->as_int()));
        }
    }
    return std::nullopt;
}

Value eval(const Term& t, const Binding& b) {
    auto v = try_eval(t, b);
    if (!v) throw Error("unbound variable in term " + t.text());
    return *v;
}

bool eval_cmp(CmpOp op, const Value& l, const Value& r) {
    if (op == CmpOp::Eq) return l == r;
    if (op == CmpOp::Ne) return !(l == r);
    if (!l.is_int() || !r.is_int()) throw Error("order comparison over non-integer term");
    switch (op) {
        case CmpOp::Lt: return l.as_int() < r.as_int();
        case CmpOp::Le: return l.as_int() <= r.as_int();
        case CmpOp::Gt: return l.as_int() > r.as_int();
        case CmpOp::Ge: return l.as_int() >= r.as_int();
        default: return false;
    }
}

Term substitute(const Term& t, const Binding& b) {
    switch (t.kind) {
        case Term::Kind::Var: {
            auto it = b.find(t.name);
            if (it == b.end()) return t;
            return it->second.is_int() ? Term::integer(it->second.as_int())
                                       : Term::sym(it->second.as_sym());
        }
        case Term::Kind::Int:
        case Term::Kind::Sym:
        case Term::Kind::Range:
            return t;
        default: {
            Term out = t;
            for (auto& k : out.kids) k = substitute(k, b);
            // Collapse when fully bound.
            if (out.is_const()) {
                Value v = eval(out, {});
                return v.is_int() ? Term::integer(v.as_int()) : Term::sym(v.as_sym());
            }
            return out;
        }
    }
}

void vars_of(const Term& t, std::set<std::string>& out) {
    if (t.kind == Term::Kind::Var) out.insert(t.name);
    for (const Term& k : t.kids) vars_of(k, out);
}

std::set<std::string> rule_vars(const RuleTpl& rule) {
    std::set<std::string> vars;
    for (const auto& arg : rule.head.args) vars_of(arg, vars);
    if (rule.head_time) vars_of(*rule.head_time, vars);
    for (const auto& lit : rule.body) {
        if (lit.form == LitForm::Cmp) {
            vars_of(lit.lhs, vars);
            vars_of(lit.rhs, vars);
            continue;
        }
        for (const auto& arg : lit.atom.args) vars_of(arg, vars);
        if (lit.time) vars_of(*lit.time, vars);
    }
    return vars;
}

// A variable is temporal when its only positive binders are bare time
// positions; those are bound against the stream per evaluation instead of the
// Herbrand universe.
std::set<std::string> temporal_vars_of(const RuleTpl& rule) {
    std::set<std::string> object_bound, time_bound;
    for (const auto& lit : rule.body) {
        if (lit.form == LitForm::Cmp || lit.negations != 0) continue;
        for (const auto& arg : lit.atom.args) vars_of(arg, object_bound);
        if (lit.time && lit.time->kind == Term::Kind::Var) time_bound.insert(lit.time->name);
    }
    std::set<std::string> out;
    for (const auto& v : time_bound)
        if (object_bound.count(v) == 0) out.insert(v);
    return out;
}

std::vector<Value> universe_of(const ProgramSource& src) {
    std::set<Value> consts;
    auto scan_term = [&](const Term& t, auto&& self) -> void {
        switch (t.kind) {
            case Term::Kind::Int: consts.insert(Value(t.ival)); break;
            case Term::Kind::Sym: consts.insert(Value(t.name)); break;
            case Term::Kind::Range:
                for (std::int64_t v = t.kids[0].ival; v <= t.kids[1].ival; ++v)
                    consts.insert(Value(v));
                break;
            default:
                for (const Term& k : t.kids) self(k, self);
        }
    };
    for (const auto& rule : src.rules) {
        for (const auto& arg : rule.head.args) scan_term(arg, scan_term);
        for (const auto& lit : rule.body) {
            if (lit.form == LitForm::Cmp) continue;
            for (const auto& arg : lit.atom.args) scan_term(arg, scan_term);
        }
    }
    return {consts.begin(), consts.end()};
}

RuleTpl substitute_rule(const RuleTpl& rule, const Binding& b) {
    RuleTpl out = rule;
    for (auto& arg : out.head.args) arg = substitute(arg, b);
    if (out.head_time) *out.head_time = substitute(*out.head_time, b);
    for (auto& lit : out.body) {
        if (lit.form == LitForm::Cmp) {
            lit.lhs = substitute(lit.lhs, b);
            lit.rhs = substitute(lit.rhs, b);
            continue;
        }
        for (auto& arg : lit.atom.args) arg = substitute(arg, b);
        if (lit.time) *lit.time = substitute(*lit.time, b);
    }
    return out;
}

// Evaluates fully bound comparisons; returns false when one fails. Bound
// comparisons are removed from the instance.
bool strip_ground_builtins(RuleTpl& rule) {
    std::vector<Literal> kept;
    for (auto& lit : rule.body) {
        if (lit.form != LitForm::Cmp) {
            kept.push_back(std::move(lit));
            continue;
        }
        if (lit.lhs.is_const() && lit.rhs.is_const()) {
            if (!eval_cmp(lit.cmp, eval(lit.lhs, {}), eval(lit.rhs, {}))) return false;
        } else {
            kept.push_back(std::move(lit));
        }
    }
    rule.body = std::move(kept);
    return true;
}

Atom to_atom(const AtomTpl& tpl) {
    Atom a(tpl.pred);
    for (const auto& arg : tpl.args) {
        if (arg.kind == Term::Kind::Range)
            throw Error("range terms are only allowed in facts");
        Value v = eval(arg, {});
        a.args.push_back(v);
    }
    return a;
}

StreamingAtom to_streaming(const Literal& lit) {
    Atom a = to_atom(lit.atom);
    switch (lit.form) {
        case LitForm::Plain: return StreamingAtom::plain(std::move(a));
        case LitForm::At: {
            Value t = eval(*lit.time, {});
            if (!t.is_int()) throw Error("time point must be an integer");
            return StreamingAtom::at(t.as_int(), std::move(a));
        }
        case LitForm::WinAt: {
            Value t = eval(*lit.time, {});
            if (!t.is_int()) throw Error("time point must be an integer");
            return StreamingAtom::win_at(*lit.window, t.as_int(), std::move(a));
        }
        case LitForm::WinDiamond: return StreamingAtom::win_diamond(*lit.window, std::move(a));
        case LitForm::WinBox: return StreamingAtom::win_box(*lit.window, std::move(a));
        case LitForm::Cmp: break;
    }
    throw Error("comparison is not a streaming atom");
}

// Expands range facts like d(1..9) into individual facts.
std::vector<RuleTpl> expand_ranges(const RuleTpl& rule) {
    std::size_t range_idx = rule.head.args.size();
    for (std::size_t i = 0; i < rule.head.args.size(); ++i) {
        if (rule.head.args[i].kind == Term::Kind::Range) {
            range_idx = i;
            break;
        }
    }
    if (range_idx == rule.head.args.size()) return {rule};
    if (!rule.body.empty()) throw Error("range terms are only allowed in facts");
    std::vector<RuleTpl> out;
    const Term& r = rule.head.args[range_idx];
    for (std::int64_t v = r.kids[0].ival; v <= r.kids[1].ival; ++v) {
        RuleTpl inst = rule;
        inst.head.args[range_idx] = Term::integer(v);
        auto rec = expand_ranges(inst);
        out.insert(out.end(), rec.begin(), rec.end());
    }
    return out;
}

}  // namespace

std::int64_t DeployRule::max_window() const {
    std::int64_t out = 0;
    for (const auto& lit : tpl.body)
        if (lit.window) out = std::max(out, lit.window->size);
    return out;
}

std::vector<DeployRule> ground(const ProgramSource& src) {
    std::vector<Value> universe = universe_of(src);
    std::vector<DeployRule> out;
    std::size_t work = 0;

    for (std::size_t ri = 0; ri < src.rules.size(); ++ri) {
        std::vector<RuleTpl> seeds = expand_ranges(src.rules[ri]);
        for (const RuleTpl& seed : seeds) {
            std::set<std::string> temporal = temporal_vars_of(seed);
            std::vector<std::string> object_vars;
            for (const auto& v : rule_vars(seed))
                if (temporal.count(v) == 0) object_vars.push_back(v);

            std::vector<std::size_t> cursor(object_vars.size(), 0);
            if (!object_vars.empty() && universe.empty()) continue;  // no instances
            for (;;) {
                if (++work > kGroundingCap) throw Error("grounding too large");
                Binding b;
                for (std::size_t i = 0; i < object_vars.size(); ++i)
                    b[object_vars[i]] = universe[cursor[i]];
                RuleTpl inst = substitute_rule(seed, b);
                bool keep = true;
                // Only comparisons with no temporal variables are decidable now.
                for (auto& lit : inst.body) {
                    if (lit.form == LitForm::Cmp && lit.lhs.is_const() && lit.rhs.is_const()) {
                        if (!eval_cmp(lit.cmp, eval(lit.lhs, {}), eval(lit.rhs, {}))) {
                            keep = false;
                            break;
                        }
                    }
                }
                if (keep && strip_ground_builtins(inst)) {
                    DeployRule dr;
                    dr.tpl = std::move(inst);
                    dr.temporal_vars.assign(temporal.begin(), temporal.end());
                    dr.source_rule = static_cast<int>(ri);
                    out.push_back(std::move(dr));
                }
                // advance the cursor
                std::size_t i = 0;
                for (; i < object_vars.size(); ++i) {
                    if (++cursor[i] < universe.size()) break;
                    cursor[i] = 0;
                }
                if (object_vars.empty() || i == object_vars.size()) break;
            }
        }
    }
    return out;
}

std::vector<GroundRule> bind_temporal(const DeployRule& rule,
                                      const std::map<std::string, std::vector<TimePoint>>& domains) {
    std::vector<GroundRule> out;
    std::vector<std::string> vars = rule.temporal_vars;
    std::vector<std::size_t> cursor(vars.size(), 0);
    for (const auto& v : vars) {
        auto it = domains.find(v);
        if (it == domains.end()) throw Error("missing domain for temporal variable " + v);
        if (it->second.empty()) return out;
    }
    for (;;) {
        Binding b;
        for (std::size_t i = 0; i < vars.size(); ++i)
            b[vars[i]] = Value(domains.at(vars[i])[cursor[i]]);
        RuleTpl inst = substitute_rule(rule.tpl, b);
        if (strip_ground_builtins(inst)) {
            GroundRule gr;
            if (inst.head_time) {
                Value t = eval(*inst.head_time, {});
                if (!t.is_int()) throw Error("time point must be an integer");
                gr.head = StreamingAtom::at(t.as_int(), to_atom(inst.head));
            } else {
                gr.head = StreamingAtom::plain(to_atom(inst.head));
            }
            for (const auto& lit : inst.body) {
                if (lit.negations == 0)
                    gr.pos.push_back(to_streaming(lit));
                else
                    gr.neg.push_back(to_streaming(lit));
            }
            out.push_back(std::move(gr));
        }
        std::size_t i = 0;
        for (; i < vars.size(); ++i) {
            if (++cursor[i] < domains.at(vars[i]).size()) break;
            cursor[i] = 0;
        }
        if (vars.empty() || i == vars.size()) break;
    }
    return out;
}

std::vector<GroundRule> expand_over_timeline(const std::vector<DeployRule>& rules, Timeline t) {
    std::vector<TimePoint> all;
    for (TimePoint u = t.lo; u <= t.hi; ++u) all.push_back(u);
    std::vector<GroundRule> out;
    for (const auto& rule : rules) {
        std::map<std::string, std::vector<TimePoint>> domains;
        for (const auto& v : rule.temporal_vars) domains[v] = all;
        auto insts = bind_temporal(rule, domains);
        out.insert(out.end(), insts.begin(), insts.end());
    }
    return out;
}

GroundProgram to_ground_program(const ProgramSource& prepared, Timeline t) {
    GroundProgram gp;
    gp.rules = expand_over_timeline(ground(prepared), t);
    gp.extensional = prepared.extensional_preds();
    gp.validate();
    return gp;
}

}  // namespace larstream::lang
