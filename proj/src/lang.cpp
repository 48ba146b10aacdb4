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
#include <cctype>

#include "larstream/program.hpp"

namespace larstream::lang {

Term Term::integer(std::int64_t v) {
    Term t;
    t.kind = Kind::Int;
    t.ival = v;
    return t;
}

Term Term::sym(std::string s) {
    Term t;
    t.kind = Kind::Sym;
    t.name = std::move(s);
    return t;
}

Term Term::var(std::string v) {
    Term t;
    t.kind = Kind::Var;
    t.name = std::move(v);
    return t;
}

Term Term::add(Term l, Term r) {
    Term t;
    t.kind = Kind::Add;
    t.kids = {std::move(l), std::move(r)};
    return t;
}

Term Term::sub(Term l, Term r) {
    Term t;
    t.kind = Kind::Sub;
    t.kids = {std::move(l), std::move(r)};
    return t;
}

Term Term::abs(Term inner) {
    Term t;
    t.kind = Kind::Abs;
    t.kids = {std::move(inner)};
    return t;
}

Term Term::range(std::int64_t lo, std::int64_t hi) {
    Term t;
    t.kind = Kind::Range;
    t.kids = {integer(lo), integer(hi)};
    return t;
}

bool Term::is_const() const {
    switch (kind) {
        case Kind::Int:
        case Kind::Sym:
            return true;
        case Kind::Var:
        case Kind::Range:
            return false;
        default:
            return std::all_of(kids.begin(), kids.end(), [](const Term& k) { return k.is_const(); });
    }
}

std::string Term::text() const {
    switch (kind) {
        case Kind::Int: return std::to_string(ival);
        case Kind::Sym: return name;
        case Kind::Var: return name;
        case Kind::Add: return kids[0].text() + " + " + kids[1].text();
        case Kind::Sub: return kids[0].text() + " - " + kids[1].text();
        case Kind::Abs: return "|" + kids[0].text() + "|";
        case Kind::Range: return kids[0].text() + ".." + kids[1].text();
    }
    return "?";
}

std::string AtomTpl::text() const {
    if (args.empty()) return pred;
    std::string out = pred + "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out += ",";
        out += args[i].text();
    }
    return out + ")";
}

namespace {

const char* cmp_text(CmpOp op) {
    switch (op) {
        case CmpOp::Lt: return "<";
        case CmpOp::Le: return "<=";
        case CmpOp::Eq: return "=";
        case CmpOp::Ne: return "!=";
        case CmpOp::Gt: return ">";
        case CmpOp::Ge: return ">=";
    }
    return "?";
}

std::string window_text(const WindowSpec& w) {
    return "[" + std::string(w.kind == WindowKind::Tuple ? "#" : "") + std::to_string(w.size) + "]";
}

}  // namespace

std::string Literal::text() const {
    std::string out;
    for (int i = 0; i < negations; ++i) out += "not ";
    switch (form) {
        case LitForm::Plain: return out + atom.text();
        case LitForm::At: return out + atom.text() + " at " + time->text();
        case LitForm::WinAt:
            return out + atom.text() + " at " + time->text() + " " + window_text(*window);
        case LitForm::WinDiamond: return out + atom.text() + " in " + window_text(*window);
        case LitForm::WinBox: return out + atom.text() + " always " + window_text(*window);
        case LitForm::Cmp:
            return out + lhs.text() + " " + cmp_text(cmp) + " " + rhs.text();
    }
    return out;
}

std::string RuleTpl::text() const {
    std::string out;
    if (!is_constraint) {
        out = head.text();
        if (head_time) out += " at " + head_time->text();
    }
    if (body.empty()) return out + ".";
    out += " :- ";
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (i) out += ", ";
        out += body[i].text();
    }
    return out + ".";
}

std::set<std::string> ProgramSource::head_preds() const {
    std::set<std::string> out;
    for (const auto& r : rules)
        if (!r.is_constraint) out.insert(r.head.pred);
    return out;
}

std::set<std::string> ProgramSource::extensional_preds() const {
    std::set<std::string> heads = head_preds();
    std::set<std::string> out;
    for (const auto& [pred, arity] : ext_decls) {
        (void)arity;
        out.insert(pred);
    }
    for (const auto& r : rules)
        for (const auto& lit : r.body)
            if (lit.form != LitForm::Cmp && heads.count(lit.atom.pred) == 0)
                out.insert(lit.atom.pred);
    return out;
}

std::set<std::string> ProgramSource::intensional_preds() const { return head_preds(); }

std::set<std::string> ProgramSource::visible_intensional_preds() const {
    std::set<std::string> out = head_preds();
    for (const auto& p : internal_preds) out.erase(p);
    return out;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok {
    Ident, Var, Int,
    If,       // :-
    Dot, Comma, LParen, RParen, LBrack, RBrack, DotDot,
    Plus, Minus, Pipe, Slash, Hash,
    Lt, Le, Eq, Ne, Gt, Ge,
    KwNot, KwAt, KwIn, KwAlways, DirExt, DirShow,
    End,
};

struct Token {
    Tok kind;
    std::string text;
    std::int64_t ival = 0;
    SourceLoc loc;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            SourceLoc loc{line_, col_};
            if (pos_ >= src_.size()) {
                out.push_back({Tok::End, "", 0, loc});
                return out;
            }
            char c = src_[pos_];
            if (std::isdigit(static_cast<unsigned char>(c))) {
                out.push_back(number(loc));
            } else if (std::islower(static_cast<unsigned char>(c)) || c == '_') {
                out.push_back(word(loc));
            } else if (std::isupper(static_cast<unsigned char>(c))) {
                out.push_back(variable(loc));
            } else {
                out.push_back(symbol(loc));
            }
        }
    }

private:
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '%') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    Token number(SourceLoc loc) {
        std::string text;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
            text += src_[pos_];
            advance();
        }
        Token t{Tok::Int, text, 0, loc};
        try {
            t.ival = std::stoll(text);
        } catch (const std::exception&) {
            throw ParseError(loc, "integer literal out of range");
        }
        return t;
    }

    std::string ident_chars() {
        std::string text;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
            text += src_[pos_];
            advance();
        }
        return text;
    }

    Token word(SourceLoc loc) {
        std::string text = ident_chars();
        if (text == "not") return {Tok::KwNot, text, 0, loc};
        if (text == "at") return {Tok::KwAt, text, 0, loc};
        if (text == "in") return {Tok::KwIn, text, 0, loc};
        if (text == "always") return {Tok::KwAlways, text, 0, loc};
        return {Tok::Ident, text, 0, loc};
    }

    Token variable(SourceLoc loc) { return {Tok::Var, ident_chars(), 0, loc}; }

    Token symbol(SourceLoc loc) {
        char c = src_[pos_];
        advance();
        auto two = [&](char second, Tok with, Tok without) {
            if (pos_ < src_.size() && src_[pos_] == second) {
                advance();
                return with;
            }
            return without;
        };
        switch (c) {
            case '.': return {two('.', Tok::DotDot, Tok::Dot), "", 0, loc};
            case ',': return {Tok::Comma, "", 0, loc};
            case '(': return {Tok::LParen, "", 0, loc};
            case ')': return {Tok::RParen, "", 0, loc};
            case '[': return {Tok::LBrack, "", 0, loc};
            case ']': return {Tok::RBrack, "", 0, loc};
            case '+': return {Tok::Plus, "", 0, loc};
            case '-': return {Tok::Minus, "", 0, loc};
            case '|': return {Tok::Pipe, "", 0, loc};
            case '/': return {Tok::Slash, "", 0, loc};
            case '<': return {two('=', Tok::Le, Tok::Lt), "", 0, loc};
            case '>': return {two('=', Tok::Ge, Tok::Gt), "", 0, loc};
            case '=': return {Tok::Eq, "", 0, loc};
            case '!':
                if (pos_ < src_.size() && src_[pos_] == '=') {
                    advance();
                    return {Tok::Ne, "", 0, loc};
                }
                throw ParseError(loc, "unexpected '!'");
            case ':':
                if (pos_ < src_.size() && src_[pos_] == '-') {
                    advance();
                    return {Tok::If, "", 0, loc};
                }
                throw ParseError(loc, "expected ':-'");
            case '#': {
                if (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) {
                    std::string name = ident_chars();
                    if (name == "ext") return {Tok::DirExt, name, 0, loc};
                    if (name == "show") return {Tok::DirShow, name, 0, loc};
                    throw ParseError(loc, "unknown directive '#" + name + "'");
                }
                return {Tok::Hash, "", 0, loc};
            }
            default:
                throw ParseError(loc, std::string("unexpected character '") + c + "'");
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

// ---------------------------------------------------------------------------
// Parser

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    ProgramSource run() {
        ProgramSource out;
        while (peek().kind != Tok::End) {
            if (peek().kind == Tok::DirExt) {
                parse_ext(out);
            } else if (peek().kind == Tok::DirShow) {
                // Accepted for compatibility with solver-style sources; output
                // selection is handled downstream.
                next();
                expect(Tok::Ident, "predicate name");
                expect(Tok::Slash, "'/'");
                expect(Tok::Int, "arity");
                expect(Tok::Dot, "'.'");
            } else {
                out.rules.push_back(parse_rule());
            }
        }
        analyze(out);
        return out;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(idx_ + ahead, toks_.size() - 1)];
    }
    Token next() { return toks_[std::min(idx_++, toks_.size() - 1)]; }
    Token expect(Tok kind, const std::string& what) {
        if (peek().kind != kind) throw ParseError(peek().loc, "expected " + what);
        return next();
    }

    void parse_ext(ProgramSource& out) {
        next();
        Token name = expect(Tok::Ident, "predicate name");
        expect(Tok::Slash, "'/'");
        Token arity = expect(Tok::Int, "arity");
        expect(Tok::Dot, "'.'");
        auto [it, inserted] = out.ext_decls.insert({name.text, static_cast<int>(arity.ival)});
        if (!inserted && it->second != arity.ival)
            throw ParseError(name.loc, "conflicting arity for extensional predicate '" + name.text + "'");
    }

    RuleTpl parse_rule() {
        RuleTpl rule;
        rule.loc = peek().loc;
        if (peek().kind == Tok::If) {
            rule.is_constraint = true;
            next();
            parse_body(rule);
        } else {
            rule.head = parse_atom();
            if (peek().kind == Tok::KwAt) {
                next();
                rule.head_time = parse_term();
            }
            if (peek().kind == Tok::KwIn || peek().kind == Tok::KwAlways || peek().kind == Tok::LBrack)
                throw ParseError(peek().loc, "window operators cannot occur in rule heads");
            if (peek().kind == Tok::If) {
                next();
                parse_body(rule);
            }
        }
        expect(Tok::Dot, "'.' at end of rule");
        return rule;
    }

    void parse_body(RuleTpl& rule) {
        for (;;) {
            rule.body.push_back(parse_literal());
            if (peek().kind != Tok::Comma) break;
            next();
        }
    }

    Literal parse_literal() {
        Literal lit;
        lit.loc = peek().loc;
        while (peek().kind == Tok::KwNot) {
            next();
            ++lit.negations;
        }
        if (lit.negations > 2) throw ParseError(lit.loc, "more than two nested 'not'");

        // A literal is either a comparison between terms or a streaming atom;
        // an identifier followed by '(' can only start an atom.
        std::size_t mark = idx_;
        bool maybe_cmp = peek().kind != Tok::Ident || peek(1).kind != Tok::LParen;
        if (maybe_cmp) {
            try {
                Term lhs = parse_term();
                Tok k = peek().kind;
                if (k == Tok::Lt || k == Tok::Le || k == Tok::Eq || k == Tok::Ne || k == Tok::Gt ||
                    k == Tok::Ge) {
                    next();
                    Term rhs = parse_term();
                    if (lit.negations > 0)
                        throw ParseError(lit.loc, "negation over comparison not supported");
                    lit.form = LitForm::Cmp;
                    lit.cmp = k == Tok::Lt   ? CmpOp::Lt
                              : k == Tok::Le ? CmpOp::Le
                              : k == Tok::Eq ? CmpOp::Eq
                              : k == Tok::Ne ? CmpOp::Ne
                              : k == Tok::Gt ? CmpOp::Gt
                                             : CmpOp::Ge;
                    lit.lhs = std::move(lhs);
                    lit.rhs = std::move(rhs);
                    return lit;
                }
            } catch (const ParseError&) {
                // fall through to atom form
            }
            idx_ = mark;
        }

        lit.atom = parse_atom();
        switch (peek().kind) {
            case Tok::KwAt: {
                next();
                lit.time = parse_term();
                if (peek().kind == Tok::LBrack) {
                    lit.form = LitForm::WinAt;
                    lit.window = parse_window();
                } else {
                    lit.form = LitForm::At;
                }
                break;
            }
            case Tok::KwIn: {
                next();
                lit.form = LitForm::WinDiamond;
                lit.window = parse_window();
                break;
            }
            case Tok::KwAlways: {
                next();
                lit.form = LitForm::WinBox;
                lit.window = parse_window();
                break;
            }
            default:
                lit.form = LitForm::Plain;
        }
        if (lit.negations == 2 && lit.form != LitForm::Plain)
            throw ParseError(lit.loc, "'not not' applies to plain atoms only");
        return lit;
    }

    WindowSpec parse_window() {
        expect(Tok::LBrack, "'['");
        WindowKind kind = WindowKind::Time;
        if (peek().kind == Tok::Hash) {
            next();
            kind = WindowKind::Tuple;
        }
        Token n = expect(Tok::Int, "window size");
        expect(Tok::RBrack, "']'");
        try {
            return WindowSpec(kind, n.ival);
        } catch (const Error& e) {
            throw ParseError(n.loc, e.what());
        }
    }

    AtomTpl parse_atom() {
        Token name = expect(Tok::Ident, "atom");
        AtomTpl atom;
        atom.pred = name.text;
        if (peek().kind == Tok::LParen) {
            next();
            for (;;) {
                atom.args.push_back(parse_term_or_range());
                if (peek().kind == Tok::Comma) {
                    next();
                    continue;
                }
                break;
            }
            expect(Tok::RParen, "')'");
        }
        return atom;
    }

    Term parse_term_or_range() {
        if (peek().kind == Tok::Int && peek(1).kind == Tok::DotDot) {
            Token lo = next();
            next();
            Token hi = expect(Tok::Int, "range upper bound");
            if (lo.ival > hi.ival) throw ParseError(lo.loc, "empty range");
            return Term::range(lo.ival, hi.ival);
        }
        return parse_term();
    }

    Term parse_term() {
        Term t = parse_primary();
        for (;;) {
            if (peek().kind == Tok::Plus) {
                next();
                t = Term::add(std::move(t), parse_primary());
            } else if (peek().kind == Tok::Minus) {
                next();
                t = Term::sub(std::move(t), parse_primary());
            } else {
                return t;
            }
        }
    }

    Term parse_primary() {
        switch (peek().kind) {
            case Tok::Int: return Term::integer(next().ival);
            case Tok::Var: return Term::var(next().text);
            case Tok::Ident: {
                if (peek(1).kind == Tok::LParen)
                    throw ParseError(peek().loc, "compound terms are not supported");
                return Term::sym(next().text);
            }
            case Tok::Pipe: {
                next();
                Term inner = parse_term();
                expect(Tok::Pipe, "'|'");
                return Term::abs(std::move(inner));
            }
            case Tok::Minus: {
                Token m = next();
                if (peek().kind == Tok::Int) return Term::integer(-next().ival);
                throw ParseError(m.loc, "expected integer after unary '-'");
            }
            default:
                throw ParseError(peek().loc, "expected term");
        }
    }

    // Safety and predicate-consistency analysis.
    void analyze(ProgramSource& out) {
        std::map<std::string, int> arity;
        auto check_arity = [&](const AtomTpl& a, SourceLoc loc) {
            auto [it, inserted] = arity.insert({a.pred, static_cast<int>(a.args.size())});
            if (!inserted && it->second != static_cast<int>(a.args.size()))
                throw ParseError(loc, "predicate '" + a.pred + "' used with different arities");
        };
        for (const auto& [pred, ar] : out.ext_decls) arity[pred] = ar;

        for (const auto& rule : out.rules) {
            if (!rule.is_constraint) check_arity(rule.head, rule.loc);
            for (const auto& lit : rule.body)
                if (lit.form != LitForm::Cmp) check_arity(lit.atom, lit.loc);
            check_safety(rule);
        }
        for (const auto& r : out.rules) {
            if (!r.is_constraint && out.ext_decls.count(r.head.pred))
                throw ParseError(r.loc, "extensional predicate '" + r.head.pred + "' used in rule head");
            if (!r.is_constraint && !r.head_time) {
                for (const auto& arg : r.head.args)
                    if (arg.kind == Term::Kind::Range && !r.body.empty())
                        throw ParseError(r.loc, "range terms are only allowed in facts");
            }
        }
    }

    static void vars_of(const Term& t, std::set<std::string>& out) {
        if (t.kind == Term::Kind::Var) out.insert(t.name);
        for (const Term& k : t.kids) vars_of(k, out);
    }

    void check_safety(const RuleTpl& rule) {
        std::set<std::string> object_binders, time_binders, needed;
        for (const auto& lit : rule.body) {
            if (lit.form == LitForm::Cmp) {
                vars_of(lit.lhs, needed);
                vars_of(lit.rhs, needed);
                continue;
            }
            if (lit.negations == 0) {
                for (const auto& arg : lit.atom.args) vars_of(arg, object_binders);
                if (lit.time) {
                    if (lit.time->kind == Term::Kind::Var)
                        time_binders.insert(lit.time->name);
                    else
                        vars_of(*lit.time, needed);
                }
            } else {
                for (const auto& arg : lit.atom.args) vars_of(arg, needed);
                if (lit.time) vars_of(*lit.time, needed);
            }
        }
        if (!rule.is_constraint) {
            for (const auto& arg : rule.head.args) vars_of(arg, needed);
            if (rule.head_time) vars_of(*rule.head_time, needed);
        }
        for (const auto& v : needed) {
            if (object_binders.count(v) == 0 && time_binders.count(v) == 0)
                throw ParseError(rule.loc, "unsafe variable '" + v + "'");
        }
    }

    std::vector<Token> toks_;
    std::size_t idx_ = 0;
};

}  // namespace

ProgramSource parse(std::string_view text) {
    Lexer lex(text);
    Parser parser(lex.run());
    return parser.run();
}

std::string pretty(const ProgramSource& src) {
    std::string out;
    for (const auto& [pred, ar] : src.ext_decls)
        out += "#ext " + pred + "/" + std::to_string(ar) + ".\n";
    for (const auto& r : src.rules) out += r.text() + "\n";
    return out;
}

ProgramSource constraints_to_rules(ProgramSource src) {
    int counter = 0;
    for (auto& rule : src.rules) {
        if (!rule.is_constraint) continue;
        std::string pred = "fail__" + std::to_string(++counter);
        rule.is_constraint = false;
        rule.head = AtomTpl{pred, {}};
        Literal guard;
        guard.form = LitForm::Plain;
        guard.negations = 1;
        guard.atom = AtomTpl{pred, {}};
        guard.loc = rule.loc;
        rule.body.push_back(std::move(guard));
        src.internal_preds.insert(pred);
    }
    return src;
}

ProgramSource eliminate_double_negation(ProgramSource src) {
    std::vector<RuleTpl> companions;
    for (auto& rule : src.rules) {
        for (auto& lit : rule.body) {
            if (lit.negations != 2) continue;
            std::string aux = "naux__" + lit.atom.pred;
            RuleTpl comp;
            comp.loc = lit.loc;
            comp.head = AtomTpl{aux, lit.atom.args};
            for (const auto& other : rule.body) {
                if (other.form == LitForm::Cmp || (other.negations == 0 && &other != &lit))
                    comp.body.push_back(other);
            }
            Literal blocked;
            blocked.form = LitForm::Plain;
            blocked.negations = 1;
            blocked.atom = lit.atom;
            blocked.loc = lit.loc;
            comp.body.push_back(std::move(blocked));
            companions.push_back(std::move(comp));

            lit.negations = 1;
            lit.atom.pred = aux;
            src.internal_preds.insert(aux);
        }
    }
    for (auto& comp : companions) src.rules.push_back(std::move(comp));
    return src;
}

ProgramSource prepare(ProgramSource src) {
    return eliminate_double_negation(constraints_to_rules(std::move(src)));
}

}  // namespace larstream::lang
