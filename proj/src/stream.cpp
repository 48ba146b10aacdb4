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

#include "larstream/stream.hpp"

#include <algorithm>
#include <cctype>

#include <nlohmann/json.hpp>

namespace larstream {

using json = nlohmann::json;

std::string Value::text() const {
    if (is_int()) return std::to_string(as_int());
    return as_sym();
}

std::string Atom::text() const {
    if (args.empty()) return pred;
    std::string out = pred + "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out += ",";
        out += args[i].text();
    }
    out += ")";
    return out;
}

namespace {

bool ident_start(char c) { return std::islower(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

Value parse_value(std::string_view s) {
    if (s.empty()) throw Error("empty atom argument");
    bool neg = s[0] == '-';
    std::string_view digits = neg ? s.substr(1) : s;
    bool all_digits = !digits.empty() &&
        std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
    if (all_digits) return Value(static_cast<std::int64_t>(std::stoll(std::string(s))));
    if (!ident_start(s[0]) || !std::all_of(s.begin(), s.end(), ident_char))
        throw Error("bad atom argument '" + std::string(s) + "'");
    return Value(std::string(s));
}

}  // namespace

Atom parse_atom(std::string_view text) {
    std::size_t open = text.find('(');
    if (open == std::string_view::npos) {
        std::string p(text);
        if (p.empty() || !ident_start(p[0]) || !std::all_of(p.begin(), p.end(), ident_char))
            throw Error("bad atom '" + p + "'");
        return Atom(p);
    }
    if (text.back() != ')') throw Error("bad atom '" + std::string(text) + "'");
    std::string pred(text.substr(0, open));
    if (pred.empty() || !ident_start(pred[0]) || !std::all_of(pred.begin(), pred.end(), ident_char))
        throw Error("bad atom '" + std::string(text) + "'");
    std::string_view inner = text.substr(open + 1, text.size() - open - 2);
    std::vector<Value> args;
    std::size_t pos = 0;
    while (pos <= inner.size()) {
        std::size_t comma = inner.find(',', pos);
        std::string_view piece =
            comma == std::string_view::npos ? inner.substr(pos) : inner.substr(pos, comma - pos);
        args.push_back(parse_value(piece));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    if (args.empty()) throw Error("bad atom '" + std::string(text) + "'");
    return Atom(std::move(pred), std::move(args));
}

void IntervalStream::add(const Atom& a, Interval iv) {
    if (!timeline_.contains(iv))
        throw Error("interval [" + std::to_string(iv.lo) + "," + std::to_string(iv.hi) +
                    "] outside timeline [" + std::to_string(timeline_.lo) + "," +
                    std::to_string(timeline_.hi) + "]");
    auto& ivs = eta_[a];
    ivs.insert(std::upper_bound(ivs.begin(), ivs.end(), iv), iv);
}

const std::vector<Interval>* IntervalStream::intervals(const Atom& a) const {
    auto it = eta_.find(a);
    return it == eta_.end() ? nullptr : &it->second;
}

bool IntervalStream::holds_at(const Atom& a, TimePoint t) const {
    auto it = eta_.find(a);
    if (it == eta_.end()) return false;
    for (const Interval& iv : it->second) {
        if (iv.lo > t) break;
        if (iv.contains(t)) return true;
    }
    return false;
}

std::vector<Interval> IntervalStream::cover(const Atom& a) const {
    auto it = eta_.find(a);
    if (it == eta_.end()) return {};
    std::vector<Interval> out;
    for (const Interval& iv : it->second) {
        if (!out.empty() && iv.lo <= out.back().hi + 1)
            out.back().hi = std::max(out.back().hi, iv.hi);
        else
            out.push_back(iv);
    }
    return out;
}

void PointStream::add(TimePoint t, const Atom& a) {
    if (!timeline_.contains(t))
        throw Error("time point " + std::to_string(t) + " outside timeline");
    nu_[t].insert(a);
}

std::set<Atom> PointStream::at(TimePoint t) const {
    auto it = nu_.find(t);
    return it == nu_.end() ? std::set<Atom>{} : it->second;
}

bool PointStream::holds_at(const Atom& a, TimePoint t) const {
    auto it = nu_.find(t);
    return it != nu_.end() && it->second.count(a) > 0;
}

IntervalStream canonicalize(const IntervalStream& s) {
    IntervalStream out(s.timeline());
    for (const auto& [atom, ivs] : s.atoms()) {
        (void)ivs;
        for (const Interval& iv : s.cover(atom)) out.add(atom, iv);
    }
    return out;
}

bool equivalent(const IntervalStream& a, const IntervalStream& b) {
    if (a.timeline() != b.timeline()) return false;
    return canonicalize(a) == canonicalize(b);
}

bool is_substream(const IntervalStream& sub, const IntervalStream& sup) {
    if (!sup.timeline().contains(sub.timeline())) return false;
    for (const auto& [atom, ivs] : sub.atoms()) {
        const std::vector<Interval>* cover = sup.intervals(atom);
        for (const Interval& iv : ivs) {
            bool covered = false;
            if (cover) {
                for (const Interval& big : *cover) {
                    if (big.contains(iv)) { covered = true; break; }
                }
            }
            if (!covered) return false;
        }
    }
    return true;
}

PointStream to_point_stream(const IntervalStream& s) {
    PointStream out(s.timeline());
    for (const auto& [atom, ivs] : s.atoms()) {
        for (const Interval& iv : ivs)
            for (TimePoint t = iv.lo; t <= iv.hi; ++t) out.add(t, atom);
    }
    return out;
}

IntervalStream from_point_stream(const PointStream& p) {
    IntervalStream out(p.timeline());
    for (const auto& [t, atoms] : p.evaluations())
        for (const Atom& a : atoms) out.add(a, Interval(t, t));
    return out;
}

std::string stream_to_json(const IntervalStream& s, bool pretty) {
    json atoms = json::object();
    for (const auto& [atom, ivs] : s.atoms()) {
        json list = json::array();
        for (const Interval& iv : ivs) list.push_back(json::array({iv.lo, iv.hi}));
        atoms[atom.text()] = std::move(list);
    }
    // Hand-assembled to keep "timeline" first in the emitted object.
    json tl = json::array({s.timeline().lo, s.timeline().hi});
    std::string out = "{\"timeline\":" + tl.dump(pretty ? 2 : -1) +
                      ",\"atoms\":" + atoms.dump(pretty ? 2 : -1) + "}";
    return out;
}

IntervalStream stream_from_json(std::string_view text) {
    json j = json::parse(text);
    if (!j.is_object() || !j.contains("timeline"))
        throw Error("stream JSON must be an object with a \"timeline\" field");
    auto tl = j.at("timeline");
    IntervalStream out(Timeline(tl.at(0).get<TimePoint>(), tl.at(1).get<TimePoint>()));
    if (j.contains("atoms")) {
        for (const auto& [key, list] : j.at("atoms").items()) {
            Atom a = parse_atom(key);
            for (const auto& iv : list)
                out.add(a, Interval(iv.at(0).get<TimePoint>(), iv.at(1).get<TimePoint>()));
        }
    }
    return out;
}

}  // namespace larstream
