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

#include "larstream/node.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "larstream/asp.hpp"

namespace larstream {

void FutureLog::record(const Atom& a, TimePoint due, TimePoint now) {
    if (due <= now) throw Error("future inference must be dated beyond the current tick");
    entries_.insert({due, a});
}

std::vector<Atom> FutureLog::release_due(TimePoint t) {
    auto [lo, hi] = entries_.equal_range(t);
    std::vector<Atom> out;
    for (auto it = lo; it != hi; ++it) out.push_back(it->second);
    entries_.erase(lo, hi);
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<TimePoint> FutureLog::next_due() const {
    if (entries_.empty()) return std::nullopt;
    return entries_.begin()->first;
}

namespace {

struct Reduced {
    enum Kind { True, False, Cand } kind = False;
    Atom atom;  // for Cand

    static Reduced constant(bool b) {
        Reduced r;
        r.kind = b ? True : False;
        return r;
    }
    static Reduced cand(Atom a) {
        Reduced r;
        r.kind = Cand;
        r.atom = std::move(a);
        return r;
    }
};

struct ResidualBuilder {
    const IntervalDB& db;
    TimePoint tick;
    const NodeConfig& config;
    std::optional<IntervalStream> tuple_snap;

    std::vector<Atom> atoms;
    std::map<Atom, int> ids;
    asp::Program prog;
    struct FutureRule {
        Atom head;
        TimePoint when;
        std::vector<int> pos, neg;
    };
    std::vector<FutureRule> future_rules;
    int past_heads_skipped = 0;

    int intern(const Atom& a) {
        auto it = ids.find(a);
        if (it != ids.end()) return it->second;
        int id = static_cast<int>(atoms.size());
        atoms.push_back(a);
        ids.emplace(a, id);
        return id;
    }

    bool own(const Atom& a) const { return config.prod_preds.count(a.pred) > 0; }

    TimePoint window_lo(const WindowSpec& w) {
        if (w.kind == WindowKind::Time) return std::max(db.origin(), tick - w.size);
        // Tuple extents count the frozen store only; the tick's own candidate
        // occurrences are not yet known when the window is measured.
        if (!tuple_snap) tuple_snap = db.materialize(tick);
        return tuple_window(*tuple_snap, tick, w.size).timeline().lo;
    }

    Reduced reduce_plain(const Atom& a) {
        if (db.query(tick, StreamingAtom::plain(a))) return Reduced::constant(true);
        if (own(a)) return Reduced::cand(a);
        return Reduced::constant(false);
    }

    Reduced reduce(const StreamingAtom& phi) {
        switch (phi.mod) {
            case Modality::Plain:
                return reduce_plain(phi.atom);
            case Modality::At: {
                TimePoint u = phi.at_time;
                if (u < db.origin() || u > tick) return Reduced::constant(false);
                if (phi.window && u < window_lo(*phi.window)) return Reduced::constant(false);
                if (u == tick) return reduce_plain(phi.atom);
                return Reduced::constant(
                    db.query(tick, StreamingAtom::at(u, phi.atom)));
            }
            case Modality::Diamond: {
                TimePoint lo = phi.window ? window_lo(*phi.window) : db.origin();
                if (db.any_in(phi.atom, lo, tick, tick)) return Reduced::constant(true);
                if (own(phi.atom)) return Reduced::cand(phi.atom);
                return Reduced::constant(false);
            }
            case Modality::Box: {
                TimePoint lo = phi.window ? window_lo(*phi.window) : db.origin();
                if (lo >= tick) return reduce_plain(phi.atom);
                if (!db.covers(phi.atom, lo, tick - 1, tick)) return Reduced::constant(false);
                return reduce_plain(phi.atom);
            }
        }
        return Reduced::constant(false);
    }

    void add_rule(const GroundRule& g) {
        std::vector<int> pos, neg;
        for (const auto& b : g.pos) {
            Reduced r = reduce(b);
            if (r.kind == Reduced::False) return;
            if (r.kind == Reduced::Cand) pos.push_back(intern(r.atom));
        }
        for (const auto& b : g.neg) {
            Reduced r = reduce(b);
            if (r.kind == Reduced::True) return;
            if (r.kind == Reduced::Cand) neg.push_back(intern(r.atom));
        }
        TimePoint when = g.head.mod == Modality::At ? g.head.at_time : tick;
        if (when == tick) {
            asp::Rule rule;
            rule.head = intern(g.head.atom);
            rule.pos = std::move(pos);
            rule.neg = std::move(neg);
            prog.rules.push_back(std::move(rule));
        } else if (when > tick) {
            future_rules.push_back({g.head.atom, when, std::move(pos), std::move(neg)});
        } else {
            ++past_heads_skipped;
        }
    }
};

std::map<std::string, std::vector<TimePoint>> temporal_domains(const lang::DeployRule& rule,
                                                               const IntervalDB& db,
                                                               TimePoint tick,
                                                               const NodeConfig& config) {
    std::map<std::string, std::set<TimePoint>> doms;
    for (const auto& v : rule.temporal_vars) doms[v];  // ensure presence
    for (const auto& lit : rule.tpl.body) {
        if (lit.form != lang::LitForm::At && lit.form != lang::LitForm::WinAt) continue;
        if (lit.negations != 0) continue;
        if (!lit.time || lit.time->kind != lang::Term::Kind::Var) continue;
        auto it = doms.find(lit.time->name);
        if (it == doms.end()) continue;

        bool ground_args = true;
        Atom a(lit.atom.pred);
        for (const auto& arg : lit.atom.args) {
            if (arg.kind == lang::Term::Kind::Int) {
                a.args.push_back(Value(arg.ival));
            } else if (arg.kind == lang::Term::Kind::Sym) {
                a.args.push_back(Value(arg.name));
            } else {
                ground_args = false;
                break;
            }
        }
        if (ground_args) {
            for (TimePoint u : db.at_bindings(tick, lit.window, a)) it->second.insert(u);
            if (config.prod_preds.count(lit.atom.pred) > 0) it->second.insert(tick);
        } else {
            // Bindings depend on other variables; fall back to the window range.
            TimePoint lo = db.origin();
            if (lit.window && lit.window->kind == WindowKind::Time)
                lo = std::max(db.origin(), tick - lit.window->size);
            lo = std::max(lo, db.watermark());
            for (TimePoint u = lo; u <= tick; ++u) it->second.insert(u);
        }
    }
    std::map<std::string, std::vector<TimePoint>> out;
    for (auto& [v, s] : doms) out[v] = std::vector<TimePoint>(s.begin(), s.end());
    return out;
}

std::optional<asp::Model> run_external_solver(const std::string& cmd, const asp::Program& prog,
                                              const std::vector<Atom>& atoms) {
    int in_pipe[2], out_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) throw Error("external solver: pipe failed");
    pid_t pid = fork();
    if (pid < 0) throw Error("external solver: fork failed");
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);

    std::string text;
    for (const auto& r : prog.rules) {
        text += atoms[static_cast<std::size_t>(r.head)].text();
        if (!r.pos.empty() || !r.neg.empty()) {
            text += " :- ";
            bool first = true;
            for (int x : r.pos) {
                if (!first) text += ", ";
                text += atoms[static_cast<std::size_t>(x)].text();
                first = false;
            }
            for (int x : r.neg) {
                if (!first) text += ", ";
                text += "not " + atoms[static_cast<std::size_t>(x)].text();
                first = false;
            }
        }
        text += ".\n";
    }
    ssize_t ignored = write(in_pipe[1], text.data(), text.size());
    (void)ignored;
    close(in_pipe[1]);

    std::string reply;
    char buf[4096];
    ssize_t n;
    while ((n = read(out_pipe[0], buf, sizeof buf)) > 0) reply.append(buf, static_cast<std::size_t>(n));
    close(out_pipe[0]);
    int status = 0;
    waitpid(pid, &status, 0);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
        throw Error("external solver failed: " + cmd);

    std::istringstream is(reply);
    std::string verdict;
    if (!(is >> verdict)) throw Error("external solver produced no output");
    if (verdict == "UNSAT") return std::nullopt;
    if (verdict != "SAT") throw Error("external solver: expected SAT or UNSAT, got '" + verdict + "'");

    std::map<std::string, int> by_text;
    for (std::size_t i = 0; i < atoms.size(); ++i) by_text[atoms[i].text()] = static_cast<int>(i);
    asp::Model model(atoms.size(), false);
    std::string tok;
    while (is >> tok) {
        auto it = by_text.find(tok);
        if (it == by_text.end()) throw Error("external solver returned unknown atom '" + tok + "'");
        model[static_cast<std::size_t>(it->second)] = true;
    }
    if (!asp::is_stable_model(prog, model))
        throw Error("external solver returned a non-stable model");
    return model;
}

}  // namespace

PreparedRules prepare_rules(const std::vector<lang::DeployRule>& rules) {
    PreparedRules out;
    for (const auto& rule : rules) {
        if (rule.fully_ground()) {
            auto ground = lang::bind_temporal(rule, {});
            out.static_rules.insert(out.static_rules.end(), ground.begin(), ground.end());
        } else {
            out.temporal.push_back(rule);
        }
    }
    return out;
}

SolveResult solve_prepared(const PreparedRules& rules, const IntervalDB& db, TimePoint tick,
                           const NodeConfig& config) {
    ResidualBuilder builder{db, tick, config, std::nullopt, {}, {}, {}, {}, 0};
    for (const auto& g : rules.static_rules) builder.add_rule(g);
    for (const auto& rule : rules.temporal) {
        auto domains = temporal_domains(rule, db, tick, config);
        for (const auto& g : lang::bind_temporal(rule, domains)) builder.add_rule(g);
    }
    builder.prog.atom_count = static_cast<int>(builder.atoms.size());

    // Deterministic selection: branch by (component layer, atom).
    std::vector<int> order(builder.atoms.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    auto layer_of = [&](const Atom& a) {
        auto it = config.atom_layers.find(a.pred);
        return it == config.atom_layers.end() ? 0 : it->second;
    };
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        const Atom& ax = builder.atoms[static_cast<std::size_t>(x)];
        const Atom& ay = builder.atoms[static_cast<std::size_t>(y)];
        int lx = layer_of(ax), ly = layer_of(ay);
        if (lx != ly) return lx < ly;
        return ax < ay;
    });

    std::optional<asp::Model> model;
    if (config.external_solver)
        model = run_external_solver(*config.external_solver, builder.prog, builder.atoms);
    else
        model = asp::first_stable_model(builder.prog, order);

    SolveResult out;
    if (builder.past_heads_skipped > 0 && model) {
        // Heads dated before the current tick cannot be applied incrementally;
        // the declarative checker handles them, the runtime does not.
        static bool warned = false;
        if (!warned) {
            std::cerr << "warning: dropped rule instance(s) with heads dated in the past\n";
            warned = true;
        }
    }
    if (!model) return out;
    out.sat = true;
    for (std::size_t i = 0; i < builder.atoms.size(); ++i)
        if ((*model)[i]) out.true_now.insert(builder.atoms[i]);
    for (const auto& fr : builder.future_rules) {
        bool fires = true;
        for (int x : fr.pos)
            if (!(*model)[static_cast<std::size_t>(x)]) { fires = false; break; }
        if (fires)
            for (int x : fr.neg)
                if ((*model)[static_cast<std::size_t>(x)]) { fires = false; break; }
        if (fires) out.future.push_back({fr.head, fr.when});
    }
    return out;
}

SolveResult solve_component(const std::vector<lang::DeployRule>& rules, const IntervalDB& db,
                            TimePoint tick, const NodeConfig& config) {
    return solve_prepared(prepare_rules(rules), db, tick, config);
}

ReasonerNode::ReasonerNode(NodeConfig config)
    : config_(std::move(config)), db_(config_.origin), last_tick_(config_.origin - 1) {
    prepared_ = prepare_rules(config_.rules);
    for (const auto& rule : config_.rules) {
        max_window_ = std::max(max_window_, rule.max_window());
        for (const auto& lit : rule.tpl.body) {
            if (lit.form == lang::LitForm::Cmp) continue;
            if (lit.window && lit.window->kind == WindowKind::Tuple) config_.cleanup_enabled = false;

            bool ground_args = true;
            Atom a(lit.atom.pred);
            for (const auto& arg : lit.atom.args) {
                if (arg.kind == lang::Term::Kind::Int)
                    a.args.push_back(Value(arg.ival));
                else if (arg.kind == lang::Term::Kind::Sym)
                    a.args.push_back(Value(arg.name));
                else
                    ground_args = false;
            }
            if (!ground_args) {
                if (lit.window) per_tick_reeval_ = true;
                continue;
            }
            switch (lit.form) {
                case lang::LitForm::WinBox:
                    tracked_.push_back(StreamingAtom::win_box(*lit.window, a));
                    break;
                case lang::LitForm::WinDiamond:
                    tracked_.push_back(StreamingAtom::win_diamond(*lit.window, a));
                    break;
                case lang::LitForm::WinAt: {
                    TimePoint u = kUnboundTime;
                    if (lit.time->kind == lang::Term::Kind::Int) u = lit.time->ival;
                    tracked_.push_back(StreamingAtom::win_at(*lit.window, u, a));
                    break;
                }
                case lang::LitForm::At: {
                    if (lit.time->kind == lang::Term::Kind::Int) {
                        tracked_.push_back(StreamingAtom::at(lit.time->ival, a));
                        cleanup_floor_ = cleanup_floor_ ? std::min(*cleanup_floor_, lit.time->ival)
                                                        : lit.time->ival;
                    } else {
                        // Bindings range over the whole retained history.
                        config_.cleanup_enabled = false;
                    }
                    break;
                }
                default:
                    break;
            }
        }
    }
}

bool ReasonerNode::relevant(const OccurrenceBatch& batch) const {
    for (const Atom& a : batch.begins)
        if (config_.want_preds.count(a.pred)) return true;
    for (const Atom& a : batch.ends)
        if (config_.want_preds.count(a.pred)) return true;
    return false;
}

void ReasonerNode::refresh_schedule(TimePoint tick) {
    dues_.clear();
    for (const auto& [due, atoms] : db_.next_trigger(tick, tracked_)) {
        (void)atoms;
        dues_.insert(due);
    }
    if (auto d = future_.next_due()) dues_.insert(*d);
}

StepResult ReasonerNode::step(TimePoint tick, const OccurrenceBatch& batch) {
    if (tick <= last_tick_) throw Error("ticks must strictly increase");
    if (!batch.begins.empty() || !batch.ends.empty()) {
        OccurrenceBatch stamped = batch;
        stamped.at = tick;
        db_.apply(stamped);
    }

    std::vector<Atom> released = future_.release_due(tick);
    for (const Atom& a : released) db_.inject(a, tick);

    bool first = last_tick_ < config_.origin;
    bool due_now = dues_.count(tick) > 0;
    bool need = first || due_now || per_tick_reeval_ || !released.empty() || relevant(batch);

    StepResult out;
    out.evaluated = need;
    last_tick_ = tick;

    if (!need) {
        out.next_due = next_due();
        return out;
    }

    SolveResult sol = solve_prepared(prepared_, db_, tick, config_);
    out.inconsistent = !sol.sat;
    if (!sol.sat)
        std::cerr << "node " << config_.name << ": inconsistent at tick " << tick
                  << ", retracting assertions\n";

    // Own-lane history tracks the model's truth; re-injected future points
    // already live in the data lane.
    std::set<Atom> own_now = sol.sat ? sol.true_now : std::set<Atom>{};
    for (const auto& [atom, was] : prev_own_) {
        if (was && own_now.count(atom) == 0) db_.assert_own(atom, tick, false);
    }
    for (const Atom& a : own_now) db_.assert_own(a, tick, true);
    prev_own_.clear();
    for (const Atom& a : own_now) prev_own_[a] = true;

    // Emission view combines derived truth with released data points.
    std::set<Atom> visible = own_now;
    for (const Atom& a : released) visible.insert(a);

    for (const auto& [atom, was] : prev_truth_)
        if (was && visible.count(atom) == 0) out.changes.push_back({atom, false});
    for (const Atom& a : visible) {
        auto it = prev_truth_.find(a);
        if (it == prev_truth_.end() || !it->second) out.changes.push_back({a, true});
    }
    std::sort(out.changes.begin(), out.changes.end());
    prev_truth_.clear();
    for (const Atom& a : visible) prev_truth_[a] = true;

    for (const auto& [atom, when] : sol.future) future_.record(atom, when, tick);

    refresh_schedule(tick);
    if (!released.empty()) dues_.insert(tick + 1);  // close the injected points

    if (config_.cleanup_enabled && max_window_ > 0) {
        TimePoint cutoff = tick - max_window_ - 1;
        if (cleanup_floor_) cutoff = std::min(cutoff, *cleanup_floor_);
        if (cutoff > db_.watermark()) db_.cleanup(cutoff);
    }

    last_delta_ = out.changes;
    out.next_due = next_due();
    return out;
}

std::optional<TimePoint> ReasonerNode::next_due() const {
    if (dues_.empty()) return std::nullopt;
    return *dues_.begin();
}

std::string ReasonerNode::debug_json(TimePoint t_now) const {
    nlohmann::json j;
    j["node"] = config_.name;
    j["store"] = nlohmann::json::parse(stream_to_json(db_.materialize(t_now)));
    nlohmann::json delta = nlohmann::json::array();
    for (const auto& [atom, begins] : last_delta_)
        delta.push_back({{"atom", atom.text()}, {"op", begins ? "begin" : "end"}});
    j["last_delta"] = std::move(delta);
    return j.dump(2);
}

}  // namespace larstream
