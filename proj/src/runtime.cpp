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

#include "larstream/runtime.hpp"

#include <atomic>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "larstream/interval_db.hpp"
#include "transport.hpp"

namespace larstream {

using json = nlohmann::json;

WireEvent WireEvent::begin(TimePoint t, Atom a) {
    WireEvent e;
    e.op = Op::Begin;
    e.t = t;
    e.atom = std::move(a);
    return e;
}

WireEvent WireEvent::end(TimePoint t, Atom a) {
    WireEvent e;
    e.op = Op::End;
    e.t = t;
    e.atom = std::move(a);
    return e;
}

WireEvent WireEvent::tick(TimePoint t) {
    WireEvent e;
    e.op = Op::Tick;
    e.t = t;
    return e;
}

WireEvent WireEvent::eos(TimePoint t) {
    WireEvent e;
    e.op = Op::Eos;
    e.t = t;
    return e;
}

bool WireEvent::operator<(const WireEvent& o) const {
    if (t != o.t) return t < o.t;
    if (atom.has_value() != o.atom.has_value()) return !atom.has_value();
    if (atom && !(*atom == *o.atom)) return *atom < *o.atom;
    return op < o.op;
}

std::string WireEvent::to_ndjson() const {
    const char* name = op == Op::Begin ? "begin" : op == Op::End ? "end" : op == Op::Tick ? "tick" : "eos";
    std::string out = std::string("{\"op\":\"") + name + "\",\"t\":" + std::to_string(t);
    if (atom) out += ",\"atom\":" + json(atom->text()).dump();
    return out + "}";
}

WireEvent WireEvent::from_ndjson(std::string_view line) {
    json j = json::parse(line);
    std::string op = j.at("op").get<std::string>();
    WireEvent e;
    e.t = j.contains("t") ? j.at("t").get<TimePoint>() : 0;
    if (op == "begin" || op == "end") {
        e.op = op == "begin" ? Op::Begin : Op::End;
        e.atom = parse_atom(j.at("atom").get<std::string>());
    } else if (op == "tick") {
        e.op = Op::Tick;
    } else if (op == "eos") {
        e.op = Op::Eos;
    } else {
        throw Error("unknown wire op '" + op + "'");
    }
    return e;
}

Topology deploy(const lang::ProgramSource& source, const EngineOptions& opts) {
    Topology topo;
    topo.prepared = lang::prepare(source);
    topo.single_node = opts.single_node;
    decompose::DepGraph dep = decompose::build_dep_graph(topo.prepared);
    topo.graph = decompose::build_component_graph(dep, topo.prepared);
    std::vector<int> cycle = decompose::find_unstratified_cycle(topo.graph);
    if (!cycle.empty()) {
        std::string msg = "program is not stream-stratified: cycle";
        for (int id : cycle) msg += " -> c" + std::to_string(id);
        throw Error(msg);
    }
    topo.labels = decompose::label(topo.graph);
    topo.extensional = topo.prepared.extensional_preds();

    std::vector<lang::DeployRule> all_rules = lang::ground(topo.prepared);

    std::map<std::string, int> layer_of_pred;
    for (const auto& comp : topo.graph.components)
        for (const auto& p : comp.prod) layer_of_pred[p] = comp.layer;

    if (opts.single_node) {
        NodeConfig cfg;
        cfg.component_id = 0;
        cfg.name = "all";
        cfg.rules = all_rules;
        cfg.prod_preds = topo.prepared.intensional_preds();
        cfg.pub_preds = topo.prepared.visible_intensional_preds();
        for (const auto& comp : topo.graph.components)
            cfg.want_preds.insert(comp.want.begin(), comp.want.end());
        cfg.atom_layers = layer_of_pred;
        cfg.origin = opts.origin;
        cfg.cleanup_enabled = opts.cleanup;
        cfg.external_solver = opts.external_solver;
        topo.nodes.push_back(std::move(cfg));
        Topology::Edge in;
        in.from = Topology::kMaster;
        in.to = 0;
        in.listening = topo.extensional;
        topo.edges.push_back(std::move(in));
        Topology::Edge out;
        out.from = 0;
        out.to = Topology::kMaster;
        out.listening = topo.prepared.visible_intensional_preds();
        topo.edges.push_back(std::move(out));
        return topo;
    }

    for (const auto& comp : topo.graph.components) {
        NodeConfig cfg;
        cfg.component_id = comp.id;
        cfg.name = "c" + std::to_string(comp.id);
        for (const auto& rule : all_rules)
            if (std::find(comp.rules.begin(), comp.rules.end(), rule.source_rule) != comp.rules.end())
                cfg.rules.push_back(rule);
        cfg.want_preds = comp.want;
        cfg.prod_preds = comp.prod;
        cfg.pub_preds = topo.labels.pub.at(comp.id);
        for (const auto& p : comp.prod) cfg.atom_layers[p] = comp.layer;
        cfg.origin = opts.origin;
        cfg.cleanup_enabled = opts.cleanup;
        cfg.external_solver = opts.external_solver;
        topo.nodes.push_back(std::move(cfg));
    }
    auto node_index = [&](int comp_id) { return comp_id - 1; };
    for (int src : topo.graph.sources) {
        Topology::Edge e;
        e.from = Topology::kMaster;
        e.to = node_index(src);
        e.listening = topo.labels.listening.at({decompose::kMasterNode, src});
        topo.edges.push_back(std::move(e));
    }
    for (const auto& [p, q] : topo.graph.edges) {
        Topology::Edge e;
        e.from = node_index(p);
        e.to = node_index(q);
        e.listening = topo.labels.listening.at({p, q});
        topo.edges.push_back(std::move(e));
    }
    for (int sink : topo.graph.sinks) {
        Topology::Edge e;
        e.from = node_index(sink);
        e.to = Topology::kMaster;
        e.listening = topo.labels.listening.at({sink, decompose::kMasterNode});
        topo.edges.push_back(std::move(e));
    }
    return topo;
}

namespace {

struct SharedState {
    std::atomic<bool> inconsistent{false};
    std::mutex error_mu;
    std::string error;

    void fail(const std::string& msg) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (error.empty()) error = msg;
    }
};

struct OutPort {
    Channel* ch;
    const std::set<std::string>* listening;
};

void send_all(std::vector<OutPort>& outs, const std::set<WireEvent>& events, TimePoint tick) {
    for (auto& out : outs) {
        for (const WireEvent& ev : events)
            if (ev.atom && out.listening->count(ev.atom->pred)) out.ch->send(ev);
        out.ch->send(WireEvent::tick(tick));
    }
}

void send_eos(std::vector<OutPort>& outs, TimePoint t) {
    for (auto& out : outs) out.ch->send(WireEvent::eos(t));
}

struct InPort {
    Channel* ch;
    std::deque<WireEvent> events;
    std::optional<TimePoint> pending;
    bool eos = false;

    void fill() {
        while (!eos && !pending) {
            WireEvent ev = ch->recv();
            switch (ev.op) {
                case WireEvent::Op::Begin:
                case WireEvent::Op::End:
                    events.push_back(ev);
                    break;
                case WireEvent::Op::Tick:
                    pending = ev.t;
                    break;
                case WireEvent::Op::Eos:
                    eos = true;
                    break;
            }
        }
    }
};

class NodeRunner {
public:
    NodeRunner(const NodeConfig& cfg, std::vector<Channel*> in, std::vector<OutPort> outs,
               SharedState* shared, std::string debug_dir)
        : node_(cfg), outs_(std::move(outs)), shared_(shared), debug_dir_(std::move(debug_dir)) {
        for (Channel* ch : in) ports_.push_back(InPort{ch, {}, std::nullopt, false});
    }

    void operator()() {
        try {
            loop();
        } catch (const std::exception& e) {
            shared_->fail(std::string("node ") + node_.config().name + ": " + e.what());
            send_eos(outs_, last_);
        }
        if (!debug_dir_.empty()) {
            std::ofstream f(debug_dir_ + "/" + node_.config().name + ".json");
            f << node_.debug_json(last_ + 1) << "\n";
        }
    }

private:
    void emit_step(TimePoint tick, const std::set<WireEvent>& relays, const StepResult& res) {
        std::set<WireEvent> events = relays;
        for (const auto& [atom, begins] : res.changes)
            events.insert(begins ? WireEvent::begin(tick, atom) : WireEvent::end(tick, atom));
        send_all(outs_, events, tick);
        if (res.inconsistent) shared_->inconsistent = true;
        last_ = tick;
    }

    void fire_dues_below(TimePoint bound) {
        while (auto due = node_.next_due()) {
            if (*due >= bound) break;
            StepResult res = node_.step(*due, {});
            emit_step(*due, {}, res);
        }
    }

    void loop() {
        for (;;) {
            for (auto& port : ports_) port.fill();
            bool all_eos = true;
            for (const auto& port : ports_)
                if (!port.eos || port.pending) all_eos = false;
            if (all_eos || ports_.empty()) {
                // Input exhausted: settle the remaining timers, then finish.
                while (auto due = node_.next_due()) {
                    StepResult res = node_.step(*due, {});
                    emit_step(*due, {}, res);
                }
                send_eos(outs_, last_);
                return;
            }
            TimePoint tick = std::numeric_limits<TimePoint>::max();
            for (const auto& port : ports_)
                if (port.pending) tick = std::min(tick, *port.pending);

            fire_dues_below(tick);

            std::set<WireEvent> inbound;
            for (auto& port : ports_) {
                if (!port.pending || *port.pending != tick) continue;
                for (const WireEvent& ev : port.events) {
                    if (ev.t != tick)
                        throw Error("event timed " + std::to_string(ev.t) +
                                    " arrived under barrier " + std::to_string(tick));
                    inbound.insert(ev);
                }
                port.events.clear();
                port.pending.reset();
            }
            OccurrenceBatch batch;
            batch.at = tick;
            for (const WireEvent& ev : inbound)
                (ev.op == WireEvent::Op::Begin ? batch.begins : batch.ends).push_back(*ev.atom);

            StepResult res = node_.step(tick, batch);
            emit_step(tick, inbound, res);
        }
    }

    ReasonerNode node_;
    std::vector<InPort> ports_;
    std::vector<OutPort> outs_;
    SharedState* shared_;
    std::string debug_dir_;
    TimePoint last_ = 0;
};

void feed(EventSource& source, std::vector<OutPort>& outs, const std::set<std::string>& extensional,
          TimePoint origin, SharedState* shared) {
    TimePoint last = origin - 1;
    std::set<WireEvent> buffered;
    try {
        for (;;) {
            std::optional<WireEvent> ev = source.next();
            if (!ev || ev->op == WireEvent::Op::Eos) {
                if (!buffered.empty()) {
                    // Trailing events without their barrier: synthesize it.
                    TimePoint t = buffered.rbegin()->t;
                    std::cerr << "warning: input ended without a tick marker; assuming tick "
                              << t << "\n";
                    send_all(outs, buffered, t);
                }
                send_eos(outs, last);
                return;
            }
            switch (ev->op) {
                case WireEvent::Op::Begin:
                case WireEvent::Op::End: {
                    if (!ev->atom) throw Error("begin/end event without atom");
                    if (extensional.count(ev->atom->pred) == 0)
                        throw Error("input atom '" + ev->atom->text() + "' is not extensional");
                    if (ev->t <= last) throw Error("non-monotone input");
                    WireEvent flip = *ev;
                    flip.op = ev->op == WireEvent::Op::Begin ? WireEvent::Op::End : WireEvent::Op::Begin;
                    if (buffered.count(flip) > 0)
                        throw Error("atom " + ev->atom->text() + " both begins and ends at tick " +
                                    std::to_string(ev->t));
                    buffered.insert(*ev);
                    break;
                }
                case WireEvent::Op::Tick: {
                    if (ev->t <= last) throw Error("non-monotone input");
                    for (const WireEvent& b : buffered)
                        if (b.t != ev->t)
                            throw Error("event timed " + std::to_string(b.t) +
                                        " precedes tick " + std::to_string(ev->t));
                    send_all(outs, buffered, ev->t);
                    buffered.clear();
                    last = ev->t;
                    break;
                }
                case WireEvent::Op::Eos:
                    break;  // handled above
            }
        }
    } catch (const std::exception& e) {
        shared->fail(std::string("ingress: ") + e.what());
        send_eos(outs, last);
    }
}

RunStats collect(std::vector<Channel*> sinks, EventSink& sink, SharedState* shared) {
    RunStats stats;
    std::vector<InPort> ports;
    for (Channel* ch : sinks) ports.push_back(InPort{ch, {}, std::nullopt, false});
    TimePoint last = 0;
    for (;;) {
        for (auto& port : ports) port.fill();
        bool all_eos = true;
        for (const auto& port : ports)
            if (!port.eos || port.pending) all_eos = false;
        if (all_eos || ports.empty()) {
            sink.push(WireEvent::eos(last));
            stats.inconsistent = shared->inconsistent.load();
            return stats;
        }
        TimePoint tick = std::numeric_limits<TimePoint>::max();
        for (const auto& port : ports)
            if (port.pending) tick = std::min(tick, *port.pending);
        std::set<WireEvent> events;  // several sinks may relay the same atom
        for (auto& port : ports) {
            if (!port.pending || *port.pending != tick) continue;
            for (const WireEvent& ev : port.events) events.insert(ev);
            port.events.clear();
            port.pending.reset();
        }
        for (const WireEvent& ev : events) {
            sink.push(ev);
            ++stats.events_out;
        }
        sink.push(WireEvent::tick(tick));
        ++stats.ticks;
        last = tick;
    }
}

}  // namespace

RunStats run(const Topology& topology, EventSource& source, EventSink& sink,
             const EngineOptions& opts) {
    std::string address = opts.listen_address;
    if (address.empty()) {
        const char* env = std::getenv("LARSTREAM_LISTEN");
        address = env ? env : "127.0.0.1:0";
    }
    Fabric fabric = opts.transport == TransportKind::Tcp
                        ? make_tcp_fabric(topology.edges.size(), address)
                        : make_inproc_fabric(topology.edges.size());

    SharedState shared;
    std::vector<OutPort> master_outs;
    std::vector<Channel*> master_ins;
    std::vector<std::vector<Channel*>> node_ins(topology.nodes.size());
    std::vector<std::vector<OutPort>> node_outs(topology.nodes.size());
    for (std::size_t i = 0; i < topology.edges.size(); ++i) {
        const Topology::Edge& e = topology.edges[i];
        Channel* ch = fabric.channels[i].get();
        if (e.from == Topology::kMaster)
            master_outs.push_back({ch, &e.listening});
        else
            node_outs[static_cast<std::size_t>(e.from)].push_back({ch, &e.listening});
        if (e.to == Topology::kMaster)
            master_ins.push_back(ch);
        else
            node_ins[static_cast<std::size_t>(e.to)].push_back(ch);
    }

    std::vector<std::thread> threads;
    threads.reserve(topology.nodes.size() + 1);
    std::deque<NodeRunner> runners;
    for (std::size_t i = 0; i < topology.nodes.size(); ++i) {
        runners.emplace_back(topology.nodes[i], node_ins[i], node_outs[i], &shared,
                             opts.debug_dir);
        threads.emplace_back(std::ref(runners.back()));
    }
    threads.emplace_back([&] { feed(source, master_outs, topology.extensional, opts.origin, &shared); });

    RunStats stats = collect(master_ins, sink, &shared);
    for (auto& t : threads) t.join();
    {
        std::lock_guard<std::mutex> lock(shared.error_mu);
        if (!shared.error.empty()) throw Error(shared.error);
    }
    stats.inconsistent = shared.inconsistent.load();
    return stats;
}

namespace {

class IstreamSource : public EventSource {
public:
    explicit IstreamSource(std::istream& in) : in_(in) {}
    std::optional<WireEvent> next() override {
        std::string line;
        while (std::getline(in_, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            return WireEvent::from_ndjson(line);
        }
        return std::nullopt;
    }

private:
    std::istream& in_;
};

class OstreamSink : public EventSink {
public:
    explicit OstreamSink(std::ostream& out) : out_(out) {}
    void push(const WireEvent& ev) override { out_ << ev.to_ndjson() << "\n"; }

private:
    std::ostream& out_;
};

}  // namespace

RunStats run_streams(const Topology& topology, std::istream& in, std::ostream& out,
                     const EngineOptions& opts) {
    IstreamSource source(in);
    OstreamSink sink(out);
    RunStats stats = run(topology, source, sink, opts);
    out.flush();
    return stats;
}

std::vector<std::pair<TimePoint, IntervalStream>> per_tick_streams(
    const std::vector<WireEvent>& output, TimePoint origin) {
    IntervalDB db(origin);
    std::vector<std::pair<TimePoint, IntervalStream>> out;
    OccurrenceBatch batch;
    bool any = false;
    for (const WireEvent& ev : output) {
        switch (ev.op) {
            case WireEvent::Op::Begin:
            case WireEvent::Op::End:
                batch.at = ev.t;
                any = true;
                (ev.op == WireEvent::Op::Begin ? batch.begins : batch.ends).push_back(*ev.atom);
                break;
            case WireEvent::Op::Tick: {
                if (any) {
                    if (batch.at != ev.t)
                        throw Error("events and tick marker disagree in output stream");
                    db.apply(batch);
                }
                batch = OccurrenceBatch{};
                any = false;
                out.push_back({ev.t, canonicalize(db.materialize(ev.t))});
                break;
            }
            case WireEvent::Op::Eos:
                break;
        }
    }
    return out;
}

}  // namespace larstream
