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

#include "larstream/bench.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

namespace larstream::bench {

namespace {

using Clock = std::chrono::steady_clock;

double cpu_ms_now() {
    rusage u{};
    getrusage(RUSAGE_SELF, &u);
    auto to_ms = [](const timeval& tv) {
        return static_cast<double>(tv.tv_sec) * 1e3 + static_cast<double>(tv.tv_usec) / 1e3;
    };
    return to_ms(u.ru_utime) + to_ms(u.ru_stime);
}

}  // namespace

GenResult gen_caching(std::int64_t window_k, int length) {
    if (window_k < 1) throw Error("caching window must be >= 1");
    std::ostringstream p;
    p << "#ext alpha/1.\n#ext rtm50/0.\n";
    p << "high :- value(V), alpha(V) at T [" << window_k << "], 18 <= V.\n";
    p << "mid :- value(V), alpha(V) at T [" << window_k << "], 12 <= V, V < 18.\n";
    p << "low :- value(V), alpha(V) at T [" << window_k << "], V <= 12.\n";
    p << "lfu :- high always [" << window_k << "].\n";
    p << "lru :- mid always [" << window_k << "].\n";
    p << "fifo :- low always [" << window_k << "], rtm50 in [" << window_k << "].\n";
    p << "done :- lfu.\ndone :- lru.\ndone :- fifo.\nrandom :- not done.\n";
    p << "value(5). value(15). value(25).\n";

    GenResult out;
    out.program = p.str();
    // Sustained phases a bit longer than the window so each strategy can
    // complete, separated by silence so the default strategy fires too.
    const int phase = static_cast<int>(window_k) + 2;
    std::string active;
    bool rtm = false;
    for (int t = 0; t < length; ++t) {
        int cycle = (t / phase) % 4;
        std::string want = cycle == 0 ? "alpha(25)" : cycle == 1 ? "alpha(15)"
                                    : cycle == 2   ? "alpha(5)"
                                                   : "";
        bool want_rtm = cycle == 2;
        if (want != active) {
            if (!active.empty()) out.input.push_back(WireEvent::end(t, parse_atom(active)));
            if (!want.empty()) out.input.push_back(WireEvent::begin(t, parse_atom(want)));
            active = want;
        }
        if (want_rtm != rtm) {
            out.input.push_back(want_rtm ? WireEvent::begin(t, parse_atom("rtm50"))
                                         : WireEvent::end(t, parse_atom("rtm50")));
            rtm = want_rtm;
        }
        out.input.push_back(WireEvent::tick(t));
    }
    return out;
}

std::string gen_nqueens(int n, int stages, std::int64_t window) {
    if (n < 4) throw Error("n-queens needs n >= 4");
    if (stages < 1) throw Error("n-queens needs at least one stage");
    if (stages > n) throw Error("stage count cannot exceed n");
    std::ostringstream p;
    p << "#ext send0/1.\n";
    for (int i = 1; i <= stages; ++i) {
        std::string d = "d" + std::to_string(i), q = "q" + std::to_string(i),
                    pl = "p" + std::to_string(i), send = "send" + std::to_string(i),
                    prev = "send" + std::to_string(i - 1);
        p << d << "(1.." << n << ").\n";
        p << q << "(" << i << ",X) :- " << prev << "(X) in [" << window << "], " << d << "(X).\n";
        p << q << "(R,C) :- " << d << "(R), " << d << "(C), not not " << q << "(R,C).\n";
        p << ":- " << q << "(R,C), " << q << "(R1,C), R < R1.\n";
        p << ":- " << q << "(R,C), " << q << "(R,C1), C < C1.\n";
        p << ":- " << q << "(R,C), " << q << "(R1,C1), R < R1, R1 - R = |C1 - C|.\n";
        p << pl << "(R) :- " << q << "(R,C).\n";
        p << ":- " << d << "(X), not " << pl << "(X).\n";
        p << send << "(X) :- " << q << "(" << i << ",X).\n";
    }
    return p.str();
}

std::vector<WireEvent> nqueens_input(int ticks, const std::vector<int>& values) {
    if (values.empty()) throw Error("need at least one seed column");
    std::vector<WireEvent> out;
    std::string open;
    for (int t = 0; t < ticks; ++t) {
        std::string atom = "send0(" + std::to_string(values[static_cast<std::size_t>(t) % values.size()]) + ")";
        if (atom != open) {
            if (!open.empty()) out.push_back(WireEvent::end(t, parse_atom(open)));
            out.push_back(WireEvent::begin(t, parse_atom(atom)));
            open = atom;
        }
        out.push_back(WireEvent::tick(t));
    }
    return out;
}

namespace {

bool completable(int n, int pinned_row, int pinned_col, std::vector<int>& cols, int row) {
    if (row > n) return true;
    for (int c = 1; c <= n; ++c) {
        if (row == pinned_row && c != pinned_col) continue;
        bool ok = true;
        for (int r = 1; r < row; ++r) {
            int cr = cols[static_cast<std::size_t>(r)];
            if (cr == c || std::abs(cr - c) == row - r) { ok = false; break; }
        }
        if (!ok) continue;
        cols[static_cast<std::size_t>(row)] = c;
        if (completable(n, pinned_row, pinned_col, cols, row + 1)) return true;
        cols[static_cast<std::size_t>(row)] = 0;
    }
    return false;
}

bool stage_completable(int n, int row, int col) {
    std::vector<int> cols(static_cast<std::size_t>(n) + 1, 0);
    return completable(n, row, col, cols, 1);
}

}  // namespace

std::vector<int> feasible_seed_columns(int n, int stages) {
    std::vector<int> out;
    for (int v = 1; v <= n; ++v) {
        bool ok = true;
        for (int i = 1; i <= stages && ok; ++i) ok = stage_completable(n, i, v);
        if (ok) out.push_back(v);
    }
    return out;
}

bool valid_placement(int n, const std::set<std::pair<int, int>>& queens) {
    if (static_cast<int>(queens.size()) != n) return false;
    std::set<int> rows, cols;
    for (const auto& [r, c] : queens) {
        if (r < 1 || r > n || c < 1 || c > n) return false;
        rows.insert(r);
        cols.insert(c);
    }
    if (static_cast<int>(rows.size()) != n || static_cast<int>(cols.size()) != n) return false;
    for (const auto& a : queens)
        for (const auto& b : queens)
            if (a < b && std::abs(a.first - b.first) == std::abs(a.second - b.second)) return false;
    return true;
}

PlacementAudit audit_queens_output(const std::vector<WireEvent>& output, int n, int stages) {
    PlacementAudit audit;
    for (const auto& [tick, stream] : per_tick_streams(output)) {
        for (int i = 1; i <= stages; ++i) {
            std::string pred = "q" + std::to_string(i);
            std::set<std::pair<int, int>> queens;
            for (const auto& [atom, ivs] : stream.atoms()) {
                (void)ivs;
                if (atom.pred != pred || atom.args.size() != 2) continue;
                if (!stream.holds_at(atom, tick)) continue;
                queens.insert({static_cast<int>(atom.args[0].as_int()),
                               static_cast<int>(atom.args[1].as_int())});
            }
            if (queens.empty()) continue;
            ++audit.checked;
            if (!valid_placement(n, queens)) ++audit.violations;
        }
    }
    return audit;
}

namespace {

/// Releases each tick's events at its wall-clock deadline.
class PacedSource : public EventSource {
public:
    PacedSource(std::vector<WireEvent> events, double interval_ms)
        : events_(std::move(events)), interval_(interval_ms) {}

    std::optional<WireEvent> next() override {
        if (idx_ >= events_.size()) return std::nullopt;
        const WireEvent& ev = events_[idx_];
        if (!started_) {
            start_ = Clock::now();
            started_ = true;
        }
        if (!released_.count(ev.t)) {
            auto deadline = start_ + std::chrono::duration_cast<Clock::duration>(
                                         std::chrono::duration<double, std::milli>(
                                             interval_ * static_cast<double>(ev.t)));
            std::this_thread::sleep_until(deadline);
            released_.insert(ev.t);
        }
        ++idx_;
        if (ev.op == WireEvent::Op::Tick) {
            std::lock_guard<std::mutex> lock(mu_);
            t_in_[ev.t] = Clock::now();
        }
        return ev;
    }

    std::map<TimePoint, Clock::time_point> input_times() {
        std::lock_guard<std::mutex> lock(mu_);
        return t_in_;
    }

private:
    std::vector<WireEvent> events_;
    double interval_;
    std::size_t idx_ = 0;
    bool started_ = false;
    Clock::time_point start_;
    std::set<TimePoint> released_;
    std::mutex mu_;
    std::map<TimePoint, Clock::time_point> t_in_;
};

class TimingSink : public EventSink {
public:
    void push(const WireEvent& ev) override {
        events.push_back(ev);
        if (ev.op == WireEvent::Op::Tick) {
            t_out[ev.t] = Clock::now();
            cpu_at[ev.t] = cpu_ms_now();
        }
    }
    std::vector<WireEvent> events;
    std::map<TimePoint, Clock::time_point> t_out;
    std::map<TimePoint, double> cpu_at;
};

bool tail_grows(const std::vector<double>& latency, double interval_ms) {
    if (latency.size() < 6) return false;
    std::size_t tail = std::max<std::size_t>(5, latency.size() / 4);
    std::size_t from = latency.size() - tail;
    double peak = *std::max_element(latency.begin() + static_cast<std::ptrdiff_t>(from), latency.end());
    double eps = 0.1 * peak;
    for (std::size_t i = from; i + 1 < latency.size(); ++i)
        if (latency[i + 1] < latency[i] - eps) return false;
    // Backlog keeps building: the tail climbs by more than pacing jitter and
    // the final latency clearly exceeds the input spacing.
    return latency.back() - latency[from] > std::max(2.0 * interval_ms, 1.0) &&
           latency.back() > 3.0 * interval_ms;
}

struct ScenarioInputs {
    std::string program;
    std::vector<WireEvent> input;
    int stage_count = 1;
};

ScenarioInputs scenario_inputs(const BenchSpec& spec) {
    ScenarioInputs s;
    if (spec.scenario == BenchSpec::Scenario::Caching) {
        GenResult g = gen_caching(spec.window, spec.length);
        s.program = std::move(g.program);
        s.input = std::move(g.input);
        s.stage_count = 2;
    } else {
        s.program = gen_nqueens(spec.n, spec.stages);
        s.input = nqueens_input(spec.length, [&] {
            std::vector<int> vals = feasible_seed_columns(spec.n, spec.stages);
            if (vals.empty())
                for (int v = 1; v <= spec.n; ++v) vals.push_back(v);
            return vals;
        }());
        s.stage_count = spec.stages;
    }
    return s;
}

}  // namespace

BenchResult run_bench(const BenchSpec& spec) {
    ScenarioInputs scenario = scenario_inputs(spec);
    lang::ProgramSource src = lang::parse(scenario.program);
    EngineOptions opts;
    opts.single_node = spec.single_node;
    opts.transport = spec.transport;
    const std::string mode = spec.single_node ? "single-node" : "distributed";

    std::vector<double> sweep = spec.intervals_ms;
    if (sweep.empty()) {
        // Calibrate around the unpaced per-tick cost.
        PacedSource source(scenario.input, 0.0);
        TimingSink sink;
        Topology topo = deploy(src, opts);
        double cpu0 = cpu_ms_now();
        auto wall0 = Clock::now();
        run(topo, source, sink, opts);
        double per_tick =
            std::max((cpu_ms_now() - cpu0) / std::max(1, spec.length),
                     std::chrono::duration<double, std::milli>(Clock::now() - wall0).count() /
                         std::max(1, spec.length));
        for (double f : {8.0, 4.0, 2.0, 1.0, 0.5})
            sweep.push_back(std::max(0.2, per_tick * f));
    }

    BenchResult result;
    for (double interval : sweep) {
        Topology topo = deploy(src, opts);
        PacedSource source(scenario.input, interval);
        TimingSink sink;
        auto wall0 = Clock::now();
        run(topo, source, sink, opts);
        double wall_s = std::chrono::duration<double>(Clock::now() - wall0).count();
        bool dnf = wall_s > spec.timeout_s;
        result.dnf = result.dnf || dnf;
        result.last_output = sink.events;

        auto t_in = source.input_times();
        std::vector<double> latency;
        std::vector<double> cpu;
        double prev_cpu = -1;
        for (const auto& [tick, in_time] : t_in) {
            auto out_it = sink.t_out.find(tick);
            if (out_it == sink.t_out.end()) continue;
            latency.push_back(
                std::max(0.0, std::chrono::duration<double, std::milli>(out_it->second - in_time).count()));
            double c = sink.cpu_at[tick];
            cpu.push_back(prev_cpu < 0 ? 0.0 : std::max(0.0, c - prev_cpu));
            prev_cpu = c;
        }
        bool saturated = !dnf && tail_grows(latency, interval);
        result.saturated_at[interval] = saturated || dnf;
        std::string flag = dnf ? "dnf" : saturated ? "true" : "false";
        for (std::size_t i = 0; i < latency.size(); ++i) {
            BenchRow row;
            row.tick_interval_ms = interval;
            row.stage_count = scenario.stage_count;
            row.mode = mode;
            row.latency_ms = latency[i];
            row.cpu_ms = cpu[i];
            row.saturated = flag;
            result.rows.push_back(row);
        }
    }
    for (const auto& [interval, sat] : result.saturated_at) {
        if (!sat) continue;
        if (!result.saturation_interval_ms || interval > *result.saturation_interval_ms)
            result.saturation_interval_ms = interval;
    }
    return result;
}

std::string to_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream out;
    out << "tick_interval_ms,stage_count,mode,latency_ms,cpu_ms,saturated\n";
    for (const auto& r : rows) {
        out << r.tick_interval_ms << "," << r.stage_count << "," << r.mode << "," << r.latency_ms
            << "," << r.cpu_ms << "," << r.saturated << "\n";
    }
    return out.str();
}

}  // namespace larstream::bench
