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

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "larstream/bench.hpp"
#include "larstream/runtime.hpp"

namespace {

using namespace larstream;

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

lang::ProgramSource load_program(const std::string& path) { return lang::parse(slurp(path)); }

int cmd_run(const std::string& program, const std::string& input, const std::string& output,
            const std::string& transport, bool single_node, TimePoint origin,
            const std::string& solver, bool no_cleanup, const std::string& debug_dir) {
    EngineOptions opts;
    opts.transport = transport == "tcp" ? TransportKind::Tcp : TransportKind::InProcess;
    opts.single_node = single_node;
    opts.origin = origin;
    opts.cleanup = !no_cleanup;
    opts.debug_dir = debug_dir;
    if (!solver.empty()) opts.external_solver = solver;

    Topology topo = deploy(load_program(program), opts);

    std::ifstream fin;
    std::istream* in = &std::cin;
    if (input != "-") {
        fin.open(input);
        if (!fin) throw Error("cannot open " + input);
        in = &fin;
    }
    std::ofstream fout;
    std::ostream* out = &std::cout;
    if (!output.empty() && output != "-") {
        fout.open(output);
        if (!fout) throw Error("cannot open " + output);
        out = &fout;
    }
    RunStats stats = run_streams(topo, *in, *out, opts);
    std::cerr << "processed " << stats.ticks << " ticks, " << stats.events_out << " events\n";
    return stats.inconsistent ? 2 : 0;
}

int cmd_decompose(const std::string& program, const std::string& dot_path,
                  const std::string& json_path) {
    lang::ProgramSource prepared = lang::prepare(load_program(program));
    decompose::DepGraph dep = decompose::build_dep_graph(prepared);
    decompose::ComponentGraph graph = decompose::build_component_graph(dep, prepared);
    decompose::NodeLabels labels;
    if (decompose::is_stream_stratified(graph)) {
        labels = decompose::label(graph);
    } else {
        std::cerr << "warning: program is not stream-stratified\n";
    }
    std::string json = decompose::to_json(graph, labels, prepared);
    if (json_path.empty() || json_path == "-")
        std::cout << json << "\n";
    else
        std::ofstream(json_path) << json << "\n";
    if (!dot_path.empty()) std::ofstream(dot_path) << decompose::to_dot(graph, labels);
    return 0;
}

int cmd_check(const std::string& program, const std::string& data_path,
              const std::string& candidate_path, TimePoint t, std::size_t budget) {
    lang::ProgramSource prepared = lang::prepare(load_program(program));
    IntervalStream data = stream_from_json(slurp(data_path));
    IntervalStream candidate = stream_from_json(slurp(candidate_path));
    GroundProgram gp = lang::to_ground_program(prepared, data.timeline());
    bool verdict = is_answer_stream(data, candidate, gp, t, budget);
    std::cout << (verdict ? "true" : "false") << "\n";
    return 0;
}

int cmd_bench(const std::string& scenario, int n, int stages, std::int64_t window, int length,
              const std::string& mode, const std::string& intervals, double timeout_s,
              int repetitions, const std::string& csv_path) {
    bench::BenchSpec spec;
    spec.scenario = scenario == "caching" ? bench::BenchSpec::Scenario::Caching
                                          : bench::BenchSpec::Scenario::NQueens;
    spec.n = n;
    spec.stages = stages;
    spec.window = window;
    spec.length = length;
    spec.timeout_s = timeout_s;
    if (!intervals.empty()) {
        std::istringstream is(intervals);
        std::string piece;
        while (std::getline(is, piece, ',')) spec.intervals_ms.push_back(std::stod(piece));
    }

    std::vector<bench::BenchRow> rows;
    std::vector<std::string> modes;
    if (mode == "both") {
        modes = {"distributed", "single-node"};
    } else {
        modes = {mode};
    }
    for (int rep = 0; rep < repetitions; ++rep) {
        for (const std::string& m : modes) {
            spec.single_node = m == "single-node";
            bench::BenchResult result = bench::run_bench(spec);
            rows.insert(rows.end(), result.rows.begin(), result.rows.end());
            std::cerr << "rep " << rep << " " << m << ": saturation interval ";
            if (result.saturation_interval_ms)
                std::cerr << *result.saturation_interval_ms << " ms";
            else
                std::cerr << "none";
            std::cerr << (result.dnf ? " (dnf)" : "") << "\n";
            if (spec.scenario == bench::BenchSpec::Scenario::NQueens) {
                bench::PlacementAudit audit =
                    bench::audit_queens_output(result.last_output, spec.n, spec.stages);
                if (audit.violations > 0) throw Error("invalid queens placement emitted");
            }
        }
    }
    std::string csv = bench::to_csv(rows);
    if (csv_path.empty() || csv_path == "-")
        std::cout << csv;
    else
        std::ofstream(csv_path) << csv;
    return 0;
}

int cmd_gen(const std::string& scenario, int n, int stages, std::int64_t window, int ticks,
            const std::string& seeds, const std::string& out_program,
            const std::string& out_input) {
    std::string program;
    std::vector<WireEvent> input;
    if (scenario == "caching") {
        bench::GenResult g = bench::gen_caching(window, ticks);
        program = std::move(g.program);
        input = std::move(g.input);
    } else {
        program = bench::gen_nqueens(n, stages, window);
        std::vector<int> values;
        if (!seeds.empty()) {
            std::istringstream is(seeds);
            std::string piece;
            while (std::getline(is, piece, ',')) values.push_back(std::stoi(piece));
        } else {
            values = bench::feasible_seed_columns(n, stages);
            if (values.empty())
                for (int v = 1; v <= n; ++v) values.push_back(v);
        }
        input = bench::nqueens_input(ticks, values);
    }
    if (out_program.empty() || out_program == "-")
        std::cout << program;
    else
        std::ofstream(out_program) << program;
    if (!out_input.empty()) {
        std::ofstream f(out_input);
        for (const WireEvent& ev : input) f << ev.to_ndjson() << "\n";
        f << "{\"op\":\"eos\"}\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"distributed interval-stream reasoner"};
    app.require_subcommand(1);

    std::string program, input = "-", output, transport = "inproc", solver, debug_dir;
    bool single_node = false, no_cleanup = false;
    TimePoint origin = 0;
    auto* run_cmd = app.add_subcommand("run", "deploy and execute a program on an event stream");
    run_cmd->add_option("--program", program, "program file")->required();
    run_cmd->add_option("--input", input, "input NDJSON file ('-' for stdin)");
    run_cmd->add_option("--output", output, "output NDJSON file ('-' for stdout)");
    run_cmd->add_option("--transport", transport, "inproc|tcp")
        ->check(CLI::IsMember({"inproc", "tcp"}));
    run_cmd->add_flag("--single-node", single_node, "collapse the decomposition into one node");
    run_cmd->add_option("--origin", origin, "timeline start tick");
    run_cmd->add_option("--external-solver", solver, "external solver command");
    run_cmd->add_flag("--no-cleanup", no_cleanup, "retain the full history");
    run_cmd->add_option("--debug-dir", debug_dir, "dump each node's store and last delta here");

    std::string dot_path, json_path;
    auto* dec_cmd = app.add_subcommand("decompose", "emit the component graph");
    dec_cmd->add_option("--program", program, "program file")->required();
    dec_cmd->add_option("--dot", dot_path, "write DOT here");
    dec_cmd->add_option("--json", json_path, "write JSON here (default stdout)");

    std::string data_path, candidate_path;
    TimePoint at_time = 0;
    std::size_t budget = kDefaultEnumerationBudget;
    auto* check_cmd = app.add_subcommand("check", "verify a candidate answer stream");
    check_cmd->add_option("--program", program, "program file")->required();
    check_cmd->add_option("--data", data_path, "data stream JSON")->required();
    check_cmd->add_option("--candidate", candidate_path, "candidate stream JSON")->required();
    check_cmd->add_option("--time", at_time, "evaluation time point")->required();
    check_cmd->add_option("--budget", budget, "enumeration budget");

    std::string scenario = "nqueens", mode = "both", intervals, csv_path;
    int n = 6, stages = 2, length = 40, repetitions = 1;
    std::int64_t window = 3;
    double timeout_s = 120.0;
    auto* bench_cmd = app.add_subcommand("bench", "latency/saturation benchmark");
    bench_cmd->add_option("--scenario", scenario, "caching|nqueens")
        ->check(CLI::IsMember({"caching", "nqueens"}));
    bench_cmd->add_option("--n", n, "board size");
    bench_cmd->add_option("--stages", stages, "pipeline stages");
    bench_cmd->add_option("--window", window, "window size in ticks");
    bench_cmd->add_option("--length", length, "ticks per run");
    bench_cmd->add_option("--mode", mode, "distributed|single-node|both")
        ->check(CLI::IsMember({"distributed", "single-node", "both"}));
    bench_cmd->add_option("--intervals", intervals, "comma-separated tick intervals in ms");
    bench_cmd->add_option("--timeout", timeout_s, "per-run timeout seconds");
    bench_cmd->add_option("--repetitions", repetitions, "repetitions per mode");
    bench_cmd->add_option("--csv", csv_path, "write CSV here (default stdout)");

    std::string out_program, out_input, seeds;
    int ticks = 40;
    auto* gen_cmd = app.add_subcommand("gen", "emit a scenario program and input stream");
    gen_cmd->add_option("--scenario", scenario, "caching|nqueens")
        ->check(CLI::IsMember({"caching", "nqueens"}));
    gen_cmd->add_option("--n", n, "board size");
    gen_cmd->add_option("--stages", stages, "pipeline stages");
    gen_cmd->add_option("--window", window, "window size in ticks");
    gen_cmd->add_option("--ticks", ticks, "input length in ticks");
    gen_cmd->add_option("--seeds", seeds, "comma-separated seed columns");
    gen_cmd->add_option("--out-program", out_program, "program file (default stdout)");
    gen_cmd->add_option("--out-input", out_input, "input NDJSON file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed())
            return cmd_run(program, input, output, transport, single_node, origin, solver,
                           no_cleanup, debug_dir);
        if (dec_cmd->parsed()) return cmd_decompose(program, dot_path, json_path);
        if (check_cmd->parsed())
            return cmd_check(program, data_path, candidate_path, at_time, budget);
        if (bench_cmd->parsed())
            return cmd_bench(scenario, n, stages, window, length, mode, intervals, timeout_s,
                             repetitions, csv_path);
        if (gen_cmd->parsed())
            return cmd_gen(scenario, n, stages, window, ticks, seeds, out_program, out_input);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
