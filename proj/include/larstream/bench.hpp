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

#ifndef LARSTREAM_BENCH_HPP
#define LARSTREAM_BENCH_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "larstream/runtime.hpp"

namespace larstream::bench {

struct GenResult {
    std::string program;
    std::vector<WireEvent> input;  // events plus tick markers, no eos
};

/// Content-caching program with the given window size, plus an input schedule
/// cycling through the high/mid/low/idle regimes so every strategy fires.
GenResult gen_caching(std::int64_t window_k, int length);

/// `stages` chained n-queens completion problems; stage i pins the queen of
/// row i to the column received from the previous stage.
std::string gen_nqueens(int n, int stages, std::int64_t window = 2);

/// Seed stream for the chain: send0 point occurrences cycling over `values`,
/// one per tick.
std::vector<WireEvent> nqueens_input(int ticks, const std::vector<int>& values);

/// Columns that keep every stage's pinned row completable (the sent value
/// cascades unchanged through the chain).
std::vector<int> feasible_seed_columns(int n, int stages);

/// Complete valid placement: one queen per row and column, no shared
/// diagonal. Row/column values are 1-based.
bool valid_placement(int n, const std::set<std::pair<int, int>>& queens);

struct PlacementAudit {
    int checked = 0;
    int violations = 0;
};

/// Validates every per-tick placement of every stage found in a run output.
PlacementAudit audit_queens_output(const std::vector<WireEvent>& output, int n, int stages);

struct BenchSpec {
    enum class Scenario { Caching, NQueens };
    Scenario scenario = Scenario::NQueens;
    int n = 6;
    int stages = 2;
    std::int64_t window = 18;            // caching window size
    int length = 40;                     // ticks per run
    std::vector<double> intervals_ms;    // descending sweep; empty = adaptive
    bool single_node = false;
    double timeout_s = 120.0;
    TransportKind transport = TransportKind::InProcess;
};

struct BenchRow {
    double tick_interval_ms = 0;
    int stage_count = 1;
    std::string mode;
    double latency_ms = 0;
    double cpu_ms = 0;
    std::string saturated;  // "true", "false" or "dnf"
};

struct BenchResult {
    std::vector<BenchRow> rows;                     // one per (interval, tick)
    std::map<double, bool> saturated_at;            // per interval
    std::optional<double> saturation_interval_ms;   // largest saturated interval
    bool dnf = false;
    std::vector<WireEvent> last_output;             // for downstream audits
};

/// Replays the scenario at each tick interval, pacing the input in wall-clock
/// time and measuring last-input to last-output latency per tick. A run is
/// saturated when latency keeps growing across its tail.
BenchResult run_bench(const BenchSpec& spec);

std::string to_csv(const std::vector<BenchRow>& rows);

}  // namespace larstream::bench

#endif  // LARSTREAM_BENCH_HPP
