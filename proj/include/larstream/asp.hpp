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

#ifndef LARSTREAM_ASP_HPP
#define LARSTREAM_ASP_HPP

#include <cstddef>
#include <optional>
#include <vector>

namespace larstream::asp {

/// Normal propositional rule head :- pos, not neg over atom ids.
struct Rule {
    int head = 0;
    std::vector<int> pos;
    std::vector<int> neg;
};

struct Program {
    int atom_count = 0;
    std::vector<Rule> rules;
};

using Model = std::vector<bool>;

/// True iff m equals the least model of the Gelfond-Lifschitz reduct.
bool is_stable_model(const Program& p, const Model& m);

/// Stable models found by depth-first search over `order` (a permutation of
/// atom ids), branching true before false. Models therefore come out in
/// lexicographic order of their true-atom lists w.r.t. `order`.
std::vector<Model> stable_models(const Program& p, const std::vector<int>& order,
                                 std::size_t max_models = static_cast<std::size_t>(-1));

std::optional<Model> first_stable_model(const Program& p, const std::vector<int>& order);

}  // namespace larstream::asp

#endif  // LARSTREAM_ASP_HPP
