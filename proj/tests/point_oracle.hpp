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
//
// Independent evaluation of plain LARS directly on point streams. Test-only:
// this is the reference the interval implementation is judged against, so it
// deliberately shares no evaluation code with it.

#ifndef LARSTREAM_TESTS_POINT_ORACLE_HPP
#define LARSTREAM_TESTS_POINT_ORACLE_HPP

#include <vector>

#include "larstream/logic.hpp"

namespace larstream::oracle {

PointStream time_window_p(const PointStream& s, TimePoint t, std::int64_t n);
PointStream tuple_window_p(const PointStream& s, TimePoint t, std::int64_t n);

bool holds_p(const PointStream& s, TimePoint t, const StreamingAtom& phi);
bool body_holds_p(const PointStream& s, TimePoint t, const GroundRule& r);
bool is_model_p(const PointStream& s, TimePoint t, const GroundProgram& p);

bool is_answer_stream_p(const PointStream& data, const PointStream& candidate,
                        const GroundProgram& p, TimePoint t);

std::vector<PointStream> enumerate_answer_streams_p(const PointStream& data,
                                                    const GroundProgram& p, TimePoint t);

}  // namespace larstream::oracle

#endif  // LARSTREAM_TESTS_POINT_ORACLE_HPP
