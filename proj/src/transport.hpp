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

#ifndef LARSTREAM_SRC_TRANSPORT_HPP
#define LARSTREAM_SRC_TRANSPORT_HPP

#include <memory>
#include <string>
#include <vector>

#include "larstream/runtime.hpp"

namespace larstream {

/// Ordered, reliable FIFO carrying wire events between two endpoints.
class Channel {
public:
    virtual ~Channel() = default;
    virtual void send(const WireEvent& ev) = 0;
    virtual WireEvent recv() = 0;  // blocks; the final event is eos
};

/// One channel per topology edge, same indexing as Topology::edges.
struct Fabric {
    std::vector<std::unique_ptr<Channel>> channels;
};

Fabric make_inproc_fabric(std::size_t edge_count);

/// Loopback TCP fabric: the master binds `listen_address` (host:port, port 0
/// picks one) and accepts one connection per edge; NDJSON lines travel over
/// the sockets.
Fabric make_tcp_fabric(std::size_t edge_count, const std::string& listen_address);

}  // namespace larstream

#endif  // LARSTREAM_SRC_TRANSPORT_HPP
