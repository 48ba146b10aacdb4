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

#include "transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

namespace larstream {

namespace {

class InprocChannel : public Channel {
public:
    void send(const WireEvent& ev) override {
        {
            std::lock_guard<std::mutex> lock(mu_);
            queue_.push_back(ev);
        }
        cv_.notify_one();
    }

    WireEvent recv() override {
        std::unique_lock<std::mutex> lock(mu_);
        cv_.wait(lock, [&] { return !queue_.empty(); });
        WireEvent ev = queue_.front();
        queue_.pop_front();
        return ev;
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<WireEvent> queue_;
};

struct Fd {
    int fd = -1;
    Fd() = default;
    explicit Fd(int f) : fd(f) {}
    Fd(Fd&& o) noexcept : fd(o.fd) { o.fd = -1; }
    ~Fd() {
        if (fd >= 0) close(fd);
    }
};

class TcpChannel : public Channel {
public:
    TcpChannel(int send_fd, int recv_fd) : send_fd_(send_fd), recv_fd_(recv_fd) {}

    void send(const WireEvent& ev) override {
        std::string line = ev.to_ndjson() + "\n";
        std::lock_guard<std::mutex> lock(mu_);
        std::size_t off = 0;
        while (off < line.size()) {
            ssize_t n = ::write(send_fd_.fd, line.data() + off, line.size() - off);
            if (n <= 0) throw Error("transport failure: write");
            off += static_cast<std::size_t>(n);
        }
    }

    WireEvent recv() override {
        for (;;) {
            std::size_t nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                std::string line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                if (!line.empty()) return WireEvent::from_ndjson(line);
                continue;
            }
            char chunk[4096];
            ssize_t n = ::read(recv_fd_.fd, chunk, sizeof chunk);
            if (n <= 0) throw Error("transport failure: connection closed");
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

private:
    Fd send_fd_, recv_fd_;
    std::mutex mu_;
    std::string buffer_;
};

sockaddr_in parse_address(const std::string& spec) {
    std::string host = "127.0.0.1";
    int port = 0;
    if (!spec.empty()) {
        auto colon = spec.rfind(':');
        if (colon == std::string::npos) throw Error("bad listen address '" + spec + "'");
        host = spec.substr(0, colon);
        port = std::stoi(spec.substr(colon + 1));
    }
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(port));
    if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
        throw Error("bad listen address '" + spec + "'");
    return addr;
}

void set_nodelay(int fd) {
    int one = 1;
    setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

}  // namespace

Fabric make_inproc_fabric(std::size_t edge_count) {
    Fabric f;
    for (std::size_t i = 0; i < edge_count; ++i)
        f.channels.push_back(std::make_unique<InprocChannel>());
    return f;
}

Fabric make_tcp_fabric(std::size_t edge_count, const std::string& listen_address) {
    int listener = socket(AF_INET, SOCK_STREAM, 0);
    if (listener < 0) throw Error("transport failure: socket");
    Fd guard(listener);
    int one = 1;
    setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr = parse_address(listen_address);
    if (bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
        throw Error("transport failure: bind " + listen_address);
    if (listen(listener, static_cast<int>(edge_count) + 1) != 0)
        throw Error("transport failure: listen");
    socklen_t len = sizeof addr;
    getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);

    // Accept one connection per edge; a hello line binds it to its edge id.
    std::vector<int> server_fd(edge_count, -1), client_fd(edge_count, -1);
    std::thread acceptor([&] {
        for (std::size_t i = 0; i < edge_count; ++i) {
            int fd = accept(listener, nullptr, nullptr);
            if (fd < 0) return;
            std::string hello;
            char c;
            while (read(fd, &c, 1) == 1 && c != '\n') hello += c;
            std::size_t edge = std::stoul(hello);
            set_nodelay(fd);
            server_fd[edge] = fd;
        }
    });
    for (std::size_t i = 0; i < edge_count; ++i) {
        int fd = socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) throw Error("transport failure: socket");
        if (connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
            close(fd);
            throw Error("transport failure: connect");
        }
        set_nodelay(fd);
        std::string hello = std::to_string(i) + "\n";
        if (write(fd, hello.data(), hello.size()) < 0) {
            close(fd);
            throw Error("transport failure: hello");
        }
        client_fd[i] = fd;
    }
    acceptor.join();

    Fabric f;
    for (std::size_t i = 0; i < edge_count; ++i) {
        if (server_fd[i] < 0 || client_fd[i] < 0) throw Error("transport failure: setup");
        // Sender writes on the client end; receiver reads the server end.
        f.channels.push_back(std::make_unique<TcpChannel>(client_fd[i], server_fd[i]));
    }
    return f;
}

}  // namespace larstream
