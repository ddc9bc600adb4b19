#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "cbf_teleop/config.hpp"

namespace cbf_teleop {

struct ServerOptions {
    SessionConfig defaults;          // condition and seed come from StartTrial
    std::string address = "127.0.0.1";
    std::uint16_t port = 0;          // 0 picks a free port
    std::filesystem::path log_dir = "logs";
    /// Wall-clock tick period; defaults to dynamics.dt.
    std::optional<std::chrono::microseconds> tick_period;
    /// Ticks the loop may fall behind and catch up before the trial aborts.
    int max_missed_ticks = 5;
};

/// WebSocket server speaking cbf-teleop/1. One session per connection, each
/// on its own strand; ticks run at wall-clock rate with catch-up. Logs match
/// the headless format, one file per trial under log_dir.
class Server {
public:
    explicit Server(ServerOptions options);  // binds and listens
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    std::uint16_t port() const;

    /// Serves until stop(); blocks the calling thread.
    void run();
    /// Thread-safe. Aborts live trials (logged as aborted) and returns run().
    void stop();

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

}  // namespace cbf_teleop
