#include "cbf_teleop/server.hpp"

#include <atomic>
#include <cmath>
#include <deque>
#include <mutex>
#include <vector>

#include <boost/asio/steady_timer.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "cbf_teleop/session.hpp"
#include "cbf_teleop/trial_log.hpp"
#include "cbf_teleop/wire.hpp"

namespace cbf_teleop {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using Clock = std::chrono::steady_clock;

namespace {

struct Shared {
    ServerOptions options;
    std::chrono::microseconds period{};
    std::atomic<std::uint64_t> trial_counter{0};

    std::filesystem::path next_log_path(const SessionConfig& c) {
        for (;;) {
            const std::uint64_t n = trial_counter++;
            auto path = options.log_dir / ("live_" + std::string(to_string(c.condition)) + "_seed" +
                                           std::to_string(c.seed) + "_" + std::to_string(n) + ".jsonl");
            if (!std::filesystem::exists(path)) return path;
        }
    }
};

class Connection : public std::enable_shared_from_this<Connection> {
public:
    Connection(tcp::socket&& socket, std::shared_ptr<Shared> shared)
        : ws_(std::move(socket)), timer_(ws_.get_executor()), shared_(std::move(shared)) {}

    ~Connection() {
        if (session_ && writer_) {
            session_->abort("server shutdown");
            writer_->end(session_->log_end());
        }
    }

    void start() {
        net::dispatch(ws_.get_executor(), [self = shared_from_this()] {
            self->ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
            self->ws_.async_accept(beast::bind_front_handler(&Connection::on_accept, self));
        });
    }

    void shutdown() {
        net::dispatch(ws_.get_executor(), [self = shared_from_this()] {
            if (self->session_) {
                self->session_->abort("server shutdown");
                self->finish_trial();
            }
            if (self->accepted_) {
                self->close_after_flush();
            } else {
                beast::error_code ec;
                beast::get_lowest_layer(self->ws_).socket().close(ec);
            }
        });
    }

private:
    void on_accept(beast::error_code ec) {
        if (ec) return;
        accepted_ = true;
        ws_.text(true);
        do_read();
    }

    void do_read() {
        ws_.async_read(buffer_, beast::bind_front_handler(&Connection::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) {
            on_disconnect();
            return;
        }
        const std::string text = beast::buffers_to_string(buffer_.data());
        buffer_.consume(buffer_.size());
        handle(text);
        if (!closing_) do_read();
    }

    void handle(const std::string& text) {
        wire::ClientMessage message;
        try {
            message = wire::decode_client(text);
        } catch (const wire::WireError& e) {
            if (session_) {
                session_->abort("protocol error: " + e.reason());
                write_end();
            }
            send(wire::Error{e.reason(), e.what()});
            close_after_flush();
            return;
        }
        if (const auto* input = std::get_if<wire::Input>(&message)) {
            if (last_seq_ && input->seq < *last_seq_) return;  // stale
            last_seq_ = input->seq;
            held_ = OperatorCommand{input->stylus, input->yaw_input, false};
            inspect_pending_ = inspect_pending_ || input->inspect;
        } else if (const auto* start = std::get_if<wire::StartTrial>(&message)) {
            if (session_) {
                send(wire::Error{"state", "a trial is already running"});
                return;
            }
            start_trial(*start);
        } else {
            if (!session_) {
                send(wire::Error{"state", "no trial running"});
                return;
            }
            session_->abort("client abort");
            finish_trial();
        }
    }

    void start_trial(const wire::StartTrial& m) {
        SessionConfig config = shared_->options.defaults;
        config.condition = m.condition;
        config.seed = m.seed;
        config.op = OperatorSpec{};
        config.op.kind = OperatorKind::Live;
        try {
            config.log_path = shared_->next_log_path(config).string();
            Environment env = build_environment(config);
            session_ = std::make_unique<Session>(config, std::move(env));
            writer_.emplace(*config.log_path, make_log_header(config, session_->environment()));
        } catch (const std::exception& e) {
            session_.reset();
            writer_.reset();
            send(wire::Error{"config", e.what()});
            return;
        }
        held_ = OperatorCommand{};
        inspect_pending_ = false;
        send(wire::World{config.condition, config.seed, config.dynamics.dt, session_->environment()});
        t0_ = Clock::now();
        ticks_done_ = 0;
        ++generation_;
        schedule();
    }

    void schedule() {
        timer_.expires_at(t0_ + shared_->period * static_cast<std::int64_t>(ticks_done_));
        timer_.async_wait(
            [self = shared_from_this(), gen = generation_](beast::error_code ec) { self->on_timer(ec, gen); });
    }

    void on_timer(beast::error_code ec, std::uint64_t gen) {
        if (ec || gen != generation_ || !session_) return;
        const auto elapsed = std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - t0_);
        const std::uint64_t due = static_cast<std::uint64_t>(elapsed / shared_->period) + 1;
        const std::uint64_t behind = due > ticks_done_ ? due - ticks_done_ : 0;
        if (behind > 1 + static_cast<std::uint64_t>(shared_->options.max_missed_ticks)) {
            const std::string why = "tick loop fell " + std::to_string(behind - 1) + " ticks behind";
            session_->abort("overrun: " + why);
            send(wire::Error{"overrun", why});
            finish_trial();
            return;
        }
        for (std::uint64_t i = 0; i < behind && !session_->ended(); ++i) run_tick();
        if (session_->ended()) {
            finish_trial();
        } else {
            schedule();
        }
    }

    void run_tick() {
        OperatorCommand command = held_;
        command.inspect_pressed = inspect_pending_;
        inspect_pending_ = false;
        const TickOutput out = session_->tick(command);
        for (const LogEvent& e : out.events) writer_->event(e);
        writer_->step(out.record);
        send(wire::make_state(out.record, session_->environment(), session_->trial()));
        ++ticks_done_;
    }

    void write_end() {
        if (writer_) writer_->end(session_->log_end());
        writer_.reset();
        session_.reset();
        ++generation_;
        timer_.cancel();
    }

    void finish_trial() {
        const LogEnd end = session_->log_end();
        write_end();
        send(wire::TrialEnd{end.phase, end.metrics, end.note});
    }

    void on_disconnect() {
        closing_ = true;
        if (session_) {
            session_->abort("disconnect");
            write_end();
        }
    }

    void send(const wire::ServerMessage& message) {
        if (closing_ && !close_pending_) return;
        outbox_.push_back(wire::encode(message));
        if (outbox_.size() == 1) do_write();
    }

    void do_write() {
        ws_.async_write(net::buffer(outbox_.front()),
                        beast::bind_front_handler(&Connection::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t) {
        if (ec) {
            outbox_.clear();
            return;
        }
        outbox_.pop_front();
        if (!outbox_.empty()) {
            do_write();
        } else if (close_pending_) {
            do_close();
        }
    }

    void close_after_flush() {
        if (close_pending_) return;
        closing_ = true;
        close_pending_ = true;
        if (outbox_.empty()) do_close();
    }

    void do_close() {
        ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
    }

    websocket::stream<beast::tcp_stream> ws_;
    net::steady_timer timer_;
    std::shared_ptr<Shared> shared_;
    beast::flat_buffer buffer_;
    std::deque<std::string> outbox_;
    bool accepted_ = false;
    bool closing_ = false;
    bool close_pending_ = false;

    std::unique_ptr<Session> session_;
    std::optional<TrialLogWriter> writer_;
    OperatorCommand held_;
    bool inspect_pending_ = false;
    std::optional<std::uint64_t> last_seq_;
    Clock::time_point t0_;
    std::uint64_t ticks_done_ = 0;
    std::uint64_t generation_ = 0;
};

}  // namespace

struct Server::Impl : std::enable_shared_from_this<Server::Impl> {
    net::io_context ioc;
    tcp::acceptor acceptor{ioc};
    std::shared_ptr<Shared> shared = std::make_shared<Shared>();
    std::mutex mutex;
    std::vector<std::weak_ptr<Connection>> connections;
    net::steady_timer deadline{ioc};

    // Returns run() once every connection is gone, or at the deadline for
    // clients that never answer the close handshake.
    void wait_for_drain(Clock::time_point until) {
        bool any = false;
        {
            std::lock_guard lock(mutex);
            for (const auto& w : connections) any = any || !w.expired();
        }
        if (!any || Clock::now() >= until) {
            ioc.stop();
            return;
        }
        deadline.expires_after(std::chrono::milliseconds(20));
        deadline.async_wait([self = shared_from_this(), until](beast::error_code ec) {
            if (!ec) self->wait_for_drain(until);
        });
    }

    void do_accept() {
        acceptor.async_accept(net::make_strand(ioc), [self = shared_from_this()](beast::error_code ec, tcp::socket s) {
            if (ec) return;
            auto connection = std::make_shared<Connection>(std::move(s), self->shared);
            {
                std::lock_guard lock(self->mutex);
                std::erase_if(self->connections, [](const auto& w) { return w.expired(); });
                self->connections.push_back(connection);
            }
            connection->start();
            self->do_accept();
        });
    }
};

Server::Server(ServerOptions options) : impl_(std::make_shared<Impl>()) {
    options.defaults.validate();
    if (options.max_missed_ticks < 0) throw ConfigError("server: max_missed_ticks must be >= 0");
    impl_->shared->period = options.tick_period.value_or(
        std::chrono::microseconds(std::llround(options.defaults.dynamics.dt * 1e6)));
    if (impl_->shared->period.count() <= 0) throw ConfigError("server: tick period must be positive");
    std::filesystem::create_directories(options.log_dir);
    impl_->shared->options = std::move(options);

    const ServerOptions& o = impl_->shared->options;
    const tcp::endpoint endpoint(net::ip::make_address(o.address), o.port);
    impl_->acceptor.open(endpoint.protocol());
    impl_->acceptor.set_option(net::socket_base::reuse_address(true));
    impl_->acceptor.bind(endpoint);
    impl_->acceptor.listen(net::socket_base::max_listen_connections);
    impl_->do_accept();
}

Server::~Server() {
    stop();
}

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run() { impl_->ioc.run(); }

void Server::stop() {
    net::post(impl_->ioc, [impl = impl_] {
        beast::error_code ec;
        impl->acceptor.close(ec);
        std::vector<std::shared_ptr<Connection>> live;
        {
            std::lock_guard lock(impl->mutex);
            for (const auto& w : impl->connections) {
                if (auto c = w.lock()) live.push_back(std::move(c));
            }
        }
        for (const auto& c : live) c->shutdown();
        impl->wait_for_drain(Clock::now() + std::chrono::seconds(2));
    });
}

}  // namespace cbf_teleop
