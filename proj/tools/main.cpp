// cbf_teleop: headless runs, batch sweeps, the live server, verification and replay.
//
// Failures print one JSON line on stderr, {"error": KIND, "message": TEXT},
// and exit nonzero: 1 check or replay mismatch, 2 usage, 3 config, 4 I/O or log.

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <pthread.h>

#include <CLI11.hpp>

#include "cbf_teleop/batch.hpp"
#include "cbf_teleop/server.hpp"
#include "cbf_teleop/session.hpp"
#include "cbf_teleop/trial_log.hpp"
#include "cbf_teleop/verify.hpp"

using namespace cbf_teleop;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kUsage = 2, kConfig = 3, kIo = 4 };

int fail(Exit code, const char* kind, const std::string& message) {
    std::cerr << Json{{"error", kind}, {"message", message}}.dump() << '\n';
    return code;
}

std::string metrics_text(const HeadlessResult& r) {
    std::ostringstream os;
    os << "outcome=" << to_string(r.trial.phase) << " ticks=" << r.ticks << " min_h=" << r.min_h
       << " relaxed=" << r.relaxed_events;
    if (r.metrics) {
        os << " v_avg=" << r.metrics->v_avg << " t_collision=" << r.metrics->t_collision
           << " disagreement=" << r.metrics->disagreement << " duration=" << r.metrics->duration;
    }
    if (r.trial.failure_cause) os << " cause=" << *r.trial.failure_cause;
    if (r.log_path) os << " log=" << *r.log_path;
    return os.str();
}

struct RunArgs {
    std::string config;
    std::string condition;
    std::optional<std::uint64_t> seed;
    std::string op;
    std::string out;
};

int cmd_run(const RunArgs& a) {
    SessionConfig config;
    if (!a.config.empty()) config = load_session_config(a.config);
    if (!a.condition.empty()) {
        const auto c = condition_from_string(a.condition);
        if (!c) return fail(kUsage, "usage", "--condition must be one of na, hsc, sa, hsa");
        config.condition = *c;
    }
    if (a.seed) config.seed = *a.seed;
    if (!a.op.empty()) config.op = OperatorSpec::parse(a.op);
    if (config.op.kind == OperatorKind::Live) return fail(kUsage, "usage", "live operators need `serve`");
    if (!a.out.empty()) config.log_path = a.out;
    const HeadlessResult result = run_headless(config);
    std::cout << metrics_text(result) << '\n';
    return kOk;
}

int cmd_batch(const std::string& sweep_path, const std::string& out_dir, unsigned jobs) {
    const SweepSpec sweep = load_sweep(sweep_path);
    const BatchSummary summary = run_batch(sweep, jobs, out_dir);
    write_batch_outputs(summary, out_dir);
    write_tallies_csv(std::cout, summary.tallies);
    for (const PairComparison& c : summary.comparisons) {
        std::cout << c.a << " lower than " << c.b << " in " << c.a_lower_count << "/" << c.rows.size() << " pairs\n";
    }
    return kOk;
}

int cmd_serve(std::uint16_t port, const std::string& config_path, const std::string& log_dir,
              std::optional<double> tick_ms) {
    ServerOptions options;
    if (!config_path.empty()) options.defaults = load_session_config(config_path);
    options.port = port;
    options.log_dir = log_dir;
    if (tick_ms) options.tick_period = std::chrono::microseconds(static_cast<std::int64_t>(*tick_ms * 1000.0));

    // Block termination signals in every thread; this one waits for them.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    Server server(options);
    std::cout << "listening port=" << server.port() << std::endl;
    std::thread io([&] { server.run(); });
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
    io.join();
    return kOk;
}

int cmd_verify() {
    bool ok = true;
    for (const CheckResult& r : run_verification()) {
        std::cout << format_check(r) << std::endl;
        ok = ok && r.passed;
    }
    return ok ? kOk : fail(kCheckFailed, "check", "verification failed");
}

int cmd_replay(const std::string& log, const std::string& out) {
    const ReplayReport report = replay_log(log, out.empty() ? std::nullopt : std::optional<std::string>(out));
    std::cout << "logged_ticks=" << report.logged_ticks << " replayed_ticks=" << report.replayed_ticks
              << " logged_phase=" << to_string(report.logged_phase)
              << " replayed_phase=" << to_string(report.replayed_phase) << '\n';
    if (report.identical()) {
        std::cout << "replay identical\n";
        return kOk;
    }
    const std::string where =
        report.first_mismatch ? "state differs at tick " + std::to_string(*report.first_mismatch) : "trial end differs";
    return fail(kCheckFailed, "replay-mismatch", where);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CBF-filtered UAV teleoperation: simulation, batch studies and live sessions"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run one headless trial");
    run_cmd->add_option("--config", run.config, "Session config (JSON)")->check(CLI::ExistingFile);
    run_cmd->add_option("--condition", run.condition, "na | hsc | sa | hsa");
    run_cmd->add_option("--seed", run.seed, "Environment seed");
    run_cmd->add_option("--operator", run.op, "waypoint[:k=v,...] | force[:k=v,...] | replay:PATH");
    run_cmd->add_option("--out", run.out, "Trial log path (JSONL)");

    std::string sweep_path;
    std::string out_dir = "batch_out";
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    auto* batch_cmd = app.add_subcommand("batch", "Run a sweep of trials");
    batch_cmd->add_option("--sweep", sweep_path, "Sweep spec (JSON)")->required()->check(CLI::ExistingFile);
    batch_cmd->add_option("--out-dir", out_dir, "Output directory");
    batch_cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    std::uint16_t port = 8765;
    std::string serve_config;
    std::string log_dir = "logs";
    std::optional<double> tick_ms;
    auto* serve_cmd = app.add_subcommand("serve", "Serve live sessions over WebSocket");
    serve_cmd->add_option("--port", port, "TCP port (0 picks a free one)");
    serve_cmd->add_option("--config", serve_config, "Default session config (JSON)")->check(CLI::ExistingFile);
    serve_cmd->add_option("--log-dir", log_dir, "Directory for trial logs");
    serve_cmd->add_option("--tick-ms", tick_ms, "Wall-clock tick period override in ms")->check(CLI::PositiveNumber);

    auto* verify_cmd = app.add_subcommand("verify", "Run the oracle and property checks");

    std::string replay_log_path;
    std::string replay_out;
    auto* replay_cmd = app.add_subcommand("replay", "Re-run a logged trial and compare trajectories");
    replay_cmd->add_option("--log", replay_log_path, "Trial log")->required()->check(CLI::ExistingFile);
    replay_cmd->add_option("--out", replay_out, "Write the replayed log here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(kUsage, "usage", e.what());
    }

    try {
        if (*run_cmd) return cmd_run(run);
        if (*batch_cmd) return cmd_batch(sweep_path, out_dir, jobs);
        if (*serve_cmd) return cmd_serve(port, serve_config, log_dir, tick_ms);
        if (*verify_cmd) return cmd_verify();
        if (*replay_cmd) return cmd_replay(replay_log_path, replay_out);
    } catch (const UsageError& e) {
        return fail(kUsage, "usage", e.what());
    } catch (const ConfigError& e) {
        return fail(kConfig, "config", e.what());
    } catch (const OvercrowdedError& e) {
        return fail(kConfig, "config", e.what());
    } catch (const LogError& e) {
        return fail(kIo, "log", e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(kIo, "io", e.what());
    } catch (const std::exception& e) {
        return fail(kCheckFailed, "runtime", e.what());
    }
    return kOk;
}
