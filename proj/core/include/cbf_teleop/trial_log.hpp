#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbf_teleop/config.hpp"
#include "cbf_teleop/metrics.hpp"

namespace cbf_teleop {

inline constexpr const char* kLogFormat = "cbf-teleop-log";
inline constexpr int kLogVersion = 1;

/// Out-of-band occurrences logged between step lines.
struct LogEvent {
    std::string name;  // e.g. "safety-relaxed", "inspection-rejected"
    std::uint64_t tick = 0;
    Json detail;

    bool operator==(const LogEvent&) const = default;
};

struct LogEnd {
    TrialPhase phase = TrialPhase::Idle;
    std::optional<Metrics> metrics;
    std::optional<std::string> note;
};

/// A parsed log: header (format/version stripped), steps, events, trailer.
struct TrialLog {
    Json header;  // {"condition", "seed", "config", "environment"}
    std::vector<StepRecord> records;
    std::vector<LogEvent> events;
    std::optional<LogEnd> end;
};

class LogError : public std::runtime_error {
public:
    LogError(const std::string& what, std::size_t line)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Line-delimited JSON. Line 1 is the header, then one object per step or
/// event, then an "end" trailer. Doubles are printed in shortest round-trip
/// form, so read_log(write_log(x)) reproduces every numeric field exactly.
class TrialLogWriter {
public:
    TrialLogWriter(const std::filesystem::path& path, const Json& header);
    void step(const StepRecord& record);
    void event(const LogEvent& event);
    void end(const LogEnd& end);

private:
    std::ofstream out_;
    std::filesystem::path path_;
};

Json to_json(const StepRecord& record);
StepRecord step_record_from_json(const Json& j);
Json to_json(const Metrics& metrics);
Metrics metrics_from_json(const Json& j);

void write_log(const TrialLog& log, const std::filesystem::path& path);

/// Throws LogError on a version mismatch, a malformed line (with its line
/// number) or a missing trailer.
TrialLog read_log(const std::filesystem::path& path);

/// Builds a standard header from the session config and its environment.
Json make_log_header(const SessionConfig& config, const Environment& env);

}  // namespace cbf_teleop
