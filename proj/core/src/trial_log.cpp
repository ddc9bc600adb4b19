#include "cbf_teleop/trial_log.hpp"

namespace cbf_teleop {

namespace {

template <typename T, typename F>
T parse_enum(const Json& j, F from_string, const char* what) {
    const auto value = from_string(j.get<std::string>());
    if (!value) throw std::invalid_argument(std::string("unknown ") + what);
    return *value;
}

}  // namespace

Json to_json(const StepRecord& r) {
    Json j;
    j["kind"] = "step";
    j["tick"] = r.tick;
    j["t"] = r.t;
    j["x1"] = vec_to_json(r.x1);
    j["x2"] = vec_to_json(r.x2);
    j["yaw"] = r.yaw;
    j["stylus"] = vec_to_json(r.command.stylus);
    j["yaw_input"] = static_cast<int>(r.command.yaw_input);
    j["inspect"] = r.command.inspect_pressed;
    j["u_ref"] = vec_to_json(r.u_ref.u);
    j["u_cbf"] = vec_to_json(r.u_cbf.u);
    j["u_applied"] = vec_to_json(r.u_applied.u);
    j["force"] = vec_to_json(r.force);
    j["h_min"] = r.h_min;
    j["in_contact"] = r.in_contact;
    j["qp_status"] = to_string(r.qp_status);
    j["condition"] = to_string(r.condition);
    j["phase"] = to_string(r.phase);
    return j;
}

StepRecord step_record_from_json(const Json& j) {
    StepRecord r;
    r.tick = j.at("tick").get<std::uint64_t>();
    r.t = j.at("t").get<double>();
    r.x1 = vec_from_json(j.at("x1"));
    r.x2 = vec_from_json(j.at("x2"));
    r.yaw = j.at("yaw").get<double>();
    r.command.stylus = vec_from_json(j.at("stylus"));
    const int yaw_input = j.at("yaw_input").get<int>();
    if (yaw_input < -1 || yaw_input > 1) throw std::invalid_argument("yaw_input out of range");
    r.command.yaw_input = static_cast<YawInput>(yaw_input);
    r.command.inspect_pressed = j.at("inspect").get<bool>();
    r.u_ref.u = vec_from_json(j.at("u_ref"));
    r.u_cbf.u = vec_from_json(j.at("u_cbf"));
    r.u_applied.u = vec_from_json(j.at("u_applied"));
    r.force = vec_from_json(j.at("force"));
    r.h_min = j.at("h_min").get<double>();
    r.in_contact = j.at("in_contact").get<bool>();
    r.qp_status = parse_enum<QpStatus>(j.at("qp_status"), qp_status_from_string, "qp_status");
    r.condition = parse_enum<Condition>(j.at("condition"), condition_from_string, "condition");
    r.phase = parse_enum<TrialPhase>(j.at("phase"), trial_phase_from_string, "phase");
    return r;
}

Json to_json(const Metrics& m) {
    Json j;
    j["v_avg"] = m.v_avg;
    j["t_collision"] = m.t_collision;
    j["disagreement"] = m.disagreement;
    j["duration"] = m.duration;
    j["outcome"] = to_string(m.outcome);
    j["failure_cause"] = m.failure_cause ? Json(*m.failure_cause) : Json(nullptr);
    j["excluded_from_performance"] = m.excluded_from_performance;
    return j;
}

Metrics metrics_from_json(const Json& j) {
    Metrics m;
    m.v_avg = j.at("v_avg").get<double>();
    m.t_collision = j.at("t_collision").get<double>();
    m.disagreement = j.at("disagreement").get<double>();
    m.duration = j.at("duration").get<double>();
    m.outcome = parse_enum<TrialPhase>(j.at("outcome"), trial_phase_from_string, "outcome");
    if (!j.at("failure_cause").is_null()) m.failure_cause = j.at("failure_cause").get<std::string>();
    m.excluded_from_performance = j.at("excluded_from_performance").get<bool>();
    return m;
}

TrialLogWriter::TrialLogWriter(const std::filesystem::path& path, const Json& header) : out_(path), path_(path) {
    if (!out_) throw LogError("cannot write " + path.string(), 0);
    Json line;
    line["kind"] = "header";
    line["format"] = kLogFormat;
    line["version"] = kLogVersion;
    for (auto it = header.begin(); it != header.end(); ++it) line[it.key()] = it.value();
    out_ << line.dump() << '\n';
}

void TrialLogWriter::step(const StepRecord& record) { out_ << to_json(record).dump() << '\n'; }

void TrialLogWriter::event(const LogEvent& event) {
    Json j;
    j["kind"] = "event";
    j["event"] = event.name;
    j["tick"] = event.tick;
    j["detail"] = event.detail;
    out_ << j.dump() << '\n';
}

void TrialLogWriter::end(const LogEnd& end) {
    Json j;
    j["kind"] = "end";
    j["phase"] = to_string(end.phase);
    j["metrics"] = end.metrics ? to_json(*end.metrics) : Json(nullptr);
    j["note"] = end.note ? Json(*end.note) : Json(nullptr);
    out_ << j.dump() << '\n';
    out_.flush();
    if (!out_) throw LogError("write failed for " + path_.string(), 0);
}

void write_log(const TrialLog& log, const std::filesystem::path& path) {
    TrialLogWriter writer(path, log.header);
    std::size_t next_event = 0;
    for (const StepRecord& r : log.records) {
        while (next_event < log.events.size() && log.events[next_event].tick <= r.tick)
            writer.event(log.events[next_event++]);
        writer.step(r);
    }
    while (next_event < log.events.size()) writer.event(log.events[next_event++]);
    if (log.end) writer.end(*log.end);
}

TrialLog read_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LogError("cannot open " + path.string(), 0);
    TrialLog log;
    std::string text;
    std::size_t line = 0;
    bool have_header = false;
    while (std::getline(in, text)) {
        ++line;
        if (log.end) throw LogError("content after end trailer", line);
        Json j;
        try {
            j = Json::parse(text);
        } catch (const nlohmann::json::parse_error&) {
            throw LogError("malformed JSON", line);
        }
        try {
            const std::string kind = j.at("kind").get<std::string>();
            if (!have_header) {
                if (kind != "header") throw LogError("first line is not a header", line);
                if (j.at("format").get<std::string>() != kLogFormat || j.at("version").get<int>() != kLogVersion)
                    throw LogError("version mismatch: expected " + std::string(kLogFormat) + " v" +
                                       std::to_string(kLogVersion),
                                   line);
                j.erase("kind");
                j.erase("format");
                j.erase("version");
                log.header = std::move(j);
                have_header = true;
            } else if (kind == "step") {
                log.records.push_back(step_record_from_json(j));
            } else if (kind == "event") {
                log.events.push_back({j.at("event").get<std::string>(), j.at("tick").get<std::uint64_t>(),
                                      j.at("detail")});
            } else if (kind == "end") {
                LogEnd end;
                end.phase = parse_enum<TrialPhase>(j.at("phase"), trial_phase_from_string, "phase");
                if (!j.at("metrics").is_null()) end.metrics = metrics_from_json(j.at("metrics"));
                if (!j.at("note").is_null()) end.note = j.at("note").get<std::string>();
                log.end = std::move(end);
            } else {
                throw LogError("unknown line kind '" + kind + "'", line);
            }
        } catch (const LogError&) {
            throw;
        } catch (const std::exception& e) {
            throw LogError(std::string("malformed record: ") + e.what(), line);
        }
    }
    if (!have_header) throw LogError("empty log", 0);
    if (!log.end) throw LogError("truncated log: missing end trailer after line " + std::to_string(line), line);
    return log;
}

Json make_log_header(const SessionConfig& config, const Environment& env) {
    Json h;
    h["condition"] = to_string(config.condition);
    h["seed"] = config.seed;
    h["config"] = to_json(config);
    // Where the log lives is not part of the trial; two runs of the same
    // config must produce the same bytes wherever they are written.
    h["config"].erase("log");
    h["environment"] = to_json(env);
    return h;
}

}  // namespace cbf_teleop
