#include "cbf_teleop/wire.hpp"

#include "cbf_teleop/trial_log.hpp"
#include "json_fields.hpp"

namespace cbf_teleop::wire {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Json envelope(const char* type) {
    Json j;
    j["v"] = kProtocolVersion;
    j["type"] = type;
    return j;
}

// Validates the envelope and returns the type tag.
std::string open_envelope(std::string_view text, Json& doc) {
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw WireError("malformed", e.what());
    }
    if (!doc.is_object()) throw WireError("malformed", "expected a JSON object");
    const auto v = doc.find("v");
    if (v == doc.end() || !v->is_string()) throw WireError("version", "missing protocol version");
    if (v->get<std::string>() != kProtocolVersion)
        throw WireError("version", "expected " + std::string(kProtocolVersion) + ", got " + v->get<std::string>());
    const auto type = doc.find("type");
    if (type == doc.end() || !type->is_string()) throw WireError("malformed", "missing type");
    return type->get<std::string>();
}

// Runs a body parser, mapping field errors to a malformed-message error.
template <typename F>
auto parse_body(const std::string& type, F&& body) {
    try {
        return body();
    } catch (const WireError&) {
        throw;
    } catch (const std::exception& e) {
        throw WireError("malformed", type + ": " + e.what());
    }
}

Vec2 vec(detail::Fields& f, const char* key) {
    Json j = nullptr;
    f.get(key, j);
    if (j.is_null()) throw ConfigError(std::string("missing ") + key);
    return vec_from_json(j);
}

template <typename T>
T required(detail::Fields& f, const char* key) {
    Json j = nullptr;
    f.get(key, j);
    if (j.is_null()) throw ConfigError(std::string("missing ") + key);
    return j.get<T>();
}

template <typename E, typename F>
E parse_tag(const std::string& text, F from_string, const char* what) {
    const auto value = from_string(text);
    if (!value) throw ConfigError(std::string("unknown ") + what + " '" + text + "'");
    return *value;
}

}  // namespace

std::string encode(const ClientMessage& message) {
    return std::visit(
        overloaded{
            [](const Input& m) {
                Json j = envelope("input");
                j["seq"] = m.seq;
                j["stylus"] = vec_to_json(m.stylus);
                j["yaw_input"] = static_cast<int>(m.yaw_input);
                j["inspect"] = m.inspect;
                return j.dump();
            },
            [](const StartTrial& m) {
                Json j = envelope("start_trial");
                j["condition"] = to_string(m.condition);
                j["seed"] = m.seed;
                return j.dump();
            },
            [](const Abort&) { return envelope("abort").dump(); },
        },
        message);
}

std::string encode(const ServerMessage& message) {
    return std::visit(
        overloaded{
            [](const State& m) {
                Json j = envelope("state");
                j["tick"] = m.tick;
                j["t"] = m.t;
                j["x1"] = vec_to_json(m.x1);
                j["x2"] = vec_to_json(m.x2);
                j["yaw"] = m.yaw;
                j["u_ref"] = vec_to_json(m.u_ref);
                j["u_cbf"] = vec_to_json(m.u_cbf);
                j["u_applied"] = vec_to_json(m.u_applied);
                j["force"] = vec_to_json(m.force);
                j["h_min"] = m.h_min;
                Json targets = Json::array();
                for (const TargetStatus& t : m.targets) {
                    targets.push_back({{"center", vec_to_json(t.center)}, {"radius", t.radius}, {"inspected", t.inspected}});
                }
                j["targets"] = std::move(targets);
                j["phase"] = to_string(m.phase);
                return j.dump();
            },
            [](const TrialEnd& m) {
                Json j = envelope("trial_end");
                j["outcome"] = to_string(m.outcome);
                j["metrics"] = m.metrics ? to_json(*m.metrics) : Json(nullptr);
                j["note"] = m.note ? Json(*m.note) : Json(nullptr);
                return j.dump();
            },
            [](const Error& m) {
                Json j = envelope("error");
                j["reason"] = m.reason;
                j["detail"] = m.detail;
                return j.dump();
            },
            [](const World& m) {
                Json j = envelope("world");
                j["condition"] = to_string(m.condition);
                j["seed"] = m.seed;
                j["dt"] = m.dt;
                j["environment"] = to_json(m.environment);
                return j.dump();
            },
        },
        message);
}

ClientMessage decode_client(std::string_view text) {
    Json doc;
    const std::string type = open_envelope(text, doc);
    return parse_body(type, [&]() -> ClientMessage {
        detail::Fields f(doc, type);
        f.allow("v");
        f.allow("type");
        if (type == "input") {
            Input m;
            m.seq = required<std::uint64_t>(f, "seq");
            m.stylus = vec(f, "stylus");
            const int yaw = required<int>(f, "yaw_input");
            if (yaw < -1 || yaw > 1) throw ConfigError("yaw_input must be -1, 0 or 1");
            m.yaw_input = static_cast<YawInput>(yaw);
            m.inspect = required<bool>(f, "inspect");
            if (!all_finite(m.stylus)) throw ConfigError("stylus must be finite");
            f.finish();
            return m;
        }
        if (type == "start_trial") {
            StartTrial m;
            m.condition = parse_tag<Condition>(required<std::string>(f, "condition"), condition_from_string, "condition");
            m.seed = required<std::uint64_t>(f, "seed");
            f.finish();
            return m;
        }
        if (type == "abort") {
            f.finish();
            return Abort{};
        }
        throw WireError("unknown-type", "unknown message type '" + type + "'");
    });
}

ServerMessage decode_server(std::string_view text) {
    Json doc;
    const std::string type = open_envelope(text, doc);
    return parse_body(type, [&]() -> ServerMessage {
        detail::Fields f(doc, type);
        f.allow("v");
        f.allow("type");
        if (type == "state") {
            State m;
            m.tick = required<std::uint64_t>(f, "tick");
            m.t = required<double>(f, "t");
            m.x1 = vec(f, "x1");
            m.x2 = vec(f, "x2");
            m.yaw = required<double>(f, "yaw");
            m.u_ref = vec(f, "u_ref");
            m.u_cbf = vec(f, "u_cbf");
            m.u_applied = vec(f, "u_applied");
            m.force = vec(f, "force");
            m.h_min = required<double>(f, "h_min");
            for (const Json& item : required<Json>(f, "targets")) {
                detail::Fields tf(item, "targets");
                TargetStatus t;
                t.center = vec(tf, "center");
                t.radius = required<double>(tf, "radius");
                t.inspected = required<bool>(tf, "inspected");
                tf.finish();
                m.targets.push_back(t);
            }
            m.phase = parse_tag<TrialPhase>(required<std::string>(f, "phase"), trial_phase_from_string, "phase");
            f.finish();
            return m;
        }
        if (type == "trial_end") {
            TrialEnd m;
            m.outcome = parse_tag<TrialPhase>(required<std::string>(f, "outcome"), trial_phase_from_string, "outcome");
            Json metrics = nullptr;
            Json note = nullptr;
            f.get("metrics", metrics);
            f.get("note", note);
            if (!metrics.is_null()) m.metrics = metrics_from_json(metrics);
            if (!note.is_null()) m.note = note.get<std::string>();
            f.finish();
            return m;
        }
        if (type == "error") {
            Error m;
            m.reason = required<std::string>(f, "reason");
            f.get("detail", m.detail);
            f.finish();
            return m;
        }
        if (type == "world") {
            World m;
            m.condition = parse_tag<Condition>(required<std::string>(f, "condition"), condition_from_string, "condition");
            m.seed = required<std::uint64_t>(f, "seed");
            m.dt = required<double>(f, "dt");
            m.environment = environment_from_json(required<Json>(f, "environment"));
            f.finish();
            return m;
        }
        throw WireError("unknown-type", "unknown message type '" + type + "'");
    });
}

State make_state(const StepRecord& r, const Environment& env, const TrialState& trial) {
    State s;
    s.tick = r.tick;
    s.t = r.t;
    s.x1 = r.x1;
    s.x2 = r.x2;
    s.yaw = r.yaw;
    s.u_ref = r.u_ref.u;
    s.u_cbf = r.u_cbf.u;
    s.u_applied = r.u_applied.u;
    s.force = r.force;
    s.h_min = r.h_min;
    s.phase = r.phase;
    for (std::size_t i = 0; i < env.targets.size(); ++i) {
        s.targets.push_back({env.targets[i].center, env.targets[i].radius,
                             i < trial.inspected.size() && trial.inspected[i]});
    }
    return s;
}

}  // namespace cbf_teleop::wire
