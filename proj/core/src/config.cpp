#include "cbf_teleop/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json_fields.hpp"

namespace cbf_teleop {

namespace {

double parse_number(std::string_view key, std::string_view value) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw ConfigError("operator: bad value for '" + std::string(key) + "': '" + std::string(value) + "'");
    return out;
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

Json vec_to_json(const Vec2& v) { return Json::array({v.x(), v.y()}); }

Vec2 vec_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ConfigError("expected a 2-element numeric array");
    return {j[0].get<double>(), j[1].get<double>()};
}

OperatorSpec OperatorSpec::parse(std::string_view text) {
    OperatorSpec spec;
    const auto colon = text.find(':');
    const std::string_view head = text.substr(0, colon);
    const std::string_view rest = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
    if (head == "replay") {
        if (rest.empty()) throw ConfigError("operator: replay needs a log path (replay:PATH)");
        spec.kind = OperatorKind::Replay;
        spec.replay_path = std::string(rest);
        return spec;
    }
    if (head == "waypoint") {
        spec.kind = OperatorKind::Waypoint;
    } else if (head == "force") {
        spec.kind = OperatorKind::ForceFollowing;
        spec.params.alpha_force = 2.0;
    } else if (head == "live") {
        spec.kind = OperatorKind::Live;
    } else {
        throw ConfigError("operator: unknown kind '" + std::string(head) + "'");
    }
    std::string_view remaining = rest;
    while (!remaining.empty()) {
        const auto comma = remaining.find(',');
        const std::string_view item = remaining.substr(0, comma);
        remaining = comma == std::string_view::npos ? std::string_view{} : remaining.substr(comma + 1);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) throw ConfigError("operator: expected key=value, got '" + std::string(item) + "'");
        const std::string_view key = item.substr(0, eq);
        const double value = parse_number(key, item.substr(eq + 1));
        OperatorParams& p = spec.params;
        if (key == "aggr") p.aggressiveness = value;
        else if (key == "alpha") p.alpha_force = value;
        else if (key == "tau") p.admittance_tau = value;
        else if (key == "cruise") p.cruise_speed = value;
        else if (key == "gain_p") p.gain_p = value;
        else if (key == "tol") p.waypoint_tolerance = value;
        else if (key == "approach") p.approach_gain = value;
        else if (key == "hover") p.hover_speed_max = value;
        else if (key == "latency") p.latency_ticks = static_cast<int>(value);
        else throw ConfigError("operator: unknown key '" + std::string(key) + "'");
    }
    if (spec.kind == OperatorKind::Waypoint && spec.params.alpha_force != 0.0)
        throw ConfigError("operator: waypoint ignores force; use force:alpha=...");
    if (!spec.params.valid()) throw ConfigError("operator: parameters out of range");
    return spec;
}

std::string OperatorSpec::to_text() const {
    std::ostringstream out;
    out.precision(17);
    switch (kind) {
        case OperatorKind::Replay: return "replay:" + replay_path;
        case OperatorKind::Live: out << "live"; break;
        case OperatorKind::Waypoint: out << "waypoint"; break;
        case OperatorKind::ForceFollowing: out << "force"; break;
    }
    const OperatorParams& p = params;
    out << ":aggr=" << p.aggressiveness;
    if (kind == OperatorKind::ForceFollowing) out << ",alpha=" << p.alpha_force << ",tau=" << p.admittance_tau;
    out << ",cruise=" << p.cruise_speed << ",gain_p=" << p.gain_p << ",tol=" << p.waypoint_tolerance
        << ",approach=" << p.approach_gain << ",hover=" << p.hover_speed_max << ",latency=" << p.latency_ticks;
    return out.str();
}

void SessionConfig::validate() const {
    environment.validate();
    if (!dynamics.valid()) throw ConfigError("dynamics: require dt > 0, u_max > 0, yaw_rate > 0");
    if (!input_map.valid()) throw ConfigError("input_map: require kv > 0 and 0 <= deadzone < stylus_max");
    if (const GainCheck check = validate_gains(gains); !check.ok) throw ConfigError("gains: " + check.message);
    if (!paradigm.valid()) throw ConfigError("paradigm: require kf >= 0 and f_max > 0");
    if (!(trial.crash_depth >= 0.0 && trial.hover_speed_max >= 0.0))
        throw ConfigError("trial: crash_depth and hover_speed_max must be >= 0");
    if (!(filter.cull_radius >= 0.0 && filter.relax_penalty > 0.0))
        throw ConfigError("filter: require cull_radius >= 0 and relax_penalty > 0");
    if (tick_cap == 0) throw ConfigError("tick_cap must be > 0");
    if (!op.params.valid()) throw ConfigError("operator: parameters out of range");
}

SessionConfig session_config_from_json(const Json& doc) {
    SessionConfig c;
    detail::Fields top(doc, "config");

    std::string condition = to_string(c.condition);
    top.get("condition", condition);
    const auto parsed = condition_from_string(condition);
    if (!parsed) throw ConfigError("config.condition: unknown condition '" + condition + "'");
    c.condition = *parsed;
    top.get("seed", c.seed);
    top.get("tick_cap", c.tick_cap);

    if (const Json* j = top.child("environment")) {
        detail::Fields f(*j, top.path("environment"));
        EnvironmentParams& e = c.environment;
        f.get("width", e.width);
        f.get("height", e.height);
        f.get("obstacle_count", e.obstacle_count);
        f.get("obstacle_radius", e.obstacle_radius);
        f.get("target_count", e.target_count);
        f.get("target_radius", e.target_radius);
        f.get("uav_radius", e.uav_radius);
        f.get("corridor_min", e.corridor_min);
        f.get("target_clearance", e.target_clearance);
        f.get("target_separation", e.target_separation);
        f.get("spawn_clearance", e.spawn_clearance);
        f.get("target_spawn_min", e.target_spawn_min);
        f.get("max_attempts", e.max_attempts);
        if (const Json* s = f.child("spawn")) {
            detail::Fields sf(*s, f.path("spawn"));
            Json pos = vec_to_json(e.spawn.position);
            sf.get("position", pos);
            e.spawn.position = vec_from_json(pos);
            sf.get("yaw", e.spawn.yaw);
            sf.finish();
        }
        f.finish();
    }
    if (const Json* j = top.child("scenario")) {
        if (!j->is_null()) c.scenario_path = j->get<std::string>();
    }
    if (const Json* j = top.child("dynamics")) {
        detail::Fields f(*j, top.path("dynamics"));
        f.get("dt", c.dynamics.dt);
        f.get("u_max", c.dynamics.u_max);
        f.get("yaw_rate", c.dynamics.yaw_rate);
        f.finish();
    }
    if (const Json* j = top.child("input_map")) {
        detail::Fields f(*j, top.path("input_map"));
        f.get("kv", c.input_map.kv);
        f.get("deadzone", c.input_map.deadzone);
        f.get("stylus_max", c.input_map.stylus_max);
        f.finish();
    }
    if (const Json* j = top.child("gains")) {
        detail::Fields f(*j, top.path("gains"));
        f.get("k1", c.gains.k1);
        f.get("k2", c.gains.k2);
        f.finish();
    }
    if (const Json* j = top.child("paradigm")) {
        detail::Fields f(*j, top.path("paradigm"));
        f.get("kf", c.paradigm.kf);
        f.get("f_max", c.paradigm.f_max);
        f.finish();
    }
    if (const Json* j = top.child("trial")) {
        detail::Fields f(*j, top.path("trial"));
        f.get("crash_depth", c.trial.crash_depth);
        f.get("hover_speed_max", c.trial.hover_speed_max);
        f.finish();
    }
    if (const Json* j = top.child("filter")) {
        detail::Fields f(*j, top.path("filter"));
        f.get("cull_radius", c.filter.cull_radius);
        f.get("relax_penalty", c.filter.relax_penalty);
        f.get("walls", c.filter.walls);
        f.finish();
    }
    if (const Json* j = top.child("operator")) {
        if (!j->is_string()) throw ConfigError("config.operator: expected an operator spec string");
        c.op = OperatorSpec::parse(j->get<std::string>());
    }
    if (const Json* j = top.child("log")) {
        if (!j->is_null()) c.log_path = j->get<std::string>();
    }
    top.finish();
    return c;
}

SessionConfig load_session_config(const std::filesystem::path& path) {
    return session_config_from_json(read_json_file(path));
}

Json to_json(const SessionConfig& c) {
    const EnvironmentParams& e = c.environment;
    Json doc;
    doc["condition"] = to_string(c.condition);
    doc["seed"] = c.seed;
    doc["tick_cap"] = c.tick_cap;
    doc["environment"] = {
        {"width", e.width},
        {"height", e.height},
        {"obstacle_count", e.obstacle_count},
        {"obstacle_radius", e.obstacle_radius},
        {"target_count", e.target_count},
        {"target_radius", e.target_radius},
        {"uav_radius", e.uav_radius},
        {"corridor_min", e.corridor_min},
        {"target_clearance", e.target_clearance},
        {"target_separation", e.target_separation},
        {"spawn_clearance", e.spawn_clearance},
        {"target_spawn_min", e.target_spawn_min},
        {"max_attempts", e.max_attempts},
        {"spawn", {{"position", vec_to_json(e.spawn.position)}, {"yaw", e.spawn.yaw}}},
    };
    doc["scenario"] = c.scenario_path ? Json(*c.scenario_path) : Json(nullptr);
    doc["dynamics"] = {{"dt", c.dynamics.dt}, {"u_max", c.dynamics.u_max}, {"yaw_rate", c.dynamics.yaw_rate}};
    doc["input_map"] = {
        {"kv", c.input_map.kv}, {"deadzone", c.input_map.deadzone}, {"stylus_max", c.input_map.stylus_max}};
    doc["gains"] = {{"k1", c.gains.k1}, {"k2", c.gains.k2}};
    doc["paradigm"] = {{"kf", c.paradigm.kf}, {"f_max", c.paradigm.f_max}};
    doc["trial"] = {{"crash_depth", c.trial.crash_depth}, {"hover_speed_max", c.trial.hover_speed_max}};
    doc["filter"] = {
        {"cull_radius", c.filter.cull_radius}, {"relax_penalty", c.filter.relax_penalty}, {"walls", c.filter.walls}};
    doc["operator"] = c.op.to_text();
    doc["log"] = c.log_path ? Json(*c.log_path) : Json(nullptr);
    return doc;
}

Json to_json(const Environment& env) {
    Json doc;
    doc["format"] = "cbf-teleop-scenario";
    doc["version"] = 1;
    doc["width"] = env.width;
    doc["height"] = env.height;
    doc["uav_radius"] = env.uav_radius;
    doc["seed"] = env.seed;
    doc["spawn"] = {{"position", vec_to_json(env.spawn.position)}, {"yaw", env.spawn.yaw}};
    Json obstacles = Json::array();
    for (const Obstacle& o : env.obstacles) obstacles.push_back({{"center", vec_to_json(o.center)}, {"radius", o.radius}});
    doc["obstacles"] = std::move(obstacles);
    Json targets = Json::array();
    for (const Target& t : env.targets)
        targets.push_back({{"center", vec_to_json(t.center)}, {"radius", t.radius}, {"inspected", t.inspected}});
    doc["targets"] = std::move(targets);
    return doc;
}

Environment environment_from_json(const Json& doc) {
    detail::Fields f(doc, "scenario");
    std::string format;
    int version = 0;
    f.get("format", format);
    f.get("version", version);
    if (format != "cbf-teleop-scenario" || version != 1)
        throw ConfigError("scenario: expected format cbf-teleop-scenario version 1");
    Environment env;
    f.get("width", env.width);
    f.get("height", env.height);
    f.get("uav_radius", env.uav_radius);
    f.get("seed", env.seed);
    if (const Json* s = f.child("spawn")) {
        detail::Fields sf(*s, f.path("spawn"));
        Json pos = vec_to_json(env.spawn.position);
        sf.get("position", pos);
        env.spawn.position = vec_from_json(pos);
        sf.get("yaw", env.spawn.yaw);
        sf.finish();
    }
    if (const Json* list = f.child("obstacles")) {
        for (const Json& item : *list) {
            detail::Fields of(item, f.path("obstacles"));
            Obstacle o;
            Json c = vec_to_json(o.center);
            of.get("center", c);
            o.center = vec_from_json(c);
            of.get("radius", o.radius);
            of.finish();
            env.obstacles.push_back(o);
        }
    }
    if (const Json* list = f.child("targets")) {
        for (const Json& item : *list) {
            detail::Fields tf(item, f.path("targets"));
            Target t;
            Json c = vec_to_json(t.center);
            tf.get("center", c);
            t.center = vec_from_json(c);
            tf.get("radius", t.radius);
            tf.get("inspected", t.inspected);
            tf.finish();
            env.targets.push_back(t);
        }
    }
    f.finish();
    return env;
}

Environment load_scenario(const std::filesystem::path& path) { return environment_from_json(read_json_file(path)); }

void save_scenario(const Environment& env, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << to_json(env).dump(2) << '\n';
}

Environment build_environment(const SessionConfig& config) {
    if (config.scenario_path) return load_scenario(*config.scenario_path);
    return generate_environment(config.environment, config.seed);
}

}  // namespace cbf_teleop
