#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "cbf_teleop/config.hpp"

using namespace cbf_teleop;
namespace fs = std::filesystem;

TEST(OperatorSpecText, WaypointDefaults) {
    const OperatorSpec s = OperatorSpec::parse("waypoint");
    EXPECT_EQ(s.kind, OperatorKind::Waypoint);
    EXPECT_EQ(s.params.alpha_force, OperatorParams{}.alpha_force);
}

TEST(OperatorSpecText, ForceDefaultsToAlphaTwo) {
    const OperatorSpec s = OperatorSpec::parse("force");
    EXPECT_EQ(s.kind, OperatorKind::ForceFollowing);
    EXPECT_EQ(s.params.alpha_force, 2.0);
}

TEST(OperatorSpecText, KeyValues) {
    const OperatorSpec s = OperatorSpec::parse("force:aggr=3,alpha=0,tau=0.1,latency=4");
    EXPECT_EQ(s.params.aggressiveness, 3.0);
    EXPECT_EQ(s.params.alpha_force, 0.0);
    EXPECT_EQ(s.params.admittance_tau, 0.1);
    EXPECT_EQ(s.params.latency_ticks, 4);
}

TEST(OperatorSpecText, RoundTrip) {
    for (const char* text : {"waypoint:aggr=2", "force:alpha=0.5,tau=0", "live", "replay:logs/a.jsonl"}) {
        const OperatorSpec s = OperatorSpec::parse(text);
        const OperatorSpec back = OperatorSpec::parse(s.to_text());
        EXPECT_EQ(back.kind, s.kind) << text;
        EXPECT_EQ(back.replay_path, s.replay_path) << text;
        EXPECT_EQ(back.params.aggressiveness, s.params.aggressiveness) << text;
        EXPECT_EQ(back.params.alpha_force, s.params.alpha_force) << text;
        EXPECT_EQ(back.params.admittance_tau, s.params.admittance_tau) << text;
    }
}

TEST(OperatorSpecText, Errors) {
    EXPECT_THROW(OperatorSpec::parse("joystick"), ConfigError);
    EXPECT_THROW(OperatorSpec::parse("force:speed=3"), ConfigError);
    EXPECT_THROW(OperatorSpec::parse("force:aggr=fast"), ConfigError);
    EXPECT_THROW(OperatorSpec::parse("replay"), ConfigError);
    EXPECT_THROW(OperatorSpec::parse("waypoint:aggr=0.5"), ConfigError);
}

TEST(SessionConfigJson, EmptyDocumentIsDefaults) {
    const SessionConfig c = session_config_from_json(Json::object());
    EXPECT_EQ(c.condition, Condition::HSA);
    EXPECT_EQ(c.dynamics.dt, 0.02);
    EXPECT_EQ(c.gains.k1, 2.0);
    EXPECT_EQ(c.gains.k2, 3.0);
}

TEST(SessionConfigJson, RoundTrip) {
    SessionConfig c;
    c.condition = Condition::SA;
    c.seed = 77;
    c.environment.obstacle_count = 30;
    c.op = OperatorSpec::parse("force:alpha=1.5");
    c.filter.walls = true;
    const SessionConfig back = session_config_from_json(to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));
}

TEST(SessionConfigJson, UnknownKeysAreErrors) {
    EXPECT_THROW(session_config_from_json(Json{{"sede", 3}}), ConfigError);
    try {
        session_config_from_json(Json{{"gains", {{"k1", 2}, {"k3", 1}}}});
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("k3"), std::string::npos);
    }
}

TEST(SessionConfigJson, BadValues) {
    EXPECT_THROW(session_config_from_json(Json{{"condition", "auto"}}), ConfigError);
    EXPECT_THROW(session_config_from_json(Json{{"seed", "three"}}), ConfigError);
    EXPECT_THROW(session_config_from_json(Json{{"gains", {{"k1", -1}}}}).validate(), ConfigError);
}

TEST(Scenario, SaveAndLoad) {
    SessionConfig c;
    c.seed = 5;
    const Environment env = build_environment(c);
    const fs::path path = fs::temp_directory_path() / "cbf_teleop_config_test_scenario.json";
    save_scenario(env, path);
    EXPECT_EQ(load_scenario(path), env);
}

TEST(Scenario, ConfigPathOverridesGeneration) {
    SessionConfig c;
    c.seed = 5;
    const Environment env = build_environment(c);
    const fs::path path = fs::temp_directory_path() / "cbf_teleop_config_test_override.json";
    save_scenario(env, path);
    SessionConfig other;
    other.seed = 6;
    other.scenario_path = path.string();
    EXPECT_EQ(build_environment(other), env);
}

TEST(JsonFile, MissingAndMalformed) {
    EXPECT_THROW(read_json_file("/nonexistent/cbf.json"), ConfigError);
    const fs::path path = fs::temp_directory_path() / "cbf_teleop_config_test_bad.json";
    std::ofstream(path) << "{\"seed\": ";
    EXPECT_THROW(load_session_config(path), ConfigError);
}

TEST(Vec, Parsing) {
    EXPECT_EQ(vec_from_json(Json::array({1.5, -2})), Vec2(1.5, -2));
    EXPECT_THROW(vec_from_json(Json::array({1})), ConfigError);
    EXPECT_THROW(vec_from_json(Json("x")), ConfigError);
}
