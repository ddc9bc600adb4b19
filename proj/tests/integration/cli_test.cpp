#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "cbf_teleop/config.hpp"

using namespace cbf_teleop;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const char* cli = std::getenv("CBF_TELEOP_CLI");
        if (!cli || !*cli) GTEST_SKIP() << "CBF_TELEOP_CLI not set";
        cli_ = cli;
        dir_ = fs::temp_directory_path() /
               ("cbf_teleop_cli_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }

    Result run(const std::string& args) {
        const fs::path out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
        const std::string cmd = "'" + cli_ + "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
        const int status = std::system(cmd.c_str());
        Result r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(out);
        r.err = slurp(err);
        return r;
    }

    static void expect_error(const Result& r, int code, const std::string& kind) {
        EXPECT_EQ(r.code, code) << r.err;
        const Json j = Json::parse(r.err);
        EXPECT_EQ(j.at("error"), kind);
        EXPECT_TRUE(j.at("message").is_string());
    }

    std::string p(const std::string& name) const { return (dir_ / name).string(); }

    std::string cli_;
    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, RunTwiceIsByteIdenticalAndReplays) {
    const Result a = run("run --condition hsa --seed 7 --operator force --out " + p("a.jsonl"));
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_NE(a.out.find("outcome=succeeded"), std::string::npos) << a.out;
    ASSERT_EQ(run("run --condition hsa --seed 7 --operator force --out " + p("b.jsonl")).code, 0);
    EXPECT_EQ(slurp(p("a.jsonl")), slurp(p("b.jsonl")));

    const Result r = run("replay --log " + p("a.jsonl") + " --out " + p("c.jsonl"));
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("replay identical"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
    expect_error(run("run --condition autopilot"), 2, "usage");
    expect_error(run("run --bogus 1"), 2, "usage");
    expect_error(run(""), 2, "usage");
    expect_error(run("replay --log " + p("missing.jsonl")), 2, "usage");
}

TEST_F(CliTest, ConfigErrors) {
    std::ofstream(p("bad.json")) << R"({"seed": 1, "gainz": {}})";
    expect_error(run("run --config " + p("bad.json")), 3, "config");
    expect_error(run("run --operator joystick"), 3, "config");
    std::ofstream(p("crowded.json")) << R"({"environment": {"obstacle_count": 5000}})";
    expect_error(run("run --config " + p("crowded.json")), 3, "config");
}

TEST_F(CliTest, CorruptLogIsIoError) {
    std::ofstream(p("broken.jsonl")) << "{\"kind\":\"header\"\n";
    expect_error(run("replay --log " + p("broken.jsonl")), 4, "log");
}

TEST_F(CliTest, EmptySweepIsUsageError) {
    std::ofstream(p("empty.json")) << R"({"conditions": [], "seeds": [1]})";
    expect_error(run("batch --sweep " + p("empty.json") + " --out-dir " + p("out")), 2, "usage");
}

TEST_F(CliTest, BatchWritesTables) {
    std::ofstream(p("sweep.json"))
        << R"({"base": {"operator": "waypoint"}, "conditions": ["na", "sa"], "seeds": [1, 2], "compare": [["sa", "na"]]})";
    const Result r = run("batch --sweep " + p("sweep.json") + " --out-dir " + p("out") + " --jobs 2");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir_ / "out" / "summary.csv"));
    EXPECT_TRUE(fs::exists(dir_ / "out" / "conditions.csv"));
    EXPECT_TRUE(fs::exists(dir_ / "out" / "compare_sa_vs_na.csv"));
}
