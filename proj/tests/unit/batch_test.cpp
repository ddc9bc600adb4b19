#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "cbf_teleop/batch.hpp"

using namespace cbf_teleop;
namespace fs = std::filesystem;

namespace {

Json four_by_twelve() {
    return Json{{"base", {{"operator", "waypoint"}}},
                {"conditions", {"na", "hsc", "sa", "hsa"}},
                {"seeds", {{"from", 1}, {"count", 12}}}};
}

}  // namespace

TEST(Sweep, ConditionShorthandExpandsVariantMajor) {
    const SweepSpec s = sweep_from_json(four_by_twelve());
    ASSERT_EQ(s.variants.size(), 4u);
    EXPECT_EQ(s.variants[2].name, "sa");
    EXPECT_EQ(s.variants[2].condition, Condition::SA);
    ASSERT_EQ(s.seeds.size(), 12u);
    EXPECT_EQ(s.seeds.front(), 1u);
    EXPECT_EQ(s.seeds.back(), 12u);
    const auto jobs = expand_sweep(s, std::nullopt);
    ASSERT_EQ(jobs.size(), 48u);
    EXPECT_EQ(jobs[0].variant, "na");
    EXPECT_EQ(jobs[12].variant, "hsc");
    EXPECT_EQ(jobs[13].config.seed, 2u);
    EXPECT_EQ(jobs[13].config.condition, Condition::HSC);
    EXPECT_FALSE(jobs[0].config.log_path.has_value());
}

TEST(Sweep, LogPathsPerJob) {
    SweepSpec s = sweep_from_json(four_by_twelve());
    s.write_logs = true;
    const auto jobs = expand_sweep(s, fs::path("out/logs"));
    ASSERT_TRUE(jobs[5].config.log_path.has_value());
    EXPECT_EQ(fs::path(*jobs[5].config.log_path).filename(), "na_seed6.jsonl");
}

TEST(Sweep, EmptyIsUsageError) {
    EXPECT_THROW(expand_sweep(SweepSpec{}, std::nullopt), UsageError);
    Json doc = four_by_twelve();
    doc["seeds"] = Json::array();
    EXPECT_THROW(expand_sweep(sweep_from_json(doc), std::nullopt), UsageError);
}

TEST(Sweep, ExplicitVariantsAndCompare) {
    const Json doc = {{"variants",
                       {{{"name", "hsa-force"}, {"condition", "hsa"}, {"operator", "force"}},
                        {{"name", "sa-blind"}, {"condition", "sa"}, {"operator", "force:alpha=0"}}}},
                      {"seeds", {1, 2}},
                      {"compare", Json::array({Json::array({"hsa-force", "sa-blind"})})}};
    const SweepSpec s = sweep_from_json(doc);
    ASSERT_EQ(s.variants.size(), 2u);
    EXPECT_EQ(s.variants[0].op.kind, OperatorKind::ForceFollowing);
    EXPECT_EQ(s.variants[1].op.params.alpha_force, 0.0);
    ASSERT_EQ(s.compare.size(), 1u);
    EXPECT_EQ(s.compare[0].second, "sa-blind");
}

TEST(Sweep, Errors) {
    Json dup = {{"conditions", {"sa", "sa"}}, {"seeds", {1}}};
    EXPECT_ANY_THROW(sweep_from_json(dup));
    Json bad_compare = four_by_twelve();
    bad_compare["compare"] = Json::array({Json::array({"sa", "nope"})});
    EXPECT_ANY_THROW(sweep_from_json(bad_compare));
    Json unknown = four_by_twelve();
    unknown["repeat"] = 2;
    EXPECT_ANY_THROW(sweep_from_json(unknown));
}

TEST(Batch, ResultsIndependentOfWorkerCount) {
    Json doc = four_by_twelve();
    doc["seeds"] = {{"from", 1}, {"count", 2}};
    const SweepSpec s = sweep_from_json(doc);
    const auto jobs = expand_sweep(s, std::nullopt);
    const auto one = run_jobs(jobs, 1);
    const auto three = run_jobs(jobs, 3);
    ASSERT_EQ(one.size(), 8u);
    ASSERT_EQ(three.size(), 8u);
    for (std::size_t i = 0; i < one.size(); ++i) {
        EXPECT_EQ(one[i].variant, three[i].variant);
        EXPECT_EQ(one[i].seed, three[i].seed);
        EXPECT_EQ(one[i].outcome, three[i].outcome);
        EXPECT_EQ(one[i].ticks, three[i].ticks);
        ASSERT_EQ(one[i].metrics.has_value(), three[i].metrics.has_value());
        if (one[i].metrics) {
            EXPECT_EQ(one[i].metrics->disagreement, three[i].metrics->disagreement);
        }
    }
}

TEST(Batch, TalliesAndComparison) {
    std::vector<BatchRow> rows;
    auto row = [](std::string v, std::uint64_t seed, TrialPhase phase, double dis) {
        BatchRow r;
        r.variant = std::move(v);
        r.seed = seed;
        r.outcome = phase;
        Metrics m;
        m.outcome = phase;
        m.disagreement = dis;
        m.v_avg = 1.0;
        m.excluded_from_performance = phase != TrialPhase::Succeeded;
        r.metrics = m;
        return r;
    };
    rows.push_back(row("a", 1, TrialPhase::Succeeded, 0.5));
    rows.push_back(row("a", 2, TrialPhase::Succeeded, 2.0));
    rows.push_back(row("a", 3, TrialPhase::Failed, 0.1));
    rows.push_back(row("b", 1, TrialPhase::Succeeded, 1.0));
    rows.push_back(row("b", 2, TrialPhase::Succeeded, 1.0));
    rows.push_back(row("b", 3, TrialPhase::Succeeded, 1.0));
    SweepSpec s;
    s.variants = {{"a", Condition::HSA, {}}, {"b", Condition::SA, {}}};
    s.seeds = {1, 2, 3};
    s.compare = {{"a", "b"}};
    const BatchSummary sum = summarize(rows, s);
    ASSERT_EQ(sum.tallies.size(), 2u);
    EXPECT_EQ(sum.tallies[0].succeeded, 2);
    EXPECT_EQ(sum.tallies[0].failed, 1);
    EXPECT_DOUBLE_EQ(sum.tallies[0].mean_disagreement, 1.25);
    ASSERT_EQ(sum.comparisons.size(), 1u);
    const PairComparison& c = sum.comparisons[0];
    ASSERT_EQ(c.rows.size(), 3u);
    EXPECT_TRUE(c.rows[0].a_lower);
    EXPECT_FALSE(c.rows[1].a_lower);
    EXPECT_EQ(c.a_lower_count, 2);

    std::ostringstream csv;
    write_comparison_csv(csv, c);
    EXPECT_NE(csv.str().find("seed"), std::string::npos);
    std::ostringstream tallies;
    write_tallies_csv(tallies, sum.tallies);
    EXPECT_NE(tallies.str().find("a,"), std::string::npos);
}

TEST(Batch, WritesOutputFiles) {
    Json doc = four_by_twelve();
    doc["seeds"] = {3};
    doc["compare"] = Json::array({Json::array({"hsa", "sa"})});
    doc["write_logs"] = true;
    const fs::path dir = fs::temp_directory_path() / "cbf_teleop_batch_test";
    fs::remove_all(dir);
    const BatchSummary sum = run_batch(sweep_from_json(doc), 2, dir);
    write_batch_outputs(sum, dir);
    EXPECT_EQ(sum.rows.size(), 4u);
    EXPECT_TRUE(fs::exists(dir / "summary.csv"));
    EXPECT_TRUE(fs::exists(dir / "conditions.csv"));
    EXPECT_TRUE(fs::exists(dir / "compare_hsa_vs_sa.csv"));
    EXPECT_TRUE(fs::exists(dir / "logs" / "hsa_seed3.jsonl"));
}
