#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cbf_teleop/config.hpp"
#include "cbf_teleop/session.hpp"

namespace cbf_teleop {

/// Bad or empty sweep; the CLI maps it to a usage error.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One named column of a sweep: a condition plus an operator.
struct SweepVariant {
    std::string name;
    Condition condition = Condition::HSA;
    OperatorSpec op;
};

/// Sweep file (JSON):
///   {"base": {...session config...},
///    "variants": [{"name": "hsa-force", "condition": "hsa", "operator": "force"}],
///    "conditions": ["na", "hsc", "sa", "hsa"],      // shorthand, uses base operator
///    "seeds": [1, 2, 3] | {"from": 1, "count": 12},
///    "compare": [["hsa-force", "sa-blind"]],
///    "write_logs": false}
struct SweepSpec {
    SessionConfig base;
    std::vector<SweepVariant> variants;
    std::vector<std::uint64_t> seeds;
    std::vector<std::pair<std::string, std::string>> compare;
    bool write_logs = false;
};

SweepSpec sweep_from_json(const Json& doc);  // throws UsageError / ConfigError
SweepSpec load_sweep(const std::filesystem::path& path);

struct BatchJob {
    std::string variant;
    SessionConfig config;
};

/// Variants x seeds, variant-major. Throws UsageError when empty.
std::vector<BatchJob> expand_sweep(const SweepSpec& sweep, const std::optional<std::filesystem::path>& log_dir);

struct BatchRow {
    std::string variant;
    std::uint64_t seed = 0;
    Condition condition = Condition::NA;
    std::string op;
    std::optional<TrialPhase> outcome;
    std::optional<Metrics> metrics;
    std::uint64_t ticks = 0;
    int relaxed_events = 0;
    double min_h = kNoObstacleBarrier;
    std::optional<std::string> error;  // trial error or degenerate metrics
};

struct VariantTally {
    std::string variant;
    Condition condition = Condition::NA;
    int trials = 0;
    int succeeded = 0;
    int failed = 0;
    int timed_out = 0;
    int aborted = 0;
    int errors = 0;
    double mean_v_avg = 0.0;          // over successful trials
    double mean_t_collision = 0.0;    // over successful trials
    double mean_disagreement = 0.0;   // over successful trials
};

struct PairRow {
    std::uint64_t seed = 0;
    std::optional<double> a;  // disagreement of the first variant
    std::optional<double> b;
    bool a_lower = false;     // strictly lower, both present
};

struct PairComparison {
    std::string a;
    std::string b;
    std::vector<PairRow> rows;
    int a_lower_count = 0;
};

struct BatchSummary {
    std::vector<BatchRow> rows;  // same order as the jobs
    std::vector<VariantTally> tallies;
    std::vector<PairComparison> comparisons;
};

/// Runs every job on up to `jobs` worker threads. Sessions share nothing, so
/// results do not depend on the thread count. Trial errors land in their row.
std::vector<BatchRow> run_jobs(const std::vector<BatchJob>& jobs, unsigned workers);

BatchSummary summarize(std::vector<BatchRow> rows, const SweepSpec& sweep);
BatchSummary run_batch(const SweepSpec& sweep, unsigned workers,
                       const std::optional<std::filesystem::path>& out_dir = std::nullopt);

void write_rows_csv(std::ostream& out, const std::vector<BatchRow>& rows);
void write_tallies_csv(std::ostream& out, const std::vector<VariantTally>& tallies);
void write_comparison_csv(std::ostream& out, const PairComparison& comparison);

/// summary.csv, conditions.csv and compare_<a>_vs_<b>.csv under out_dir.
void write_batch_outputs(const BatchSummary& summary, const std::filesystem::path& out_dir);

}  // namespace cbf_teleop
