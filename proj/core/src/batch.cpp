#include "cbf_teleop/batch.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <thread>

#include "json_fields.hpp"

namespace cbf_teleop {

namespace {

std::string num(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

Condition parse_condition(const std::string& text, const std::string& where) {
    const auto c = condition_from_string(text);
    if (!c) throw ConfigError(where + ": unknown condition '" + text + "'");
    return *c;
}

std::string safe_name(std::string s) {
    for (char& c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
    }
    return s;
}

}  // namespace

SweepSpec sweep_from_json(const Json& doc) {
    SweepSpec sweep;
    detail::Fields top(doc, "sweep");
    if (const Json* base = top.child("base")) sweep.base = session_config_from_json(*base);

    if (const Json* vs = top.child("variants")) {
        if (!vs->is_array()) throw ConfigError("sweep.variants: expected an array");
        for (const Json& item : *vs) {
            detail::Fields f(item, "sweep.variants");
            SweepVariant v;
            std::string condition = to_string(sweep.base.condition);
            std::string op = sweep.base.op.to_text();
            f.get("name", v.name);
            f.get("condition", condition);
            f.get("operator", op);
            f.finish();
            v.condition = parse_condition(condition, "sweep.variants");
            v.op = OperatorSpec::parse(op);
            if (v.name.empty()) v.name = condition + "-" + op;
            sweep.variants.push_back(std::move(v));
        }
    }
    if (const Json* cs = top.child("conditions")) {
        if (!cs->is_array()) throw ConfigError("sweep.conditions: expected an array");
        for (const Json& item : *cs) {
            if (!item.is_string()) throw ConfigError("sweep.conditions: expected strings");
            SweepVariant v;
            v.condition = parse_condition(item.get<std::string>(), "sweep.conditions");
            v.op = sweep.base.op;
            v.name = to_string(v.condition);
            sweep.variants.push_back(std::move(v));
        }
    }
    if (const Json* seeds = top.child("seeds")) {
        if (seeds->is_array()) {
            for (const Json& s : *seeds) {
                if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
                    throw ConfigError("sweep.seeds: expected non-negative integers");
                sweep.seeds.push_back(s.get<std::uint64_t>());
            }
        } else {
            detail::Fields f(*seeds, "sweep.seeds");
            std::uint64_t from = 1;
            std::uint64_t count = 0;
            f.get("from", from);
            f.get("count", count);
            f.finish();
            for (std::uint64_t i = 0; i < count; ++i) sweep.seeds.push_back(from + i);
        }
    }
    if (const Json* cmp = top.child("compare")) {
        if (!cmp->is_array()) throw ConfigError("sweep.compare: expected an array of pairs");
        for (const Json& pair : *cmp) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string())
                throw ConfigError("sweep.compare: expected [\"variant\", \"variant\"]");
            sweep.compare.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
        }
    }
    top.get("write_logs", sweep.write_logs);
    top.finish();

    std::map<std::string, int> names;
    for (const SweepVariant& v : sweep.variants) {
        if (names[v.name]++) throw ConfigError("sweep: duplicate variant name '" + v.name + "'");
    }
    for (const auto& [a, b] : sweep.compare) {
        if (!names.count(a) || !names.count(b))
            throw ConfigError("sweep.compare: unknown variant in pair (" + a + ", " + b + ")");
    }
    return sweep;
}

SweepSpec load_sweep(const std::filesystem::path& path) { return sweep_from_json(read_json_file(path)); }

std::vector<BatchJob> expand_sweep(const SweepSpec& sweep, const std::optional<std::filesystem::path>& log_dir) {
    if (sweep.variants.empty() || sweep.seeds.empty())
        throw UsageError("empty sweep: need at least one variant and one seed");
    std::vector<BatchJob> jobs;
    jobs.reserve(sweep.variants.size() * sweep.seeds.size());
    for (const SweepVariant& v : sweep.variants) {
        for (std::uint64_t seed : sweep.seeds) {
            BatchJob job{v.name, sweep.base};
            job.config.condition = v.condition;
            job.config.op = v.op;
            job.config.seed = seed;
            job.config.log_path.reset();
            if (sweep.write_logs && log_dir)
                job.config.log_path = (*log_dir / (safe_name(v.name) + "_seed" + std::to_string(seed) + ".jsonl")).string();
            jobs.push_back(std::move(job));
        }
    }
    return jobs;
}

std::vector<BatchRow> run_jobs(const std::vector<BatchJob>& jobs, unsigned workers) {
    std::vector<BatchRow> rows(jobs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            const BatchJob& job = jobs[i];
            BatchRow& row = rows[i];
            row.variant = job.variant;
            row.seed = job.config.seed;
            row.condition = job.config.condition;
            row.op = job.config.op.to_text();
            try {
                const HeadlessResult r = run_headless(job.config);
                row.outcome = r.trial.phase;
                row.metrics = r.metrics;
                row.error = r.metrics_error;
                row.ticks = r.ticks;
                row.relaxed_events = r.relaxed_events;
                row.min_h = r.min_h;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    };
    workers = std::clamp<unsigned>(workers, 1, std::max<std::size_t>(jobs.size(), 1));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (std::thread& t : pool) t.join();
    return rows;
}

BatchSummary summarize(std::vector<BatchRow> rows, const SweepSpec& sweep) {
    BatchSummary s;
    for (const SweepVariant& v : sweep.variants) {
        VariantTally t;
        t.variant = v.name;
        t.condition = v.condition;
        for (const BatchRow& r : rows) {
            if (r.variant != v.name) continue;
            ++t.trials;
            if (!r.outcome) {
                ++t.errors;
                continue;
            }
            switch (*r.outcome) {
                case TrialPhase::Succeeded: ++t.succeeded; break;
                case TrialPhase::Failed: ++t.failed; break;
                case TrialPhase::TimedOut: ++t.timed_out; break;
                case TrialPhase::Aborted: ++t.aborted; break;
                default: ++t.errors; break;
            }
            if (*r.outcome == TrialPhase::Succeeded && r.metrics) {
                t.mean_v_avg += r.metrics->v_avg;
                t.mean_t_collision += r.metrics->t_collision;
                t.mean_disagreement += r.metrics->disagreement;
            }
        }
        if (t.succeeded) {
            t.mean_v_avg /= t.succeeded;
            t.mean_t_collision /= t.succeeded;
            t.mean_disagreement /= t.succeeded;
        }
        s.tallies.push_back(t);
    }

    auto lookup = [&](const std::string& variant, std::uint64_t seed) -> std::optional<double> {
        for (const BatchRow& r : rows) {
            if (r.variant == variant && r.seed == seed && r.metrics) return r.metrics->disagreement;
        }
        return std::nullopt;
    };
    for (const auto& [a, b] : sweep.compare) {
        PairComparison c{a, b, {}, 0};
        for (std::uint64_t seed : sweep.seeds) {
            PairRow p{seed, lookup(a, seed), lookup(b, seed), false};
            p.a_lower = p.a && p.b && *p.a < *p.b;
            c.a_lower_count += p.a_lower;
            c.rows.push_back(p);
        }
        s.comparisons.push_back(std::move(c));
    }
    s.rows = std::move(rows);
    return s;
}

BatchSummary run_batch(const SweepSpec& sweep, unsigned workers, const std::optional<std::filesystem::path>& out_dir) {
    std::optional<std::filesystem::path> log_dir;
    if (out_dir && sweep.write_logs) {
        log_dir = *out_dir / "logs";
        std::filesystem::create_directories(*log_dir);
    }
    const std::vector<BatchJob> jobs = expand_sweep(sweep, log_dir);
    return summarize(run_jobs(jobs, workers), sweep);
}

void write_rows_csv(std::ostream& out, const std::vector<BatchRow>& rows) {
    out << "variant,seed,condition,operator,outcome,v_avg,t_collision,disagreement,duration,ticks,relaxed_events,min_h,"
           "error\n";
    for (const BatchRow& r : rows) {
        out << csv_field(r.variant) << ',' << r.seed << ',' << to_string(r.condition) << ',' << csv_field(r.op) << ','
            << (r.outcome ? to_string(*r.outcome) : "error") << ',';
        if (r.metrics) {
            out << num(r.metrics->v_avg) << ',' << num(r.metrics->t_collision) << ',' << num(r.metrics->disagreement)
                << ',' << num(r.metrics->duration) << ',';
        } else {
            out << ",,,,";
        }
        out << r.ticks << ',' << r.relaxed_events << ',' << num(r.min_h) << ',' << csv_field(r.error.value_or(""))
            << '\n';
    }
}

void write_tallies_csv(std::ostream& out, const std::vector<VariantTally>& tallies) {
    out << "variant,condition,trials,succeeded,failed,timed_out,aborted,errors,mean_v_avg,mean_t_collision,"
           "mean_disagreement\n";
    for (const VariantTally& t : tallies) {
        out << csv_field(t.variant) << ',' << to_string(t.condition) << ',' << t.trials << ',' << t.succeeded << ','
            << t.failed << ',' << t.timed_out << ',' << t.aborted << ',' << t.errors << ',' << num(t.mean_v_avg) << ','
            << num(t.mean_t_collision) << ',' << num(t.mean_disagreement) << '\n';
    }
}

void write_comparison_csv(std::ostream& out, const PairComparison& c) {
    out << "seed," << csv_field(c.a) << ',' << csv_field(c.b) << ",a_lower\n";
    for (const PairRow& p : c.rows) {
        out << p.seed << ',' << (p.a ? num(*p.a) : "") << ',' << (p.b ? num(*p.b) : "") << ','
            << (p.a_lower ? 1 : 0) << '\n';
    }
}

void write_batch_outputs(const BatchSummary& summary, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto open = [&](const std::string& name) {
        std::ofstream f(out_dir / name);
        if (!f) throw std::runtime_error("cannot write " + (out_dir / name).string());
        return f;
    };
    {
        auto f = open("summary.csv");
        write_rows_csv(f, summary.rows);
    }
    {
        auto f = open("conditions.csv");
        write_tallies_csv(f, summary.tallies);
    }
    for (const PairComparison& c : summary.comparisons) {
        auto f = open("compare_" + safe_name(c.a) + "_vs_" + safe_name(c.b) + ".csv");
        write_comparison_csv(f, c);
    }
}

}  // namespace cbf_teleop
