#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rollout/agents.hpp"
#include "rollout/pareto.hpp"
#include "rollout/rollout_sim.hpp"

namespace rollout {

/// Bad configuration or command usage (exit code 1).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Missing or malformed input data (exit code 2).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raw key/value settings, later assignments overriding earlier ones.
class Settings {
public:
    /// Parses `key = value` lines; `#` starts a comment line.
    static Settings parse(std::string_view text);
    static Settings load(const std::filesystem::path& path);

    /// Applies a `key=value` override. Throws ConfigError if malformed.
    void apply_override(std::string_view assignment);
    void set(std::string key, std::string value);
    const std::string* find(std::string_view key) const;
    const std::map<std::string, std::string, std::less<>>& entries() const noexcept { return values_; }

private:
    std::map<std::string, std::string, std::less<>> values_;
};

struct NhppSpec {
    double a = 100.0;
    double b = 5e-5;
    double horizon = 100000.0;
};

struct ExperimentConfig {
    RolloutConfig rollout = RolloutConfig::reference();
    Hyperparams hyper{};
    SojournBuckets buckets = SojournBuckets::standard();
    int episodes = 1;
    bool normalize_reward = true;
    std::vector<double> weights;
    std::vector<std::vector<std::int64_t>> naive_axes;
    std::filesystem::path dataset = "data/sys1.txt";
    bool allow_empty_dataset = false;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::filesystem::path output_dir = "out";
    bool include_dominated = false;
    unsigned workers = 1;
    bool dump_runs = false;
    NhppSpec gen{};

    /// Builds a config from defaults overlaid with `settings`. Throws
    /// ConfigError on unknown keys or invalid values.
    static ExperimentConfig from_settings(const Settings& settings);
    /// The reference SYS1 experiment.
    static ExperimentConfig defaults() { return from_settings(Settings{}); }

    /// The settings text that reproduces this config.
    std::string to_text() const;
};

/// Comma-separated numbers and inclusive `start:stop:step` ranges,
/// e.g. "0.01,0.05:0.95:0.05,0.99". Throws ConfigError.
std::vector<double> parse_number_list(std::string_view items);
std::vector<std::int64_t> parse_integer_list(std::string_view items);

struct CommandReport {
    std::vector<std::filesystem::path> files;
    std::vector<std::string> warnings;
};

/// Loads cfg.dataset. Throws DataError for missing or invalid files.
DefectTimeline load_dataset(const ExperimentConfig& cfg);

/// Writes naive_outcomes.csv and naive_front.csv.
CommandReport cmd_enumerate(const ExperimentConfig& cfg);

struct UcbRun {
    double w0;
    std::uint64_t seed;
    EpisodeOutcome outcome;
};

/// One UCB run per (weight, seed), in weights-major order.
std::vector<UcbRun> sweep_ucb(const ExperimentConfig& cfg, const DefectTimeline& timeline);

/// Writes ucb_outcomes.csv and ucb_front.csv; with dump_runs also a Q-table
/// and trace per run under runs/.
CommandReport cmd_sweep_ucb(const ExperimentConfig& cfg);

struct ObjectiveMetrics {
    Objective objective = Objective::Downtime;
    double range = 0.0;             // approach points per include_dominated
    double range_all_points = 0.0;  // every approach point
    double range_front_points = 0.0;
    SuboptimalitySummary suboptimality;
};

struct MetricsReport {
    std::vector<ObjectiveMetrics> objectives;
    std::size_t n_approach_points = 0;
    std::size_t n_approach_front = 0;
    std::size_t n_naive_front = 0;
    double approach_min_downtime = 0.0;
    double naive_min_downtime = 0.0;
    bool include_dominated = false;

    std::string to_json() const;
    std::string to_table() const;
};

/// Range and average suboptimality of `approach` against the naive front,
/// for both objectives.
MetricsReport compute_metrics(std::span<const OutcomePoint> approach, std::span<const OutcomePoint> naive_front_points,
                              bool include_dominated);

/// Reads both files, writes metrics.json. Throws DataError when an input is
/// malformed or no point is comparable.
MetricsReport cmd_metrics(const ExperimentConfig& cfg, const std::filesystem::path& approach_csv,
                          const std::filesystem::path& naive_front_csv, CommandReport* report = nullptr);

/// Writes plot_data.csv (series, downtime, delivery_time) and, if requested,
/// plot.gp. An empty series is dropped with a warning; a missing file throws.
CommandReport cmd_plot_data(const ExperimentConfig& cfg,
                            std::span<const std::pair<std::string, std::filesystem::path>> series,
                            bool gnuplot_script);

/// Writes a synthetic NHPP timeline (gen.* settings, first seed) to `output`.
CommandReport cmd_gen_data(const ExperimentConfig& cfg, const std::filesystem::path& output);

}  // namespace rollout
