// Command-line driver for the staged-rollout experiments.
//
//   rollout enumerate  --dataset data/sys1.txt --out out
//   rollout sweep-ucb  --dataset data/sys1.txt --out out --seed 1,2,3,4,5
//   rollout metrics    --out out
//   rollout plot-data  --out out --gnuplot
//   rollout gen-data   --set gen.a=80 --seed 7 --output synthetic.txt
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rollout/csv.hpp"
#include "rollout/defect_data.hpp"
#include "rollout/experiment.hpp"

namespace fs = std::filesystem;
using namespace rollout;

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

struct CommonOptions {
    std::optional<std::string> config;
    std::optional<std::string> dataset;
    std::optional<std::string> out;
    std::optional<std::string> seeds;
    std::vector<std::string> overrides;
};

ExperimentConfig build_config(const CommonOptions& opts) {
    Settings settings = opts.config ? Settings::load(*opts.config) : Settings{};
    if (opts.dataset) settings.set("dataset", *opts.dataset);
    if (opts.out) settings.set("output_dir", *opts.out);
    if (opts.seeds) settings.set("seeds", *opts.seeds);
    for (const auto& o : opts.overrides) settings.apply_override(o);
    return ExperimentConfig::from_settings(settings);
}

void print_report(const CommandReport& report) {
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& f : report.files) std::cout << "wrote " << f.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Staged rollout simulator: naive policy enumeration, UCB Q-learning sweeps and Pareto metrics"};
    app.require_subcommand(1);
    app.fallthrough();

    CommonOptions opts;
    app.add_option("--config", opts.config, "Key/value config file")->check(CLI::ExistingFile);
    app.add_option("--dataset", opts.dataset, "Failure-time file");
    app.add_option("--out", opts.out, "Output directory");
    app.add_option("--seed", opts.seeds, "RNG seed list, e.g. 1,2,3");
    app.add_option("--set", opts.overrides, "Override a config key (key=value); repeatable");

    auto* enumerate = app.add_subcommand("enumerate", "Run every threshold policy of the naive grid");
    auto* sweep = app.add_subcommand("sweep-ucb", "Run UCB Q-learning for every (w0, seed)");

    auto* metrics = app.add_subcommand("metrics", "Range and average suboptimality against the naive front");
    std::optional<std::string> approach_csv, naive_csv;
    metrics->add_option("--approach", approach_csv, "Approach outcomes (default OUT/ucb_outcomes.csv)");
    metrics->add_option("--naive-front", naive_csv, "Naive front (default OUT/naive_front.csv)");

    auto* plot = app.add_subcommand("plot-data", "Merge outcome files into one tidy plotting table");
    std::vector<std::string> series_args;
    bool gnuplot = false;
    plot->add_option("--series", series_args, "NAME=PATH; repeatable (default naive front and UCB outcomes)");
    plot->add_flag("--gnuplot", gnuplot, "Also write plot.gp");

    auto* gen = app.add_subcommand("gen-data", "Write a synthetic NHPP failure-time file (gen.a, gen.b, gen.horizon)");
    std::optional<std::string> gen_output;
    gen->add_option("--output", gen_output, "Output file (default OUT/synthetic.txt)");

    auto* show = app.add_subcommand("show-config", "Print the effective configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        const ExperimentConfig cfg = build_config(opts);
        if (*enumerate) {
            print_report(cmd_enumerate(cfg));
        } else if (*sweep) {
            print_report(cmd_sweep_ucb(cfg));
        } else if (*metrics) {
            CommandReport report;
            const fs::path a = approach_csv ? fs::path(*approach_csv) : cfg.output_dir / "ucb_outcomes.csv";
            const fs::path n = naive_csv ? fs::path(*naive_csv) : cfg.output_dir / "naive_front.csv";
            const MetricsReport m = cmd_metrics(cfg, a, n, &report);
            std::cout << m.to_table();
            print_report(report);
        } else if (*plot) {
            std::vector<std::pair<std::string, fs::path>> series;
            if (series_args.empty()) {
                series = {{"naive", cfg.output_dir / "naive_front.csv"}, {"ucb", cfg.output_dir / "ucb_outcomes.csv"}};
            }
            for (const auto& arg : series_args) {
                const auto eq = arg.find('=');
                if (eq == std::string::npos) throw ConfigError("--series expects NAME=PATH, got '" + arg + "'");
                series.emplace_back(arg.substr(0, eq), arg.substr(eq + 1));
            }
            print_report(cmd_plot_data(cfg, series, gnuplot));
        } else if (*gen) {
            print_report(cmd_gen_data(cfg, gen_output ? fs::path(*gen_output) : cfg.output_dir / "synthetic.txt"));
        } else if (*show) {
            std::cout << cfg.to_text();
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsageError;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDataError;
    }
    return 0;
}
