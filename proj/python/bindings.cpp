#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rollout/agents.hpp"
#include "rollout/defect_data.hpp"
#include "rollout/experiment.hpp"
#include "rollout/pareto.hpp"

namespace py = pybind11;
using namespace rollout;

namespace {

std::vector<OutcomePoint> to_points(const std::vector<std::tuple<double, double>>& xs) {
    std::vector<OutcomePoint> out;
    out.reserve(xs.size());
    for (const auto& [d, t] : xs) out.push_back({d, t, ""});
    return out;
}

Objective parse_objective(const std::string& name) {
    if (name == "downtime") return Objective::Downtime;
    if (name == "delivery_time") return Objective::DeliveryTime;
    throw py::value_error("objective must be 'downtime' or 'delivery_time'");
}

py::dict outcome_dict(const EpisodeOutcome& o) {
    py::dict d;
    d["downtime"] = o.downtime;
    d["delivery_time"] = o.delivery_time;
    d["failures_by_stage"] = o.failures_by_stage;
    d["label"] = o.policy_label;
    return d;
}

}  // namespace

PYBIND11_MODULE(staged_rollout, m) {
    m.doc() = "Staged rollout simulation, UCB Q-learning and Pareto metrics";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);

    py::class_<RolloutConfig>(m, "RolloutConfig")
        .def(py::init<std::int64_t, std::vector<std::int64_t>, std::int64_t, double>(), py::arg("n_dev"),
             py::arg("stage_users"), py::arg("n_ops"), py::arg("mttr"))
        .def_static("reference", &RolloutConfig::reference)
        .def_property_readonly("n_dev", &RolloutConfig::n_dev)
        .def_property_readonly("n_ops", &RolloutConfig::n_ops)
        .def_property_readonly("mttr", &RolloutConfig::mttr)
        .def_property_readonly("stage_users", [](const RolloutConfig& c) {
            return std::vector<std::int64_t>(c.stage_users().begin(), c.stage_users().end());
        });

    py::class_<Hyperparams>(m, "Hyperparams")
        .def(py::init<>())
        .def(py::init([](double alpha, double gamma, double c, std::uint64_t seed) {
                 return Hyperparams{alpha, gamma, c, seed};
             }),
             py::arg("alpha") = 0.15, py::arg("gamma") = 0.999999, py::arg("c") = 0.15, py::arg("seed") = 1)
        .def_readwrite("alpha", &Hyperparams::alpha)
        .def_readwrite("gamma", &Hyperparams::gamma)
        .def_readwrite("c", &Hyperparams::c)
        .def_readwrite("seed", &Hyperparams::seed);

    m.def(
        "load_failure_times",
        [](const std::filesystem::path& path, bool allow_empty) {
            const auto t = load_failure_times(path, allow_empty);
            return std::vector<double>(t.times().begin(), t.times().end());
        },
        py::arg("path"), py::arg("allow_empty") = false);

    m.def(
        "generate_nhpp_timeline",
        [](double a, double b, double horizon, std::uint64_t seed) {
            const auto t = generate_nhpp_timeline(a, b, horizon, seed);
            return std::vector<double>(t.times().begin(), t.times().end());
        },
        py::arg("a"), py::arg("b"), py::arg("horizon"), py::arg("seed"));

    m.def(
        "run_threshold_episode",
        [](const std::vector<double>& times, std::vector<std::int64_t> thresholds, const RolloutConfig& config) {
            return outcome_dict(
                run_threshold_episode(config, DefectTimeline::from_times(times), PolicyVector(std::move(thresholds))));
        },
        py::arg("times"), py::arg("thresholds"), py::arg("config") = RolloutConfig::reference());

    m.def(
        "run_ucb_episode",
        [](const std::vector<double>& times, double w0, const Hyperparams& params, const RolloutConfig& config,
           bool normalize_reward) {
            const auto tl = DefectTimeline::from_times(times);
            UcbOptions opts;
            if (normalize_reward) opts.scale = RewardScale::normalized(config, tl);
            return outcome_dict(run_ucb_episode(config, tl, Weights(w0), params, opts).outcome);
        },
        py::arg("times"), py::arg("w0"), py::arg("params") = Hyperparams{},
        py::arg("config") = RolloutConfig::reference(), py::arg("normalize_reward") = true);

    m.def(
        "enumerate_naive",
        [](const std::vector<double>& times, const std::vector<std::vector<std::int64_t>>& axes,
           const RolloutConfig& config, unsigned workers) {
            const auto grid = policy_grid(axes);
            std::vector<std::tuple<std::string, double, double>> out;
            py::gil_scoped_release release;
            for (const auto& r : enumerate_naive(config, DefectTimeline::from_times(times), grid, workers))
                out.emplace_back(r.policy.label(), r.outcome.downtime, r.outcome.delivery_time);
            return out;
        },
        py::arg("times"), py::arg("axes"), py::arg("config") = RolloutConfig::reference(), py::arg("workers") = 1);

    m.def(
        "pareto_front",
        [](const std::vector<std::tuple<double, double>>& points) {
            const auto f = pareto_front(to_points(points));
            std::vector<std::tuple<double, double>> out;
            for (const auto& p : f.points()) out.emplace_back(p.downtime, p.delivery_time);
            return out;
        },
        py::arg("points"), "Non-dominated (downtime, delivery_time) pairs, ascending in downtime.");

    m.def(
        "range_metric",
        [](const std::vector<std::tuple<double, double>>& approach, const std::vector<std::tuple<double, double>>& naive,
           const std::string& objective) {
            return range_metric(to_points(approach), to_points(naive), parse_objective(objective));
        },
        py::arg("approach"), py::arg("naive"), py::arg("objective"));

    m.def(
        "average_suboptimality",
        [](const std::vector<std::tuple<double, double>>& points,
           const std::vector<std::tuple<double, double>>& naive_points, const std::string& objective) {
            const auto s = average_suboptimality(to_points(points), pareto_front(to_points(naive_points)),
                                                 parse_objective(objective));
            return py::make_tuple(s.mean, s.n_points, s.n_excluded);
        },
        py::arg("points"), py::arg("naive_points"), py::arg("objective"),
        "(mean, n_points, n_excluded) against the front of naive_points.");

    m.def(
        "run_command",
        [](const std::string& command, const std::map<std::string, std::string>& settings) {
            Settings s;
            for (const auto& [k, v] : settings) s.set(k, v);
            const auto cfg = ExperimentConfig::from_settings(s);
            CommandReport report;
            if (command == "enumerate") {
                report = cmd_enumerate(cfg);
            } else if (command == "sweep-ucb") {
                report = cmd_sweep_ucb(cfg);
            } else if (command == "metrics") {
                cmd_metrics(cfg, cfg.output_dir / "ucb_outcomes.csv", cfg.output_dir / "naive_front.csv", &report);
            } else {
                throw ConfigError("unknown command '" + command + "'");
            }
            std::vector<std::string> files;
            for (const auto& f : report.files) files.push_back(f.string());
            return files;
        },
        py::arg("command"), py::arg("settings") = std::map<std::string, std::string>{},
        "Runs enumerate, sweep-ucb or metrics with config-key settings; returns the written files.");
}
