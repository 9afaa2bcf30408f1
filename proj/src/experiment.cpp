#include "rollout/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "rollout/csv.hpp"
#include "rollout/parallel.hpp"
#include "rollout/text.hpp"

namespace rollout {

namespace fs = std::filesystem;

Settings Settings::parse(std::string_view input) {
    Settings s;
    std::size_t line_no = 0;
    for (auto raw : text::split(input, '\n')) {
        ++line_no;
        const auto line = text::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        s.apply_override(line);
    }
    return s;
}

Settings Settings::load(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

void Settings::apply_override(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
    const auto key = text::trim(assignment.substr(0, eq));
    if (key.empty()) throw ConfigError("empty key in '" + std::string(assignment) + "'");
    set(std::string(key), std::string(text::trim(assignment.substr(eq + 1))));
}

void Settings::set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }

const std::string* Settings::find(std::string_view key) const {
    auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
}

namespace {

double to_double(std::string_view key, std::string_view value) {
    const auto v = text::parse_double(text::trim(value));
    if (!v) throw ConfigError(std::string(key) + ": not a number: '" + std::string(value) + "'");
    return *v;
}

std::int64_t to_integer(std::string_view key, std::string_view value) {
    const double v = to_double(key, value);
    if (v != std::floor(v) || std::fabs(v) > 9.0e15)
        throw ConfigError(std::string(key) + ": not an integer: '" + std::string(value) + "'");
    return static_cast<std::int64_t>(v);
}

bool to_bool(std::string_view key, std::string_view value) {
    const auto v = text::trim(value);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(std::string(key) + ": not a boolean: '" + std::string(value) + "'");
}

// Rounds away accumulated binary error so 0.05 * 3 prints as 0.15.
double tidy(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return *text::parse_double(buf);
}

template <typename T>
std::string join(const std::vector<T>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        if constexpr (std::is_floating_point_v<T>)
            out += text::format_number(values[i]);
        else
            out += std::to_string(values[i]);
    }
    return out;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << content;
}

fs::path prepare_output_dir(const ExperimentConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) throw DataError("cannot create output directory " + cfg.output_dir.string() + ": " + ec.message());
    return cfg.output_dir;
}

std::vector<OutcomePoint> read_points_or_throw(const fs::path& path) {
    try {
        return read_outcome_points(path);
    } catch (const CsvError& e) {
        throw DataError(e.what());
    }
}

}  // namespace

std::vector<double> parse_number_list(std::string_view items) {
    std::vector<double> values;
    for (auto item : text::split(items, ',')) {
        item = text::trim(item);
        if (item.empty()) throw ConfigError("empty item in list '" + std::string(items) + "'");
        const auto parts = text::split(item, ':');
        if (parts.size() == 1) {
            values.push_back(to_double("list", item));
        } else if (parts.size() == 3) {
            const double start = to_double("range start", parts[0]);
            const double stop = to_double("range stop", parts[1]);
            const double step = to_double("range step", parts[2]);
            if (!(step > 0.0) || stop < start) throw ConfigError("bad range '" + std::string(item) + "'");
            const auto n = static_cast<std::int64_t>(std::floor((stop - start) / step + 1e-9));
            for (std::int64_t k = 0; k <= n; ++k) values.push_back(tidy(start + static_cast<double>(k) * step));
        } else {
            throw ConfigError("bad list item '" + std::string(item) + "' (use value or start:stop:step)");
        }
    }
    return values;
}

std::vector<std::int64_t> parse_integer_list(std::string_view items) {
    std::vector<std::int64_t> out;
    for (double v : parse_number_list(items)) out.push_back(to_integer("integer list", text::format_number(v)));
    return out;
}

ExperimentConfig ExperimentConfig::from_settings(const Settings& settings) {
    ExperimentConfig cfg;
    cfg.weights = parse_number_list("0.01,0.05:0.95:0.05,0.99");

    std::int64_t n_dev = cfg.rollout.n_dev();
    std::vector<std::int64_t> stage_users(cfg.rollout.stage_users().begin(), cfg.rollout.stage_users().end());
    std::int64_t n_ops = cfg.rollout.n_ops();
    double mttr = cfg.rollout.mttr();
    std::map<std::size_t, std::vector<std::int64_t>> axes;

    for (const auto& [key, value] : settings.entries()) {
        if (key == "dataset") cfg.dataset = value;
        else if (key == "dataset.allow_empty") cfg.allow_empty_dataset = to_bool(key, value);
        else if (key == "output_dir") cfg.output_dir = value;
        else if (key == "rollout.n_dev") n_dev = to_integer(key, value);
        else if (key == "rollout.stage_users") stage_users = parse_integer_list(value);
        else if (key == "rollout.n_ops") n_ops = to_integer(key, value);
        else if (key == "rollout.mttr") mttr = to_double(key, value);
        else if (key == "ucb.alpha") cfg.hyper.alpha = to_double(key, value);
        else if (key == "ucb.gamma") cfg.hyper.gamma = to_double(key, value);
        else if (key == "ucb.c") cfg.hyper.c = to_double(key, value);
        else if (key == "ucb.episodes") cfg.episodes = static_cast<int>(to_integer(key, value));
        else if (key == "ucb.buckets") {
            try {
                cfg.buckets = SojournBuckets(parse_integer_list(value));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("ucb.buckets: ") + e.what());
            }
        }
        else if (key == "reward.normalize") cfg.normalize_reward = to_bool(key, value);
        else if (key == "sweep.weights") cfg.weights = parse_number_list(value);
        else if (key == "sweep.dump_runs") cfg.dump_runs = to_bool(key, value);
        else if (key == "seeds") {
            cfg.seeds.clear();
            for (auto s : parse_integer_list(value)) {
                if (s < 0) throw ConfigError("seeds must be non-negative");
                cfg.seeds.push_back(static_cast<std::uint64_t>(s));
            }
        }
        else if (key.rfind("naive.axis", 0) == 0) {
            const auto idx = to_integer(key, std::string_view(key).substr(10));
            if (idx < 0) throw ConfigError("bad axis key " + key);
            axes[static_cast<std::size_t>(idx)] = parse_integer_list(value);
        }
        else if (key == "metrics.include_dominated") cfg.include_dominated = to_bool(key, value);
        else if (key == "workers") cfg.workers = static_cast<unsigned>(std::max<std::int64_t>(0, to_integer(key, value)));
        else if (key == "gen.a") cfg.gen.a = to_double(key, value);
        else if (key == "gen.b") cfg.gen.b = to_double(key, value);
        else if (key == "gen.horizon") cfg.gen.horizon = to_double(key, value);
        else throw ConfigError("unknown config key '" + key + "'");
    }

    try {
        cfg.rollout = RolloutConfig(n_dev, std::move(stage_users), n_ops, mttr);
        cfg.hyper.validate();
        for (double w : cfg.weights) (void)Weights(w);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (cfg.weights.empty()) throw ConfigError("sweep.weights must not be empty");
    if (cfg.seeds.empty()) throw ConfigError("seeds must not be empty");
    if (cfg.episodes < 1) throw ConfigError("ucb.episodes must be >= 1");

    const auto n_axes = static_cast<std::size_t>(cfg.rollout.num_stages()) + 1;
    if (axes.empty()) {
        cfg.naive_axes.assign(n_axes, reference_threshold_axis());
    } else {
        for (std::size_t i = 0; i < n_axes; ++i) {
            auto it = axes.find(i);
            if (it == axes.end()) throw ConfigError("missing naive.axis" + std::to_string(i));
            if (it->second.empty()) throw ConfigError("naive.axis" + std::to_string(i) + " is empty");
            for (auto t : it->second)
                if (t < 1) throw ConfigError("naive thresholds must be >= 1");
            cfg.naive_axes.push_back(it->second);
        }
        if (axes.size() != n_axes) throw ConfigError("expected " + std::to_string(n_axes) + " naive axes");
    }
    return cfg;
}

std::string ExperimentConfig::to_text() const {
    std::ostringstream os;
    os << "dataset = " << dataset.string() << '\n'
       << "dataset.allow_empty = " << (allow_empty_dataset ? "true" : "false") << '\n'
       << "output_dir = " << output_dir.string() << '\n'
       << "rollout.n_dev = " << rollout.n_dev() << '\n'
       << "rollout.stage_users = "
       << join(std::vector<std::int64_t>(rollout.stage_users().begin(), rollout.stage_users().end())) << '\n'
       << "rollout.n_ops = " << rollout.n_ops() << '\n'
       << "rollout.mttr = " << text::format_number(rollout.mttr()) << '\n'
       << "ucb.alpha = " << text::format_number(hyper.alpha) << '\n'
       << "ucb.gamma = " << text::format_number(hyper.gamma) << '\n'
       << "ucb.c = " << text::format_number(hyper.c) << '\n'
       << "ucb.episodes = " << episodes << '\n'
       << "ucb.buckets = " << join(std::vector<std::int64_t>(buckets.bounds().begin(), buckets.bounds().end()))
       << '\n'
       << "reward.normalize = " << (normalize_reward ? "true" : "false") << '\n'
       << "sweep.weights = " << join(weights) << '\n'
       << "sweep.dump_runs = " << (dump_runs ? "true" : "false") << '\n'
       << "seeds = " << join(seeds) << '\n';
    for (std::size_t i = 0; i < naive_axes.size(); ++i) os << "naive.axis" << i << " = " << join(naive_axes[i]) << '\n';
    os << "metrics.include_dominated = " << (include_dominated ? "true" : "false") << '\n'
       << "workers = " << workers << '\n'
       << "gen.a = " << text::format_number(gen.a) << '\n'
       << "gen.b = " << text::format_number(gen.b) << '\n'
       << "gen.horizon = " << text::format_number(gen.horizon) << '\n';
    return os.str();
}

DefectTimeline load_dataset(const ExperimentConfig& cfg) {
    if (!fs::exists(cfg.dataset)) throw DataError("dataset not found: " + cfg.dataset.string());
    try {
        return load_failure_times(cfg.dataset, cfg.allow_empty_dataset);
    } catch (const ParseError& e) {
        throw DataError(cfg.dataset.string() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(cfg.dataset.string() + ": " + e.what());
    } catch (const std::runtime_error& e) {
        throw DataError(e.what());
    }
}

CommandReport cmd_enumerate(const ExperimentConfig& cfg) {
    const DefectTimeline timeline = load_dataset(cfg);
    const auto grid = policy_grid(cfg.naive_axes);
    const auto results = enumerate_naive(cfg.rollout, timeline, grid, cfg.workers);
    const fs::path dir = prepare_output_dir(cfg);

    std::vector<OutcomePoint> points;
    points.reserve(results.size());
    std::ostringstream all;
    all << "policy,downtime,delivery_time\n";
    for (const auto& r : results) {
        points.push_back({r.outcome.downtime, r.outcome.delivery_time, r.policy.label()});
        all << r.policy.label() << ',' << text::format_number(r.outcome.downtime) << ','
            << text::format_number(r.outcome.delivery_time) << '\n';
    }
    std::ostringstream front;
    write_points_csv(front, pareto_front(points).points());

    CommandReport report;
    report.files = {dir / "naive_outcomes.csv", dir / "naive_front.csv"};
    write_file(report.files[0], all.str());
    write_file(report.files[1], front.str());
    return report;
}

std::vector<UcbRun> sweep_ucb(const ExperimentConfig& cfg, const DefectTimeline& timeline) {
    UcbOptions options;
    options.buckets = cfg.buckets;
    if (cfg.normalize_reward) options.scale = RewardScale::normalized(cfg.rollout, timeline);

    std::vector<UcbRun> runs;
    for (double w : cfg.weights)
        for (auto seed : cfg.seeds) runs.push_back({w, seed, {}});
    parallel_for(runs.size(), cfg.workers, [&](std::size_t i) {
        Hyperparams hp = cfg.hyper;
        hp.seed = runs[i].seed;
        runs[i].outcome = run_ucb_episodes(cfg.rollout, timeline, Weights(runs[i].w0), hp, cfg.episodes, options).outcome;
    });
    return runs;
}

CommandReport cmd_sweep_ucb(const ExperimentConfig& cfg) {
    const DefectTimeline timeline = load_dataset(cfg);
    const auto runs = sweep_ucb(cfg, timeline);
    const fs::path dir = prepare_output_dir(cfg);

    std::vector<OutcomePoint> points;
    std::ostringstream all;
    all << "w0,seed,downtime,delivery_time\n";
    for (const auto& r : runs) {
        const auto w = text::format_number(r.w0);
        points.push_back({r.outcome.downtime, r.outcome.delivery_time, "w0=" + w + ";seed=" + std::to_string(r.seed)});
        all << w << ',' << r.seed << ',' << text::format_number(r.outcome.downtime) << ','
            << text::format_number(r.outcome.delivery_time) << '\n';
    }
    std::ostringstream front;
    write_points_csv(front, pareto_front(points).points());

    CommandReport report;
    report.files = {dir / "ucb_outcomes.csv", dir / "ucb_front.csv"};
    write_file(report.files[0], all.str());
    write_file(report.files[1], front.str());

    if (cfg.dump_runs) {
        const fs::path runs_dir = dir / "runs";
        fs::create_directories(runs_dir);
        UcbOptions options;
        options.buckets = cfg.buckets;
        options.record_trace = true;
        if (cfg.normalize_reward) options.scale = RewardScale::normalized(cfg.rollout, timeline);
        for (const auto& r : runs) {
            Hyperparams hp = cfg.hyper;
            hp.seed = r.seed;
            const auto result = run_ucb_episodes(cfg.rollout, timeline, Weights(r.w0), hp, cfg.episodes, options);
            const std::string stem = "w0_" + text::format_number(r.w0) + "_seed_" + std::to_string(r.seed);
            std::ostringstream q, t;
            result.table.write_csv(q, cfg.rollout);
            write_trace_csv(t, result.trace);
            report.files.push_back(runs_dir / (stem + "_qtable.csv"));
            write_file(report.files.back(), q.str());
            report.files.push_back(runs_dir / (stem + "_trace.csv"));
            write_file(report.files.back(), t.str());
        }
    }
    return report;
}

MetricsReport compute_metrics(std::span<const OutcomePoint> approach, std::span<const OutcomePoint> naive_front_points,
                              bool include_dominated) {
    if (approach.empty()) throw DataError("approach outcome set is empty");
    if (naive_front_points.empty()) throw DataError("naive front is empty");
    const ParetoFront naive = pareto_front(naive_front_points);
    const ParetoFront own = pareto_front(approach);
    const auto evaluated = include_dominated ? approach : own.points();

    MetricsReport m;
    m.n_approach_points = approach.size();
    m.n_approach_front = own.size();
    m.n_naive_front = naive.size();
    m.approach_min_downtime = own.min(Objective::Downtime);
    m.naive_min_downtime = naive.min(Objective::Downtime);
    m.include_dominated = include_dominated;
    for (auto o : {Objective::Downtime, Objective::DeliveryTime}) {
        ObjectiveMetrics om;
        om.objective = o;
        try {
            om.range_all_points = range_metric(approach, naive.points(), o);
            om.range_front_points = range_metric(own.points(), naive.points(), o);
            om.range = include_dominated ? om.range_all_points : om.range_front_points;
            om.suboptimality = average_suboptimality(evaluated, naive, o);
        } catch (const std::domain_error& e) {
            throw DataError(e.what());
        }
        m.objectives.push_back(om);
    }
    return m;
}

std::string MetricsReport::to_json() const {
    nlohmann::ordered_json j;
    j["metrics"] = nlohmann::ordered_json::array();
    for (const auto& o : objectives) {
        nlohmann::ordered_json e;
        e["objective"] = std::string(to_string(o.objective));
        e["range"] = o.range;
        e["avg_suboptimality"] = o.suboptimality.mean;
        e["n_points"] = o.suboptimality.n_points;
        e["n_excluded"] = o.suboptimality.n_excluded;
        e["range_all_points"] = o.range_all_points;
        e["range_front_points"] = o.range_front_points;
        j["metrics"].push_back(std::move(e));
    }
    j["include_dominated"] = include_dominated;
    j["n_approach_points"] = n_approach_points;
    j["n_approach_front"] = n_approach_front;
    j["n_naive_front"] = n_naive_front;
    j["approach_min_downtime"] = approach_min_downtime;
    j["naive_min_downtime"] = naive_min_downtime;
    return j.dump(2) + "\n";
}

std::string MetricsReport::to_table() const {
    std::ostringstream os;
    os << std::left << std::setw(15) << "objective" << std::right << std::setw(10) << "range" << std::setw(12)
       << "range(all)" << std::setw(14) << "avg subopt" << std::setw(10) << "points" << std::setw(10) << "excluded"
       << '\n';
    os << std::fixed << std::setprecision(4);
    for (const auto& o : objectives) {
        os << std::left << std::setw(15) << to_string(o.objective) << std::right << std::setw(10) << o.range
           << std::setw(12) << o.range_all_points << std::setw(14) << o.suboptimality.mean << std::setw(10)
           << o.suboptimality.n_points << std::setw(10) << o.suboptimality.n_excluded << '\n';
    }
    os << std::defaultfloat << "approach points " << n_approach_points << " (front " << n_approach_front
       << "), naive front " << n_naive_front << ", min downtime approach " << approach_min_downtime << " vs naive "
       << naive_min_downtime << '\n';
    return os.str();
}

MetricsReport cmd_metrics(const ExperimentConfig& cfg, const fs::path& approach_csv, const fs::path& naive_front_csv,
                          CommandReport* report) {
    const auto approach = read_points_or_throw(approach_csv);
    const auto naive = read_points_or_throw(naive_front_csv);
    MetricsReport m = compute_metrics(approach, naive, cfg.include_dominated);
    const fs::path dir = prepare_output_dir(cfg);
    write_file(dir / "metrics.json", m.to_json());
    if (report) report->files.push_back(dir / "metrics.json");
    return m;
}

CommandReport cmd_plot_data(const ExperimentConfig& cfg, std::span<const std::pair<std::string, fs::path>> series,
                            bool gnuplot_script) {
    if (series.empty()) throw ConfigError("plot-data needs at least one series");
    CommandReport report;
    std::ostringstream out;
    out << "series,downtime,delivery_time\n";
    std::vector<std::string> written;
    for (const auto& [name, path] : series) {
        if (name.empty() || name.find(',') != std::string::npos)
            throw ConfigError("series names must be non-empty and free of commas");
        if (!fs::exists(path)) throw DataError("series file not found: " + path.string());
        const auto points = read_points_or_throw(path);
        if (points.empty()) {
            report.warnings.push_back("series '" + name + "' is empty and was skipped");
            continue;
        }
        for (const auto& p : points)
            out << name << ',' << text::format_number(p.downtime) << ',' << text::format_number(p.delivery_time) << '\n';
        written.push_back(name);
    }
    const fs::path dir = prepare_output_dir(cfg);
    report.files.push_back(dir / "plot_data.csv");
    write_file(report.files.back(), out.str());

    if (gnuplot_script) {
        std::ostringstream gp;
        gp << "# gnuplot -p plot.gp\n"
           << "set datafile separator ','\n"
           << "set xlabel 'Delivery time'\n"
           << "set ylabel 'Downtime'\n"
           << "set key top right\n"
           << "plot ";
        for (std::size_t i = 0; i < written.size(); ++i) {
            if (i) gp << ", \\\n     ";
            gp << "'plot_data.csv' using ($1 eq '" << written[i] << "' ? $3 : 1/0):2 with points title '"
               << written[i] << "'";
        }
        gp << '\n';
        report.files.push_back(dir / "plot.gp");
        write_file(report.files.back(), gp.str());
    }
    return report;
}

CommandReport cmd_gen_data(const ExperimentConfig& cfg, const fs::path& output) {
    DefectTimeline timeline;
    try {
        timeline = generate_nhpp_timeline(cfg.gen.a, cfg.gen.b, cfg.gen.horizon, cfg.seeds.front());
    } catch (const std::domain_error& e) {
        throw ConfigError(e.what());
    }
    std::ostringstream header;
    header << "Synthetic NHPP timeline, mean value a(1-exp(-b t))\n"
           << "a=" << text::format_number(cfg.gen.a) << " b=" << text::format_number(cfg.gen.b)
           << " horizon=" << text::format_number(cfg.gen.horizon) << " seed=" << cfg.seeds.front() << "\n"
           << "count=" << timeline.count();
    if (output.has_parent_path()) fs::create_directories(output.parent_path());
    write_file(output, serialize(timeline, header.str()));
    CommandReport report;
    report.files.push_back(output);
    if (timeline.empty()) report.warnings.push_back("generated timeline is empty");
    return report;
}

}  // namespace rollout
