#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "rollout/csv.hpp"
#include "rollout/experiment.hpp"

namespace fs = std::filesystem;
using namespace rollout;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spit(const fs::path& p, const std::string& s) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << s;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("rollout_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const fs::path kSys1 = fs::path(ROLLOUT_SOURCE_DIR) / "data/sys1.txt";

ExperimentConfig small_config(const fs::path& out, const std::string& extra = "") {
    Settings s = Settings::parse("naive.axis0 = 1,200,2000\nnaive.axis1 = 1,500\nsweep.weights = 0.1,0.9\nseeds = 1,2\n" +
                                 extra);
    s.set("dataset", kSys1.string());
    s.set("output_dir", out.string());
    return ExperimentConfig::from_settings(s);
}

}  // namespace

TEST_CASE("settings parsing and overrides") {
    Settings s = Settings::parse("# comment\n ucb.alpha = 0.2 \n\nseeds=3\n");
    REQUIRE(s.find("ucb.alpha"));
    CHECK(*s.find("ucb.alpha") == "0.2");
    s.apply_override("ucb.alpha=0.3");
    CHECK(*s.find("ucb.alpha") == "0.3");
    CHECK_THROWS_AS(s.apply_override("no_equals"), ConfigError);
    CHECK_THROWS_AS(Settings::parse("just text\n"), ConfigError);

    const auto cfg = ExperimentConfig::from_settings(s);
    CHECK(cfg.hyper.alpha == 0.3);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{3});
}

TEST_CASE("defaults describe the reference experiment") {
    const auto cfg = ExperimentConfig::defaults();
    CHECK(cfg.rollout.n_dev() == 50);
    CHECK(cfg.rollout.n_ops() == 10000);
    CHECK(cfg.rollout.mttr() == 10.0);
    CHECK(cfg.hyper.alpha == 0.15);
    CHECK(cfg.hyper.gamma == 0.999999);
    CHECK(cfg.hyper.c == 0.15);
    CHECK(cfg.weights.size() >= 19);
    REQUIRE(cfg.naive_axes.size() == 2);
    CHECK(cfg.naive_axes[0].size() == 101);
}

TEST_CASE("to_text round-trips through the parser") {
    const auto cfg = small_config("/tmp/x", "ucb.c = 0.25\nrollout.mttr = 7.5\n");
    const auto again = ExperimentConfig::from_settings(Settings::parse(cfg.to_text()));
    CHECK(again.to_text() == cfg.to_text());
}

TEST_CASE("invalid configuration is rejected") {
    CHECK_THROWS_AS(ExperimentConfig::from_settings(Settings::parse("bogus.key = 1")), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_settings(Settings::parse("ucb.alpha = 1.5")), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_settings(Settings::parse("ucb.c = abc")), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_settings(Settings::parse("sweep.weights = 0,0.5")), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_settings(Settings::parse("rollout.n_dev = 5000")), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_settings(Settings::parse("naive.axis0 = 1,2")), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_settings(Settings::parse("naive.axis0 = 0\nnaive.axis1 = 1")), ConfigError);
}

TEST_CASE("number lists accept ranges") {
    const auto w = parse_number_list("0.01,0.05:0.95:0.05,0.99");
    REQUIRE(w.size() == 21);
    CHECK(w[0] == 0.01);
    CHECK(w[1] == 0.05);
    CHECK(w[3] == 0.15);
    CHECK(w[19] == 0.95);
    CHECK(w[20] == 0.99);
    CHECK(parse_integer_list("1,100:300:100") == std::vector<std::int64_t>{1, 100, 200, 300});
    CHECK_THROWS_AS(parse_number_list("1:2:0"), ConfigError);
    CHECK_THROWS_AS(parse_number_list("1,,2"), ConfigError);
    CHECK_THROWS_AS(parse_integer_list("1.5"), ConfigError);
}

TEST_CASE("enumerate writes outcomes and front") {
    const auto dir = scratch_dir("enumerate");
    const auto cfg = small_config(dir);
    const auto report = cmd_enumerate(cfg);
    REQUIRE(report.files.size() == 2);
    const auto all = read_csv(dir / "naive_outcomes.csv");
    CHECK(all.header == std::vector<std::string>{"policy", "downtime", "delivery_time"});
    CHECK(all.rows.size() == 6);
    CHECK(all.rows[0][0] == "1/1");
    CHECK(all.rows[1][0] == "1/500");

    const auto front = read_outcome_points(dir / "naive_front.csv");
    const auto points = read_outcome_points(dir / "naive_outcomes.csv");
    const auto f = pareto_front(points);
    REQUIRE(front.size() == f.size());
    for (std::size_t i = 0; i < front.size(); ++i) {
        CHECK(front[i].label == f[i].label);
        CHECK(front[i].downtime == f[i].downtime);
        CHECK(front[i].delivery_time == f[i].delivery_time);
    }
}

TEST_CASE("commands are byte-identical on rerun") {
    const auto a = scratch_dir("rerun_a");
    const auto b = scratch_dir("rerun_b");
    for (const auto& dir : {a, b}) {
        const auto cfg = small_config(dir, "sweep.dump_runs = true\nworkers = 3\n");
        cmd_enumerate(cfg);
        cmd_sweep_ucb(cfg);
        cmd_metrics(cfg, dir / "ucb_outcomes.csv", dir / "naive_front.csv");
        const std::vector<std::pair<std::string, fs::path>> series{{"naive", dir / "naive_front.csv"},
                                                                   {"ucb", dir / "ucb_outcomes.csv"}};
        cmd_plot_data(cfg, series, true);
    }
    std::size_t compared = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), a);
        REQUIRE(fs::exists(b / rel));
        CHECK_MESSAGE(slurp(e.path()) == slurp(b / rel), rel.string());
        ++compared;
    }
    CHECK(compared == 2 + 2 + 1 + 2 + 2 * 2 * 2);
}

TEST_CASE("sweep produces one row per weight and seed") {
    const auto dir = scratch_dir("sweep");
    Settings s;
    s.set("dataset", kSys1.string());
    s.set("output_dir", dir.string());
    s.set("sweep.weights", "0.05:0.95:0.05");
    const auto cfg = ExperimentConfig::from_settings(s);
    REQUIRE(cfg.weights.size() == 19);
    cmd_sweep_ucb(cfg);
    const auto t = read_csv(dir / "ucb_outcomes.csv");
    CHECK(t.header == std::vector<std::string>{"w0", "seed", "downtime", "delivery_time"});
    CHECK(t.rows.size() == 95);
    CHECK(t.rows[0][0] == "0.05");
    CHECK(t.rows[0][1] == "1");
    CHECK(t.rows[5][0] == "0.1");
}

TEST_CASE("weight on delivery shortens delivery and raises downtime") {
    Settings s;
    s.set("dataset", kSys1.string());
    s.set("sweep.weights", "0.05,0.95");
    const auto cfg = ExperimentConfig::from_settings(s);
    const auto runs = sweep_ucb(cfg, load_dataset(cfg));
    double dt_low = 0, dt_high = 0, dl_low = 0, dl_high = 0;
    for (const auto& r : runs) {
        (r.w0 < 0.5 ? dt_low : dt_high) += r.outcome.downtime;
        (r.w0 < 0.5 ? dl_low : dl_high) += r.outcome.delivery_time;
    }
    CHECK(dl_high < dl_low);
    CHECK(dt_high > dt_low);
}

TEST_CASE("naive front against itself scores 1") {
    const auto dir = scratch_dir("self_metrics");
    const auto cfg = small_config(dir);
    cmd_enumerate(cfg);
    const auto m = cmd_metrics(cfg, dir / "naive_front.csv", dir / "naive_front.csv");
    REQUIRE(m.objectives.size() == 2);
    for (const auto& o : m.objectives) {
        CHECK(o.range == 1.0);
        CHECK(o.suboptimality.mean == 1.0);
        CHECK(o.suboptimality.n_excluded == 0);
    }
    const auto j = nlohmann::json::parse(slurp(dir / "metrics.json"));
    REQUIRE(j["metrics"].size() == 2);
    CHECK(j["metrics"][0]["objective"] == "downtime");
    CHECK(j["metrics"][1]["objective"] == "delivery_time");
    for (const auto* key : {"range", "avg_suboptimality", "n_points", "n_excluded"})
        CHECK(j["metrics"][0].contains(key));
}

TEST_CASE("metrics with no comparable point is a data error") {
    const auto dir = scratch_dir("disjoint");
    spit(dir / "naive.csv", "label,downtime,delivery_time\na,0,100\nb,10,50\n");
    spit(dir / "approach.csv", "label,downtime,delivery_time\nx,100,1\ny,200,2\n");
    auto cfg = small_config(dir);
    CHECK_THROWS_AS(cmd_metrics(cfg, dir / "approach.csv", dir / "naive.csv"), DataError);
    spit(dir / "bad.csv", "label,downtime,delivery_time\nx,1\n");
    CHECK_THROWS_AS(cmd_metrics(cfg, dir / "bad.csv", dir / "naive.csv"), DataError);
    CHECK_THROWS_AS(cmd_metrics(cfg, dir / "missing.csv", dir / "naive.csv"), DataError);
}

TEST_CASE("empty dataset gives t1 + t2 per policy when allowed") {
    const auto dir = scratch_dir("empty_dataset");
    spit(dir / "empty.txt", "# no failures\n");
    Settings s = Settings::parse("naive.axis0 = 1,3\nnaive.axis1 = 2,10\n");
    s.set("dataset", (dir / "empty.txt").string());
    s.set("output_dir", dir.string());
    CHECK_THROWS_AS(cmd_enumerate(ExperimentConfig::from_settings(s)), DataError);
    s.set("dataset.allow_empty", "true");
    cmd_enumerate(ExperimentConfig::from_settings(s));
    const auto t = read_csv(dir / "naive_outcomes.csv");
    REQUIRE(t.rows.size() == 4);
    CHECK(t.rows[0] == std::vector<std::string>{"1/2", "0", "3"});
    CHECK(t.rows[1] == std::vector<std::string>{"1/10", "0", "11"});
    CHECK(t.rows[3] == std::vector<std::string>{"3/10", "0", "13"});
}

TEST_CASE("missing or malformed dataset is a data error") {
    const auto dir = scratch_dir("bad_dataset");
    Settings s;
    s.set("dataset", (dir / "nope.txt").string());
    CHECK_THROWS_AS(cmd_enumerate(ExperimentConfig::from_settings(s)), DataError);
    spit(dir / "bad.txt", "1\n2\nx\n");
    s.set("dataset", (dir / "bad.txt").string());
    CHECK_THROWS_AS(cmd_sweep_ucb(ExperimentConfig::from_settings(s)), DataError);
}

TEST_CASE("plot data merges series and skips empty ones") {
    const auto dir = scratch_dir("plot");
    spit(dir / "a.csv", "label,downtime,delivery_time\np,1,2\nq,3,4\n");
    spit(dir / "b.csv", "w0,seed,downtime,delivery_time\n");
    const auto cfg = small_config(dir);
    const std::vector<std::pair<std::string, fs::path>> series{{"naive", dir / "a.csv"}, {"ucb", dir / "b.csv"}};
    const auto report = cmd_plot_data(cfg, series, true);
    REQUIRE(report.warnings.size() == 1);
    CHECK(report.warnings[0].find("ucb") != std::string::npos);
    CHECK(slurp(dir / "plot_data.csv") == "series,downtime,delivery_time\nnaive,1,2\nnaive,3,4\n");
    CHECK(fs::exists(dir / "plot.gp"));

    const std::vector<std::pair<std::string, fs::path>> missing{{"x", dir / "none.csv"}};
    CHECK_THROWS_AS(cmd_plot_data(cfg, missing, false), DataError);
}

TEST_CASE("gen-data writes a loadable synthetic timeline") {
    const auto dir = scratch_dir("gen");
    auto cfg = small_config(dir, "gen.a = 40\ngen.b = 0.001\ngen.horizon = 5000\n");
    cmd_gen_data(cfg, dir / "syn.txt");
    const auto t = load_failure_times(dir / "syn.txt", true);
    CHECK(t == generate_nhpp_timeline(40, 0.001, 5000, cfg.seeds.front()));
    const auto first = slurp(dir / "syn.txt");
    cmd_gen_data(cfg, dir / "syn.txt");
    CHECK(slurp(dir / "syn.txt") == first);

    cfg.gen.a = -1;
    CHECK_THROWS_AS(cmd_gen_data(cfg, dir / "bad.txt"), ConfigError);
}

TEST_CASE("outcome reader builds labels from extra columns") {
    const auto dir = scratch_dir("reader");
    spit(dir / "u.csv", "w0,seed,downtime,delivery_time\n0.5,3,10,20\n");
    const auto p = read_outcome_points(dir / "u.csv");
    REQUIRE(p.size() == 1);
    CHECK(p[0].label == "w0=0.5;seed=3");
    CHECK(p[0].downtime == 10);
    spit(dir / "v.csv", "policy,downtime\n1/1,3\n");
    CHECK_THROWS_AS(read_outcome_points(dir / "v.csv"), CsvError);
    spit(dir / "w.csv", "policy,downtime,delivery_time\n1/1,3,x\n");
    try {
        read_outcome_points(dir / "w.csv");
        FAIL("expected CsvError");
    } catch (const CsvError& e) {
        CHECK(e.row() == 2);
    }
}
