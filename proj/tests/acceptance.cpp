// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "oracles.hpp"
#include "rollout/agents.hpp"
#include "rollout/csv.hpp"
#include "rollout/defect_data.hpp"
#include "rollout/pareto.hpp"

namespace fs = std::filesystem;
using namespace rollout;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kSys1 = fs::path(ROLLOUT_SOURCE_DIR) / "data/sys1.txt";

struct Verdict {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) detail << what;
        ok = ok && cond;
    }
};

int failures = 0;

void report(const std::string& name, Verdict& v) {
    std::cout << (v.ok ? "PASS " : "FAIL ") << name;
    const auto d = v.detail.str();
    if (!d.empty()) std::cout << "  (" << d << ')';
    std::cout << std::endl;
    failures += v.ok ? 0 : 1;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int sh(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Terminal updates with random rewards give arbitrary Q values and visit counts.
void fill_entry(QTable& t, AgentStateKey s, Action a, const std::vector<double>& rewards) {
    Hyperparams p;
    p.alpha = 0.5;
    for (double r : rewards) q_update(t, s, a, r, std::nullopt, {}, p);
}

void criterion_q_update() {
    Verdict v;
    std::mt19937_64 gen(101);
    std::uniform_real_distribution<double> val(-1e3, 1e3), unit(1e-9, 1.0 - 1e-9);
    constexpr std::array<Action, 2> both{Action::Stay, Action::Advance};
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        QTable t(3, 2);
        const AgentStateKey s{gen() % 2, gen() % 2}, next{1 + gen() % 2, gen() % 2};
        fill_entry(t, s, Action::Advance, {val(gen)});
        fill_entry(t, next, Action::Stay, {val(gen)});
        fill_entry(t, next, Action::Advance, {val(gen)});
        Hyperparams p;
        p.alpha = unit(gen);
        p.gamma = unit(gen);
        const double r = val(gen);
        const double q0 = t.q(s, Action::Advance);
        const bool terminal = gen() % 4 == 0;
        const bool ops = next.stage == 2;
        const std::span<const Action> acts = ops ? std::span<const Action>(both.data(), 1) : std::span<const Action>(both);
        double max_next = t.q(next, Action::Stay);
        if (!ops) max_next = std::max(max_next, t.q(next, Action::Advance));
        const double expected = terminal ? q0 + p.alpha * (r - q0) : oracle::q_update_formula(q0, r, p.alpha, p.gamma, max_next);
        q_update(t, s, Action::Advance, r, terminal ? std::nullopt : std::optional(next), acts, p);
        worst = std::max(worst, std::fabs(t.q(s, Action::Advance) - expected));
    }
    v.require(worst <= 1e-12, "max error " + std::to_string(worst));
    v.detail << "max |error| = " << worst;
    report("1a q_update matches the update rule on 10000 random tuples (tol 1e-12)", v);
}

void criterion_ucb_greedy() {
    Verdict v;
    std::mt19937_64 gen(202);
    std::uniform_real_distribution<double> val(-10, 10);
    std::size_t ties = 0;
    for (int i = 0; i < 1000; ++i) {
        QTable t(3, 4);
        const AgentStateKey s{gen() % 3, gen() % 4};
        std::vector<double> stay_rewards(gen() % 4), adv_rewards;
        for (auto& r : stay_rewards) r = std::round(val(gen));
        if (gen() % 3 == 0) {
            adv_rewards = stay_rewards;
        } else {
            adv_rewards.resize(gen() % 4);
            for (auto& r : adv_rewards) r = std::round(val(gen));
        }
        fill_entry(t, s, Action::Stay, stay_rewards);
        fill_entry(t, s, Action::Advance, adv_rewards);

        const auto actions = available_actions(s.stage == 2 ? Stage::ops() : Stage::dev());
        // Greedy argmax over Q, ties in action order broken by the same draw.
        std::vector<Action> best;
        double best_q = -INFINITY;
        for (auto a : actions) {
            if (t.q(s, a) > best_q) {
                best_q = t.q(s, a);
                best = {a};
            } else if (t.q(s, a) == best_q) {
                best.push_back(a);
            }
        }
        ties += best.size() > 1;
        const std::uint64_t seed = gen();
        Rng oracle_rng(seed), rng(seed);
        const Action expected = best.size() == 1 ? best[0] : best[oracle_rng.index(best.size())];
        const Action got = ucb_select(t, s, actions, 0.0, rng);
        v.require(got == expected, "mismatch on table " + std::to_string(i));
    }
    v.detail << (v.ok ? "" : "; ") << ties << " tables with tied maxima";
    report("1b ucb_select with c=0 equals greedy argmax on 1000 random tables", v);
}

void criterion_downtime_identity() {
    Verdict v;
    std::mt19937_64 gen(303);
    const RolloutConfig cfg = RolloutConfig::reference();
    std::uniform_int_distribution<std::int64_t> th(1, 400);
    std::size_t with_downtime = 0;
    for (int i = 0; i < 100; ++i) {
        const auto tl = generate_nhpp_timeline(5 + static_cast<double>(gen() % 100), 1e-4 * (1 + gen() % 50), 2e4, gen());
        std::vector<TraceRow> trace;
        const auto out = run_threshold_episode(cfg, tl, PolicyVector(th(gen), th(gen)), &trace);
        with_downtime += out.downtime > 0;
        v.require(out.downtime == oracle::replay_downtime(trace, cfg), "timeline " + std::to_string(i));
    }
    v.detail << (v.ok ? "" : "; ") << with_downtime << "/100 episodes with downtime";
    report("1c downtime equals mttr * sum(p) over trace failures on 100 random timelines (exact)", v);
}

void criterion_pareto() {
    Verdict v;
    std::mt19937_64 gen(404);
    const auto t0 = Clock::now();
    for (int i = 0; i < 100; ++i) {
        const std::size_t n = 1 + gen() % 1000;
        std::vector<OutcomePoint> pts(n);
        const bool coarse = i % 2 == 0;
        for (auto& p : pts) {
            p.downtime = coarse ? static_cast<double>(gen() % 40) : static_cast<double>(gen() % 1'000'000) / 7.0;
            p.delivery_time = coarse ? static_cast<double>(gen() % 40) : static_cast<double>(gen() % 1'000'000) / 3.0;
        }
        const auto f = pareto_front(pts);
        std::set<std::pair<double, double>> got;
        for (const auto& p : f.points()) got.insert({p.downtime, p.delivery_time});
        v.require(got == oracle::brute_force_front(pts) && got.size() == f.size(), "set " + std::to_string(i));
    }
    const double secs = seconds_since(t0);
    v.require(secs < 10.0, "too slow");
    v.detail << (v.ok ? "" : "; ") << secs << " s";
    report("2 pareto_front equals brute force on 100 random sets (n <= 1000) in under 10 s", v);
}

void criterion_metric_identities(const fs::path& naive_outcomes_csv) {
    Verdict v;
    const auto naive = read_outcome_points(naive_outcomes_csv);
    const auto front = pareto_front(naive);
    for (auto o : {Objective::Downtime, Objective::DeliveryTime}) {
        const double r = range_metric(naive, naive, o);
        const double s = average_suboptimality(front.points(), front, o).mean;
        v.require(r == 1.0, "range " + std::string(to_string(o)) + " = " + std::to_string(r));
        v.require(s == 1.0, "suboptimality " + std::string(to_string(o)) + " = " + std::to_string(s));
    }
    report("3 range(naive, naive) = 1 and avg suboptimality(naive front, naive front) = 1 (exact)", v);
}

void criterion_empty_timeline() {
    Verdict v;
    std::mt19937_64 gen(505);
    const RolloutConfig cfg = RolloutConfig::reference();
    const DefectTimeline empty;
    for (int i = 0; i < 200; ++i) {
        const std::int64_t t1 = 1 + static_cast<std::int64_t>(gen() % 10000);
        const std::int64_t t2 = 1 + static_cast<std::int64_t>(gen() % 10000);
        const auto out = run_threshold_episode(cfg, empty, PolicyVector(t1, t2));
        v.require(out.downtime == 0.0 && out.delivery_time == static_cast<double>(t1 + t2),
                  "policy " + std::to_string(t1) + "/" + std::to_string(t2));
    }
    report("4 empty timeline under (t1, t2) gives downtime 0 and delivery t1 + t2", v);
}

// Runs every command from `workdir` with relative output paths so stdout is
// comparable across runs too.
bool run_pipeline(const fs::path& workdir) {
    fs::remove_all(workdir);
    fs::create_directories(workdir);
    const std::string cli = std::string("\"") + ROLLOUT_CLI + "\"";
    const std::string common = " --dataset \"" + kSys1.string() + "\" --out out";
    const std::vector<std::string> steps{"enumerate", "sweep-ucb", "metrics", "plot-data --gnuplot",
                                         "gen-data --output out/synthetic.txt"};
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const std::string cmd = "cd \"" + workdir.string() + "\" && " + cli + " " + steps[i] + common + " > stdout_" +
                                std::to_string(i) + ".txt 2> stderr_" + std::to_string(i) + ".txt";
        if (sh(cmd) != 0) {
            std::cout << "  command failed: " << steps[i] << '\n';
            return false;
        }
    }
    return true;
}

void criterion_sys1(const fs::path& dir, bool ran, double secs) {
    Verdict v;
    v.require(ran, "pipeline failed");
    if (ran) {
        const auto naive = read_csv(dir / "naive_outcomes.csv");
        v.require(naive.rows.size() == 10201, "naive outcomes " + std::to_string(naive.rows.size()));

        const auto m = nlohmann::json::parse(slurp(dir / "metrics.json"));
        const double ucb_min = m["approach_min_downtime"], naive_min = m["naive_min_downtime"];
        v.require(ucb_min > naive_min, "UCB min downtime not above naive min");

        const auto ucb = read_csv(dir / "ucb_outcomes.csv");
        std::set<std::string> weights;
        for (const auto& row : ucb.rows) weights.insert(row[0]);
        v.require(weights.size() >= 19, "fewer than 19 weights");

        std::ostringstream d;
        d << "naive " << naive.rows.size() << " outcomes; min downtime UCB " << ucb_min << " vs naive " << naive_min
          << "; " << weights.size() << " weights";
        for (const auto& e : m["metrics"]) {
            const std::string o = e["objective"];
            const double sub = e["avg_suboptimality"];
            const double r_front = e["range_front_points"], r_all = e["range_all_points"];
            v.require(sub >= 1.0 && sub <= 5.6, "suboptimality " + o + " out of [1.0, 5.6]");
            v.require(r_front >= 0.4 && r_front <= 1.2, "front range " + o + " out of [0.4, 1.2]");
            v.require(r_all >= 0.4 && r_all <= 1.2, "all-points range " + o + " out of [0.4, 1.2]");
            d << "; " << o << ": subopt " << sub << ", range " << r_front << " (all points " << r_all << ")";
        }
        v.require(secs < 600.0, "pipeline slower than 10 minutes");
        d << "; " << secs << " s";
        if (!v.ok) v.detail << "; ";
        v.detail << d.str();
    }
    report("5 SYS1 reproduction: 10201 naive outcomes, UCB min downtime above naive, metrics in corridor, < 10 min",
           v);
}

void criterion_rerun(const fs::path& a, const fs::path& b, bool ran) {
    Verdict v;
    v.require(ran, "pipeline failed");
    std::size_t compared = 0;
    if (ran) {
        for (const auto& e : fs::recursive_directory_iterator(a)) {
            if (!e.is_regular_file()) continue;
            const auto rel = fs::relative(e.path(), a);
            v.require(fs::exists(b / rel) && slurp(e.path()) == slurp(b / rel), "differs: " + rel.string());
            ++compared;
        }
        std::size_t in_b = 0;
        for (const auto& e : fs::recursive_directory_iterator(b)) in_b += e.is_regular_file();
        v.require(in_b == compared, "file sets differ");
    }
    v.detail << (v.ok ? "" : "; ") << compared << " files compared";
    report("6 every command rerun is byte-identical (outputs and stdout/stderr)", v);
}

void criterion_nhpp_mean() {
    Verdict v;
    struct Case {
        double a, b, horizon;
    };
    std::ostringstream d;
    for (const Case c : {Case{100, 5e-5, 1e5}, Case{50, 1e-3, 500}, Case{20, 0.01, 1e4}}) {
        constexpr int n = 1000;
        const double expected = c.a * -std::expm1(-c.b * c.horizon);
        double sum = 0.0;
        for (int s = 0; s < n; ++s) sum += static_cast<double>(generate_nhpp_timeline(c.a, c.b, c.horizon, s).count());
        const double mean = sum / n;
        const double se = std::sqrt(expected / n);
        const double z = (mean - expected) / se;
        v.require(std::fabs(z) < 3.0, "a=" + std::to_string(c.a) + " z=" + std::to_string(z));
        d << (d.tellp() > 0 ? "; " : "") << "mean " << mean << " vs " << expected << " (z " << z << ")";
    }
    if (!v.ok) v.detail << "; ";
    v.detail << d.str();
    report("7 NHPP mean count over 1000 seeds within 3 standard errors", v);
}

}  // namespace

int main() {
    std::cout.setf(std::ios::fmtflags(0), std::ios::floatfield);
    std::cout.precision(6);

    const fs::path root = fs::temp_directory_path() / "rollout_acceptance";
    const auto t0 = Clock::now();
    const bool ran_a = run_pipeline(root / "a");
    const double secs = seconds_since(t0);
    const bool ran_b = ran_a && run_pipeline(root / "b");

    criterion_q_update();
    criterion_ucb_greedy();
    criterion_downtime_identity();
    criterion_pareto();
    if (ran_a) {
        criterion_metric_identities(root / "a/out/naive_outcomes.csv");
    } else {
        Verdict v;
        v.require(false, "pipeline failed");
        report("3 range(naive, naive) = 1 and avg suboptimality(naive front, naive front) = 1 (exact)", v);
    }
    criterion_empty_timeline();
    criterion_sys1(root / "a/out", ran_a, secs);
    criterion_rerun(root / "a", root / "b", ran_a && ran_b);
    criterion_nhpp_mean();

    std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
    return failures == 0 ? 0 : 1;
}
