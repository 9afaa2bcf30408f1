#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rollout/defect_data.hpp"
#include "rollout/rng.hpp"
#include "rollout/rollout_sim.hpp"

namespace rollout {

/// Q-learning and UCB exploration parameters.
struct Hyperparams {
    double alpha = 0.15;
    double gamma = 0.999999;
    double c = 0.15;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument unless alpha, gamma in (0,1) and c > 0.
    void validate() const;
};

/// Exponential sojourn buckets. Bucket i covers [bounds[i-1], bounds[i]),
/// with an implicit 0 below the first bound and infinity above the last.
class SojournBuckets {
public:
    /// Throws std::invalid_argument unless bounds are positive and strictly increasing.
    explicit SojournBuckets(std::vector<std::int64_t> bounds);
    /// {1, 2, 4, ..., 256}: ten buckets.
    static SojournBuckets standard();

    std::size_t bucket(std::int64_t sojourn) const noexcept;
    std::size_t count() const noexcept { return bounds_.size() + 1; }
    std::span<const std::int64_t> bounds() const noexcept { return bounds_; }

private:
    std::vector<std::int64_t> bounds_;
};

/// Observation used by the learner: stage ordinal and sojourn bucket.
struct AgentStateKey {
    std::size_t stage = 0;
    std::size_t bucket = 0;

    bool operator==(const AgentStateKey&) const = default;
};

AgentStateKey observe(const EnvState& state, const RolloutConfig& config, const SojournBuckets& buckets);

/// Dense tabular action values with visit counts. Unvisited entries read as
/// Q = 0, n = 0.
class QTable {
public:
    QTable(std::size_t num_stages, std::size_t num_buckets);

    double q(AgentStateKey s, Action a) const { return entry(s, a).q; }
    std::uint64_t visits(AgentStateKey s, Action a) const { return entry(s, a).visits; }
    /// Total number of updates performed.
    std::uint64_t global_step() const noexcept { return global_step_; }

    /// max over `actions` of Q(s, a). actions must be non-empty.
    double max_q(AgentStateKey s, std::span<const Action> actions) const;

    std::size_t num_stages() const noexcept { return num_stages_; }
    std::size_t num_buckets() const noexcept { return num_buckets_; }

    bool operator==(const QTable&) const = default;

    /// Columns: stage, bucket, action, q, visits. Unvisited entries included.
    void write_csv(std::ostream& os, const RolloutConfig& config) const;

private:
    friend void q_update(QTable&, AgentStateKey, Action, double, std::optional<AgentStateKey>,
                         std::span<const Action>, const Hyperparams&);

    struct Entry {
        double q = 0.0;
        std::uint64_t visits = 0;
        bool operator==(const Entry&) const = default;
    };

    std::size_t index(AgentStateKey s, Action a) const;
    const Entry& entry(AgentStateKey s, Action a) const { return entries_[index(s, a)]; }

    std::size_t num_stages_;
    std::size_t num_buckets_;
    std::vector<Entry> entries_;
    std::uint64_t global_step_ = 0;
};

/// Q(s,a) += alpha * (r + gamma * max_{a'} Q(s', a') - Q(s,a)).
///
/// `next` is nullopt for a terminal transition, in which case the target is
/// r alone; otherwise the max ranges over `next_actions`. Increments the
/// visit count of (s, a) and the global step. Throws std::domain_error for a
/// non-finite reward.
void q_update(QTable& table, AgentStateKey s, Action a, double reward, std::optional<AgentStateKey> next,
              std::span<const Action> next_actions, const Hyperparams& params);

/// UCB score Q(s,a) + c * sqrt(max(0, log((t + 1) / n(s,a)))); +inf when n = 0.
/// With c = 0 the score is Q(s,a) for every entry, visited or not.
double ucb_score(const QTable& table, AgentStateKey s, Action a, double c);

/// Highest UCB score among `actions`, ties broken uniformly with `rng`.
/// Throws std::invalid_argument when actions is empty.
Action ucb_select(const QTable& table, AgentStateKey s, std::span<const Action> actions, double c, Rng& rng);

struct UcbOptions {
    SojournBuckets buckets = SojournBuckets::standard();
    RewardScale scale{};
    bool record_trace = false;
    /// Safety cap on episode length; exceeding it throws std::runtime_error.
    std::int64_t max_steps = 100'000'000;
};

struct UcbEpisodeResult {
    EpisodeOutcome outcome;
    QTable table;
    std::vector<TraceRow> trace;
};

/// One online learning episode: UCB action selection and a Q update per
/// step until delivery. Deterministic in (inputs, params.seed).
UcbEpisodeResult run_ucb_episode(const RolloutConfig& config, const DefectTimeline& timeline,
                                 const Weights& weights, const Hyperparams& params,
                                 const UcbOptions& options = {});

/// Replays the same timeline `episodes` times, carrying the Q-table and the
/// tie-breaking RNG across episodes. Returns the last episode's result.
/// A single episode is the reference setup.
UcbEpisodeResult run_ucb_episodes(const RolloutConfig& config, const DefectTimeline& timeline,
                                  const Weights& weights, const Hyperparams& params, int episodes,
                                  const UcbOptions& options = {});

/// Failure-free sojourn thresholds, one per non-Ops stage
/// (Dev -> i1, i1 -> i2, ..., im -> Ops).
class PolicyVector {
public:
    /// Throws std::invalid_argument if empty or any threshold < 1.
    explicit PolicyVector(std::vector<std::int64_t> thresholds);
    PolicyVector(std::int64_t t_dev_to_i1, std::int64_t t_i1_to_ops)
        : PolicyVector(std::vector<std::int64_t>{t_dev_to_i1, t_i1_to_ops}) {}

    std::span<const std::int64_t> thresholds() const noexcept { return thresholds_; }
    std::int64_t threshold(std::size_t stage_ordinal) const { return thresholds_.at(stage_ordinal); }
    /// "t1/t2/...".
    std::string label() const;

    bool operator==(const PolicyVector&) const = default;

private:
    std::vector<std::int64_t> thresholds_;
};

/// Advance once the current stage has had `threshold` failure-free steps
/// (sojourn_clock >= threshold). With no defects the delivery time is exactly
/// the sum of the thresholds.
Action threshold_action(const EnvState& state, const RolloutConfig& config, const PolicyVector& policy);

/// Throws std::invalid_argument if the policy does not have m + 1 thresholds.
EpisodeOutcome run_threshold_episode(const RolloutConfig& config, const DefectTimeline& timeline,
                                     const PolicyVector& policy, std::vector<TraceRow>* trace = nullptr);

struct NaiveResult {
    PolicyVector policy;
    EpisodeOutcome outcome;
};

/// Runs every policy of the grid independently, in grid order. `workers`
/// threads share the work; 0 selects the hardware concurrency. The result
/// does not depend on `workers`.
std::vector<NaiveResult> enumerate_naive(const RolloutConfig& config, const DefectTimeline& timeline,
                                         std::span<const PolicyVector> grid, unsigned workers = 1);

/// Cross product of per-stage threshold axes, first axis varying slowest.
std::vector<PolicyVector> policy_grid(std::span<const std::vector<std::int64_t>> axes);

/// {1, 100, 200, ..., 10000}.
std::vector<std::int64_t> reference_threshold_axis();

}  // namespace rollout
