#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rollout/defect_data.hpp"

namespace rollout {

enum class Action : std::uint8_t { Stay, Advance };

std::string_view to_string(Action a) noexcept;

/// A node of the rollout state machine: Dev, partial rollout stage j (1..m), or Ops.
class Stage {
public:
    enum class Kind : std::uint8_t { Dev, Rollout, Ops };

    static constexpr Stage dev() noexcept { return Stage(Kind::Dev, 0); }
    static constexpr Stage ops() noexcept { return Stage(Kind::Ops, 0); }
    /// j is 1-based. Throws std::invalid_argument for j < 1.
    static Stage rollout(int j);

    constexpr Kind kind() const noexcept { return kind_; }
    /// Rollout stage number j; 0 for Dev and Ops.
    constexpr int rollout_index() const noexcept { return index_; }
    constexpr bool is_dev() const noexcept { return kind_ == Kind::Dev; }
    constexpr bool is_ops() const noexcept { return kind_ == Kind::Ops; }

    /// "Dev", "i1".."im", "Ops".
    std::string name() const;

    constexpr bool operator==(const Stage&) const noexcept = default;

private:
    constexpr Stage(Kind kind, int index) noexcept : kind_(kind), index_(index) {}
    Kind kind_;
    int index_;
};

/// Staged-rollout structure: user counts per state and mean time to resolve.
class RolloutConfig {
public:
    /// Throws std::invalid_argument unless
    /// 1 <= n_dev < stage_users[0] < ... < stage_users[m-1] < n_ops, m >= 1, mttr >= 0.
    RolloutConfig(std::int64_t n_dev, std::vector<std::int64_t> stage_users, std::int64_t n_ops,
                  double mttr);

    /// Reference setup: n_dev=50, one stage of 1000 users, n_ops=10000, MTTR=10.
    static RolloutConfig reference();

    std::int64_t n_dev() const noexcept { return n_dev_; }
    std::span<const std::int64_t> stage_users() const noexcept { return stage_users_; }
    std::int64_t n_ops() const noexcept { return n_ops_; }
    double mttr() const noexcept { return mttr_; }
    int num_stages() const noexcept { return static_cast<int>(stage_users_.size()); }

    std::int64_t users(Stage s) const;
    /// users(s) / n_ops, the fraction of the user base exposed in s.
    double fraction(Stage s) const;

    /// mttr * exposed_user_sum / n_ops: the downtime of failures whose
    /// exposed user counts sum to exposed_user_sum. Integer summation keeps
    /// the result independent of failure order.
    double downtime_for(std::int64_t exposed_user_sum) const noexcept;

    /// Dense index: Dev=0, Rollout(j)=j, Ops=m+1.
    std::size_t ordinal(Stage s) const;
    Stage stage_at(std::size_t ordinal) const;
    std::size_t num_ordinals() const noexcept { return stage_users_.size() + 2; }

    /// One stage forward; Ops maps to itself.
    Stage next(Stage s) const;

    /// Throws std::invalid_argument if s is a rollout stage beyond m.
    void check(Stage s) const;

    bool operator==(const RolloutConfig&) const = default;

private:
    std::int64_t n_dev_;
    std::vector<std::int64_t> stage_users_;
    std::int64_t n_ops_;
    double mttr_;
};

/// users(stage) / n_dev; 1 for Dev.
double acceleration_factor(Stage stage, const RolloutConfig& config);

struct EnvState {
    Stage stage = Stage::dev();
    std::int64_t wall_clock = 0;
    double exposure = 0.0;
    std::size_t defects_found = 0;
    /// Failure-free steps since entering the stage or the last failure,
    /// counting the entering step.
    std::int64_t sojourn_clock = 0;
    double downtime_acc = 0.0;
    /// Sum of users(stage) over failures outside Dev.
    std::int64_t exposed_users = 0;
    bool delivered = false;

    bool operator==(const EnvState&) const = default;
};

struct StepOutcome {
    bool failure_occurred = false;
    std::optional<Stage> failure_stage;
    double delta_downtime = 0.0;
    int delta_delivery = 0;
    bool terminal = false;
};

struct StepResult {
    EnvState state;
    StepOutcome outcome;
};

EnvState reset(const RolloutConfig& config, const DefectTimeline& timeline);

/// Advances the simulation by one wall-clock unit. Advance takes effect at
/// the start of the step and is a no-op in Ops. At most one defect is
/// discovered per step; a failure outside Dev sends the rollout back to Dev.
/// Throws std::logic_error when called on a delivered state.
StepResult step(const EnvState& state, Action action, const RolloutConfig& config,
                const DefectTimeline& timeline);

/// Actions with an effect in `stage`: {Stay} in Ops, {Stay, Advance} elsewhere.
std::span<const Action> available_actions(Stage stage) noexcept;

/// Objective weights; downtime weight is always 1 - w_delivery.
class Weights {
public:
    /// Throws std::invalid_argument unless 0 < w_delivery < 1.
    explicit Weights(double w_delivery);
    double delivery() const noexcept { return w_delivery_; }
    double downtime() const noexcept { return w_downtime_; }

private:
    double w_delivery_;
    double w_downtime_;
};

/// Divisors applied to each objective's increment before weighting.
/// Unit scales (the default) leave the objectives in their native units.
struct RewardScale {
    double delivery = 1.0;
    double downtime = 1.0;

    /// Leaves delivery in steps and rescales downtime so that the worst case
    /// (every defect found in Ops, mttr * count) weighs as much as the
    /// timeline horizon (last defect time). Unit scales for an empty timeline
    /// or zero mttr.
    static RewardScale normalized(const RolloutConfig& config, const DefectTimeline& timeline);
};

/// -(w0 * delta_delivery + w1 * delta_downtime), each increment divided by its scale.
double scalarized_reward(const StepOutcome& outcome, const Weights& weights,
                         const RewardScale& scale = {});

struct TraceRow {
    std::int64_t step;
    Stage stage;  // stage occupied during the step (post-action)
    Action action;
    double exposure;
    std::size_t defects_found;
    bool failure;
    double delta_downtime;
    double reward;
};

void write_trace_csv(std::ostream& os, std::span<const TraceRow> trace);

struct EpisodeOutcome {
    double downtime = 0.0;
    /// Wall-clock time at which Ops was entered with every defect found: the
    /// sum of delta_delivery, one less than the number of steps taken.
    double delivery_time = 0.0;
    /// Indexed by RolloutConfig::ordinal.
    std::vector<std::int64_t> failures_by_stage;
    std::string policy_label;

    /// mttr * sum over non-Dev failures of fraction(stage).
    static double downtime_from_failures(std::span<const std::int64_t> failures_by_stage,
                                         const RolloutConfig& config);
};

/// Accumulates step outcomes into an EpisodeOutcome.
class EpisodeRecorder {
public:
    EpisodeRecorder(const RolloutConfig& config, std::string label);
    void record(const StepResult& result);
    /// Throws std::logic_error if the episode has not terminated.
    EpisodeOutcome finish(const EnvState& final_state) const;

private:
    const RolloutConfig* config_;
    std::int64_t delivery_ = 0;
    EpisodeOutcome outcome_;
};

}  // namespace rollout
