#include "rollout/agents.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "rollout/parallel.hpp"
#include "rollout/text.hpp"

namespace rollout {

void Hyperparams::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("c must be positive");
}

SojournBuckets::SojournBuckets(std::vector<std::int64_t> bounds) : bounds_(std::move(bounds)) {
    for (std::size_t i = 0; i < bounds_.size(); ++i) {
        if (bounds_[i] < 1) throw std::invalid_argument("bucket bounds must be >= 1");
        if (i > 0 && bounds_[i] <= bounds_[i - 1])
            throw std::invalid_argument("bucket bounds must be strictly increasing");
    }
}

SojournBuckets SojournBuckets::standard() { return SojournBuckets({1, 2, 4, 8, 16, 32, 64, 128, 256}); }

std::size_t SojournBuckets::bucket(std::int64_t sojourn) const noexcept {
    return static_cast<std::size_t>(std::upper_bound(bounds_.begin(), bounds_.end(), sojourn) - bounds_.begin());
}

AgentStateKey observe(const EnvState& state, const RolloutConfig& config, const SojournBuckets& buckets) {
    return {config.ordinal(state.stage), buckets.bucket(state.sojourn_clock)};
}

QTable::QTable(std::size_t num_stages, std::size_t num_buckets)
    : num_stages_(num_stages), num_buckets_(num_buckets), entries_(num_stages * num_buckets * 2) {
    if (num_stages == 0 || num_buckets == 0) throw std::invalid_argument("QTable dimensions must be positive");
}

std::size_t QTable::index(AgentStateKey s, Action a) const {
    if (s.stage >= num_stages_ || s.bucket >= num_buckets_) throw std::out_of_range("state key outside Q-table");
    return (s.stage * num_buckets_ + s.bucket) * 2 + static_cast<std::size_t>(a);
}

double QTable::max_q(AgentStateKey s, std::span<const Action> actions) const {
    if (actions.empty()) throw std::invalid_argument("max_q over an empty action set");
    double best = -std::numeric_limits<double>::infinity();
    for (auto a : actions) best = std::max(best, q(s, a));
    return best;
}

void QTable::write_csv(std::ostream& os, const RolloutConfig& config) const {
    os << "stage,bucket,action,q,visits\n";
    for (std::size_t st = 0; st < num_stages_; ++st) {
        for (std::size_t b = 0; b < num_buckets_; ++b) {
            for (auto a : {Action::Stay, Action::Advance}) {
                const auto& e = entry({st, b}, a);
                os << config.stage_at(st).name() << ',' << b << ',' << to_string(a) << ','
                   << text::format_number(e.q) << ',' << e.visits << '\n';
            }
        }
    }
}

void q_update(QTable& table, AgentStateKey s, Action a, double reward, std::optional<AgentStateKey> next,
              std::span<const Action> next_actions, const Hyperparams& params) {
    if (!std::isfinite(reward)) throw std::domain_error("reward must be finite");
    const double bootstrap = next ? table.max_q(*next, next_actions) : 0.0;
    auto& e = table.entries_[table.index(s, a)];
    e.q = e.q + params.alpha * (reward + params.gamma * bootstrap - e.q);
    e.visits += 1;
    table.global_step_ += 1;
}

double ucb_score(const QTable& table, AgentStateKey s, Action a, double c) {
    const auto n = table.visits(s, a);
    if (c == 0.0) return table.q(s, a);
    if (n == 0) return std::numeric_limits<double>::infinity();
    const double t = static_cast<double>(table.global_step());
    const double log_term = std::max(0.0, std::log((t + 1.0) / static_cast<double>(n)));
    return table.q(s, a) + c * std::sqrt(log_term);
}

Action ucb_select(const QTable& table, AgentStateKey s, std::span<const Action> actions, double c, Rng& rng) {
    if (actions.empty()) throw std::invalid_argument("ucb_select needs at least one action");
    std::array<Action, 2> best{};
    std::size_t n_best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (auto a : actions) {
        const double score = ucb_score(table, s, a, c);
        if (n_best == 0 || score > best_score) {
            best_score = score;
            best[0] = a;
            n_best = 1;
        } else if (score == best_score) {
            best[n_best++] = a;
        }
    }
    return n_best == 1 ? best[0] : best[rng.index(n_best)];
}

namespace {

// Shared episode loop; the table and RNG persist across calls.
EpisodeOutcome ucb_episode_into(QTable& table, Rng& rng, const RolloutConfig& config,
                                const DefectTimeline& timeline, const Weights& weights,
                                const Hyperparams& params, const UcbOptions& options,
                                std::vector<TraceRow>* trace) {
    EpisodeRecorder recorder(config, "w0=" + text::format_number(weights.delivery()));
    EnvState state = reset(config, timeline);
    AgentStateKey key = observe(state, config, options.buckets);
    while (!state.delivered) {
        if (state.wall_clock >= options.max_steps)
            throw std::runtime_error("UCB episode exceeded the step limit");
        const Action action = ucb_select(table, key, available_actions(state.stage), params.c, rng);
        const StepResult result = step(state, action, config, timeline);
        const double reward = scalarized_reward(result.outcome, weights, options.scale);
        const AgentStateKey next_key = observe(result.state, config, options.buckets);
        if (result.outcome.terminal)
            q_update(table, key, action, reward, std::nullopt, {}, params);
        else
            q_update(table, key, action, reward, next_key, available_actions(result.state.stage), params);

        recorder.record(result);
        if (trace) {
            trace->push_back({result.state.wall_clock, result.outcome.failure_stage.value_or(result.state.stage),
                              action, result.state.exposure, result.state.defects_found,
                              result.outcome.failure_occurred, result.outcome.delta_downtime, reward});
        }
        state = result.state;
        key = next_key;
    }
    return recorder.finish(state);
}

}  // namespace

UcbEpisodeResult run_ucb_episode(const RolloutConfig& config, const DefectTimeline& timeline,
                                 const Weights& weights, const Hyperparams& params, const UcbOptions& options) {
    return run_ucb_episodes(config, timeline, weights, params, 1, options);
}

UcbEpisodeResult run_ucb_episodes(const RolloutConfig& config, const DefectTimeline& timeline,
                                  const Weights& weights, const Hyperparams& params, int episodes,
                                  const UcbOptions& options) {
    params.validate();
    if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
    UcbEpisodeResult result{{}, QTable(config.num_ordinals(), options.buckets.count()), {}};
    Rng rng(params.seed);
    for (int e = 0; e < episodes; ++e) {
        result.trace.clear();
        result.outcome = ucb_episode_into(result.table, rng, config, timeline, weights, params, options,
                                          options.record_trace ? &result.trace : nullptr);
    }
    return result;
}

PolicyVector::PolicyVector(std::vector<std::int64_t> thresholds) : thresholds_(std::move(thresholds)) {
    if (thresholds_.empty()) throw std::invalid_argument("policy vector needs at least one threshold");
    for (auto t : thresholds_)
        if (t < 1) throw std::invalid_argument("policy thresholds must be >= 1");
}

std::string PolicyVector::label() const {
    std::string out;
    for (std::size_t i = 0; i < thresholds_.size(); ++i) {
        if (i) out += '/';
        out += std::to_string(thresholds_[i]);
    }
    return out;
}

Action threshold_action(const EnvState& state, const RolloutConfig& config, const PolicyVector& policy) {
    if (state.stage.is_ops()) return Action::Stay;
    const auto limit = policy.threshold(config.ordinal(state.stage));
    return state.sojourn_clock >= limit ? Action::Advance : Action::Stay;
}

EpisodeOutcome run_threshold_episode(const RolloutConfig& config, const DefectTimeline& timeline,
                                     const PolicyVector& policy, std::vector<TraceRow>* trace) {
    if (policy.thresholds().size() != static_cast<std::size_t>(config.num_stages()) + 1)
        throw std::invalid_argument("policy vector needs one threshold per non-Ops stage");
    EpisodeRecorder recorder(config, policy.label());
    EnvState state = reset(config, timeline);
    while (!state.delivered) {
        const Action action = threshold_action(state, config, policy);
        const StepResult result = step(state, action, config, timeline);
        recorder.record(result);
        if (trace) {
            trace->push_back({result.state.wall_clock, result.outcome.failure_stage.value_or(result.state.stage),
                              action, result.state.exposure, result.state.defects_found,
                              result.outcome.failure_occurred, result.outcome.delta_downtime, 0.0});
        }
        state = result.state;
    }
    return recorder.finish(state);
}

std::vector<NaiveResult> enumerate_naive(const RolloutConfig& config, const DefectTimeline& timeline,
                                         std::span<const PolicyVector> grid, unsigned workers) {
    if (grid.empty()) throw std::invalid_argument("policy grid must not be empty");
    std::vector<std::optional<NaiveResult>> slots(grid.size());
    parallel_for(grid.size(), workers, [&](std::size_t i) {
        slots[i].emplace(NaiveResult{grid[i], run_threshold_episode(config, timeline, grid[i])});
    });

    std::vector<NaiveResult> results;
    results.reserve(slots.size());
    for (auto& s : slots) results.push_back(std::move(*s));
    return results;
}

std::vector<PolicyVector> policy_grid(std::span<const std::vector<std::int64_t>> axes) {
    if (axes.empty()) throw std::invalid_argument("policy grid needs at least one axis");
    std::vector<std::vector<std::int64_t>> rows{{}};
    for (const auto& axis : axes) {
        if (axis.empty()) throw std::invalid_argument("policy grid axes must not be empty");
        std::vector<std::vector<std::int64_t>> next;
        next.reserve(rows.size() * axis.size());
        for (const auto& row : rows) {
            for (auto v : axis) {
                next.push_back(row);
                next.back().push_back(v);
            }
        }
        rows = std::move(next);
    }
    std::vector<PolicyVector> grid;
    grid.reserve(rows.size());
    for (auto& r : rows) grid.emplace_back(std::move(r));
    return grid;
}

std::vector<std::int64_t> reference_threshold_axis() {
    std::vector<std::int64_t> axis{1};
    for (std::int64_t t = 100; t <= 10000; t += 100) axis.push_back(t);
    return axis;
}

}  // namespace rollout
