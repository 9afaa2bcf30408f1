#include "rollout/rollout_sim.hpp"

#include <array>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "rollout/text.hpp"

namespace rollout {

std::string_view to_string(Action a) noexcept { return a == Action::Stay ? "stay" : "advance"; }

Stage Stage::rollout(int j) {
    if (j < 1) throw std::invalid_argument("rollout stage index must be >= 1");
    return Stage(Kind::Rollout, j);
}

std::string Stage::name() const {
    switch (kind_) {
        case Kind::Dev: return "Dev";
        case Kind::Ops: return "Ops";
        case Kind::Rollout: break;
    }
    return "i" + std::to_string(index_);
}

RolloutConfig::RolloutConfig(std::int64_t n_dev, std::vector<std::int64_t> stage_users,
                             std::int64_t n_ops, double mttr)
    : n_dev_(n_dev), stage_users_(std::move(stage_users)), n_ops_(n_ops), mttr_(mttr) {
    if (n_dev_ < 1) throw std::invalid_argument("n_dev must be >= 1");
    if (stage_users_.empty()) throw std::invalid_argument("at least one rollout stage is required");
    std::int64_t prev = n_dev_;
    for (auto u : stage_users_) {
        if (u <= prev)
            throw std::invalid_argument("user counts must strictly increase from Dev through each stage");
        prev = u;
    }
    if (n_ops_ <= prev) throw std::invalid_argument("n_ops must exceed the last stage's users");
    if (!(mttr_ >= 0.0) || !std::isfinite(mttr_)) throw std::invalid_argument("mttr must be finite and >= 0");
}

RolloutConfig RolloutConfig::reference() { return RolloutConfig(50, {1000}, 10000, 10.0); }

void RolloutConfig::check(Stage s) const {
    if (s.kind() == Stage::Kind::Rollout && s.rollout_index() > num_stages())
        throw std::invalid_argument("rollout stage " + s.name() + " does not exist");
}

std::int64_t RolloutConfig::users(Stage s) const {
    switch (s.kind()) {
        case Stage::Kind::Dev: return n_dev_;
        case Stage::Kind::Ops: return n_ops_;
        case Stage::Kind::Rollout: break;
    }
    check(s);
    return stage_users_[static_cast<std::size_t>(s.rollout_index() - 1)];
}

double RolloutConfig::fraction(Stage s) const {
    return static_cast<double>(users(s)) / static_cast<double>(n_ops_);
}

double RolloutConfig::downtime_for(std::int64_t exposed_user_sum) const noexcept {
    return mttr_ * static_cast<double>(exposed_user_sum) / static_cast<double>(n_ops_);
}

std::size_t RolloutConfig::ordinal(Stage s) const {
    switch (s.kind()) {
        case Stage::Kind::Dev: return 0;
        case Stage::Kind::Ops: return stage_users_.size() + 1;
        case Stage::Kind::Rollout: break;
    }
    check(s);
    return static_cast<std::size_t>(s.rollout_index());
}

Stage RolloutConfig::stage_at(std::size_t ordinal) const {
    if (ordinal == 0) return Stage::dev();
    if (ordinal <= stage_users_.size()) return Stage::rollout(static_cast<int>(ordinal));
    if (ordinal == stage_users_.size() + 1) return Stage::ops();
    throw std::out_of_range("stage ordinal out of range");
}

Stage RolloutConfig::next(Stage s) const { return s.is_ops() ? s : stage_at(ordinal(s) + 1); }

double acceleration_factor(Stage stage, const RolloutConfig& config) {
    return static_cast<double>(config.users(stage)) / static_cast<double>(config.n_dev());
}

EnvState reset(const RolloutConfig&, const DefectTimeline&) { return EnvState{}; }

StepResult step(const EnvState& state, Action action, const RolloutConfig& config,
                const DefectTimeline& timeline) {
    if (state.delivered) throw std::logic_error("step called on a delivered episode");

    StepResult result{state, {}};
    EnvState& s = result.state;
    StepOutcome& out = result.outcome;

    if (action == Action::Advance && !s.stage.is_ops()) {
        s.stage = config.next(s.stage);
        s.sojourn_clock = 0;
    }
    s.wall_clock += 1;

    const double reach = s.exposure + acceleration_factor(s.stage, config);
    if (s.defects_found < timeline.count() && timeline[s.defects_found] <= reach) {
        s.exposure = timeline[s.defects_found];
        s.defects_found += 1;
        s.sojourn_clock = 0;
        out.failure_occurred = true;
        out.failure_stage = s.stage;
        if (!s.stage.is_dev()) {
            const auto exposed = config.users(s.stage);
            out.delta_downtime = config.downtime_for(exposed);
            s.exposed_users += exposed;
            s.downtime_acc = config.downtime_for(s.exposed_users);
            s.stage = Stage::dev();
        }
    } else {
        s.exposure = reach;
        s.sojourn_clock += 1;
    }

    // The delivering Advance takes effect at the start of the step, so that
    // step adds no delivery time.
    out.terminal = s.stage.is_ops() && s.defects_found == timeline.count();
    out.delta_delivery = out.terminal ? 0 : 1;
    s.delivered = out.terminal;
    return result;
}

std::span<const Action> available_actions(Stage stage) noexcept {
    static constexpr std::array<Action, 2> both{Action::Stay, Action::Advance};
    return stage.is_ops() ? std::span<const Action>(both.data(), 1) : std::span<const Action>(both);
}

Weights::Weights(double w_delivery) : w_delivery_(w_delivery), w_downtime_(1.0 - w_delivery) {
    if (!(w_delivery > 0.0 && w_delivery < 1.0))
        throw std::invalid_argument("delivery weight must lie in (0, 1)");
}

RewardScale RewardScale::normalized(const RolloutConfig& config, const DefectTimeline& timeline) {
    RewardScale scale;
    const double worst = config.mttr() * static_cast<double>(timeline.count());
    if (worst > 0.0) scale.downtime = worst / timeline.times().back();
    return scale;
}

double scalarized_reward(const StepOutcome& outcome, const Weights& weights, const RewardScale& scale) {
    return -(weights.delivery() * outcome.delta_delivery / scale.delivery +
             weights.downtime() * outcome.delta_downtime / scale.downtime);
}

void write_trace_csv(std::ostream& os, std::span<const TraceRow> trace) {
    os << "step,stage,action,exposure,defects_found,failure,delta_downtime,reward\n";
    for (const auto& r : trace) {
        os << r.step << ',' << r.stage.name() << ',' << to_string(r.action) << ','
           << text::format_number(r.exposure) << ',' << r.defects_found << ',' << (r.failure ? 1 : 0)
           << ',' << text::format_number(r.delta_downtime) << ',' << text::format_number(r.reward)
           << '\n';
    }
}

double EpisodeOutcome::downtime_from_failures(std::span<const std::int64_t> failures_by_stage,
                                              const RolloutConfig& config) {
    std::int64_t exposed = 0;
    for (std::size_t i = 1; i < failures_by_stage.size(); ++i)
        exposed += failures_by_stage[i] * config.users(config.stage_at(i));
    return config.downtime_for(exposed);
}

EpisodeRecorder::EpisodeRecorder(const RolloutConfig& config, std::string label) : config_(&config) {
    outcome_.failures_by_stage.assign(config.num_ordinals(), 0);
    outcome_.policy_label = std::move(label);
}

void EpisodeRecorder::record(const StepResult& result) {
    if (result.outcome.failure_stage)
        outcome_.failures_by_stage[config_->ordinal(*result.outcome.failure_stage)] += 1;
    delivery_ += result.outcome.delta_delivery;
}

EpisodeOutcome EpisodeRecorder::finish(const EnvState& final_state) const {
    if (!final_state.delivered) throw std::logic_error("episode has not been delivered");
    EpisodeOutcome out = outcome_;
    out.downtime = final_state.downtime_acc;
    out.delivery_time = static_cast<double>(delivery_);
    return out;
}

}  // namespace rollout
