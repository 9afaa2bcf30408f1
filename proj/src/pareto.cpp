#include "rollout/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rollout {

std::string_view to_string(Objective o) noexcept {
    return o == Objective::Downtime ? "downtime" : "delivery_time";
}

Objective other(Objective o) noexcept {
    return o == Objective::Downtime ? Objective::DeliveryTime : Objective::Downtime;
}

bool dominates(const OutcomePoint& a, const OutcomePoint& b) noexcept {
    return a.downtime <= b.downtime && a.delivery_time <= b.delivery_time &&
           (a.downtime < b.downtime || a.delivery_time < b.delivery_time);
}

double ParetoFront::min(Objective o) const {
    return o == Objective::Downtime ? points_.front().downtime : points_.back().delivery_time;
}

double ParetoFront::max(Objective o) const {
    return o == Objective::Downtime ? points_.back().downtime : points_.front().delivery_time;
}

ParetoFront pareto_front(std::span<const OutcomePoint> points) {
    if (points.empty()) throw std::domain_error("pareto_front of an empty point set");
    for (const auto& p : points) {
        if (!std::isfinite(p.downtime) || !std::isfinite(p.delivery_time) || p.downtime < 0.0 ||
            p.delivery_time < 0.0)
            throw std::invalid_argument("outcome objectives must be finite and non-negative");
    }

    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points[a].downtime != points[b].downtime) return points[a].downtime < points[b].downtime;
        return points[a].delivery_time < points[b].delivery_time;
    });

    // After the sort a point survives iff its delivery time beats every point
    // with lower-or-equal downtime seen so far.
    std::vector<OutcomePoint> front;
    double best_delivery = std::numeric_limits<double>::infinity();
    for (auto i : order) {
        if (points[i].delivery_time < best_delivery) {
            best_delivery = points[i].delivery_time;
            front.push_back(points[i]);
        }
    }
    return ParetoFront(std::move(front));
}

double range_metric(std::span<const OutcomePoint> approach, std::span<const OutcomePoint> naive,
                    Objective objective) {
    if (approach.empty() || naive.empty()) throw std::domain_error("range_metric needs non-empty point sets");
    auto span_of = [objective](std::span<const OutcomePoint> pts) {
        auto [lo, hi] = std::minmax_element(pts.begin(), pts.end(), [objective](const auto& a, const auto& b) {
            return a.value(objective) < b.value(objective);
        });
        return hi->value(objective) - lo->value(objective);
    };
    const double naive_span = span_of(naive);
    if (naive_span == 0.0) throw std::domain_error("naive range is degenerate on " + std::string(to_string(objective)));
    return span_of(approach) / naive_span;
}

double interpolate_naive(const ParetoFront& front, Objective fixed_objective, double value) {
    const auto pts = front.points();
    const Objective target = other(fixed_objective);
    if (!(value >= front.min(fixed_objective) && value <= front.max(fixed_objective)))
        throw std::out_of_range("value lies outside the naive front's " + std::string(to_string(fixed_objective)) +
                                " span");

    // Visit the front in ascending order of the fixed objective.
    const bool ascending = fixed_objective == Objective::Downtime;
    auto at = [&](std::size_t k) -> const OutcomePoint& { return ascending ? pts[k] : pts[pts.size() - 1 - k]; };

    std::size_t hi = 0;
    while (at(hi).value(fixed_objective) < value) ++hi;
    const auto& upper = at(hi);
    if (upper.value(fixed_objective) == value) return upper.value(target);
    const auto& lower = at(hi - 1);
    const double x0 = lower.value(fixed_objective);
    const double x1 = upper.value(fixed_objective);
    const double y0 = lower.value(target);
    const double y1 = upper.value(target);
    return y0 + (y1 - y0) * (value - x0) / (x1 - x0);
}

double suboptimality(const OutcomePoint& point, const ParetoFront& naive_front, Objective objective) {
    const Objective held = other(objective);
    double reference = 0.0;
    try {
        reference = interpolate_naive(naive_front, held, point.value(held));
    } catch (const std::out_of_range& e) {
        throw NonComparableError(e.what());
    }
    const double achieved = point.value(objective);
    if (reference == 0.0) {
        if (achieved == 0.0) return 1.0;
        throw NonComparableError("naive reference value is zero");
    }
    return achieved / reference;
}

SuboptimalitySummary average_suboptimality(std::span<const OutcomePoint> points, const ParetoFront& naive_front,
                                           Objective objective) {
    SuboptimalitySummary summary;
    double sum = 0.0;
    for (const auto& p : points) {
        try {
            sum += suboptimality(p, naive_front, objective);
            summary.n_points += 1;
        } catch (const NonComparableError&) {
            summary.n_excluded += 1;
        }
    }
    if (summary.n_points == 0)
        throw std::domain_error("no point is comparable with the naive front on " + std::string(to_string(objective)));
    summary.mean = sum / static_cast<double>(summary.n_points);
    return summary;
}

}  // namespace rollout
