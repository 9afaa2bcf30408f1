#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rollout {

enum class Objective { Downtime, DeliveryTime };

std::string_view to_string(Objective o) noexcept;
Objective other(Objective o) noexcept;

struct OutcomePoint {
    double downtime = 0.0;
    double delivery_time = 0.0;
    std::string label;

    double value(Objective o) const noexcept { return o == Objective::Downtime ? downtime : delivery_time; }
};

/// True when a is no worse than b in both objectives and better in one.
bool dominates(const OutcomePoint& a, const OutcomePoint& b) noexcept;

/// Non-dominated points, ascending in downtime and strictly descending in
/// delivery time. Only pareto_front constructs one.
class ParetoFront {
public:
    std::span<const OutcomePoint> points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    const OutcomePoint& operator[](std::size_t i) const { return points_[i]; }

    double min(Objective o) const;
    double max(Objective o) const;

private:
    friend ParetoFront pareto_front(std::span<const OutcomePoint> points);
    explicit ParetoFront(std::vector<OutcomePoint> points) : points_(std::move(points)) {}
    std::vector<OutcomePoint> points_;
};

/// Non-dominated subset (minimizing both objectives). Identical tuples
/// collapse to the first occurrence. Throws std::domain_error on empty input
/// and std::invalid_argument on negative or non-finite objectives.
ParetoFront pareto_front(std::span<const OutcomePoint> points);

/// (max - min of approach) / (max - min of naive) on `objective`.
/// Throws std::domain_error for empty inputs or a zero naive span.
double range_metric(std::span<const OutcomePoint> approach, std::span<const OutcomePoint> naive,
                    Objective objective);

/// Value of the other objective on the piecewise-linear front at
/// `fixed_objective == value`. No extrapolation: values outside the front's
/// span throw std::out_of_range.
double interpolate_naive(const ParetoFront& front, Objective fixed_objective, double value);

/// A point whose ratio against the naive front is undefined.
class NonComparableError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// point.value(objective) / naive value at the same coordinate of the other
/// objective. Throws NonComparableError when the coordinate lies outside the
/// front or the naive value is zero while the point's is not.
double suboptimality(const OutcomePoint& point, const ParetoFront& naive_front, Objective objective);

struct SuboptimalitySummary {
    double mean = 0.0;
    std::size_t n_points = 0;    // comparable points averaged
    std::size_t n_excluded = 0;  // non-comparable points skipped
};

/// Mean suboptimality over comparable points. Throws std::domain_error when
/// no point is comparable.
SuboptimalitySummary average_suboptimality(std::span<const OutcomePoint> points, const ParetoFront& naive_front,
                                           Objective objective);

}  // namespace rollout
