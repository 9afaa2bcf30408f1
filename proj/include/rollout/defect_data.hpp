#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rollout {

/// A line in a failure-time file that is not a number.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A failure-time sequence that is not strictly increasing and positive.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::size_t index, const std::string& what);
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class EmptyTimelineError : public std::invalid_argument {
public:
    EmptyTimelineError() : std::invalid_argument("failure-time input contains no data lines") {}
};

/// Ordered defect-discovery times, in Dev-equivalent exposure units.
///
/// Times are strictly increasing and positive. An empty timeline is a valid
/// value (a release without latent defects).
class DefectTimeline {
public:
    DefectTimeline() = default;

    /// Throws ValidationError naming the first offending index.
    static DefectTimeline from_times(std::vector<double> times);

    std::span<const double> times() const noexcept { return times_; }
    std::size_t count() const noexcept { return times_.size(); }
    bool empty() const noexcept { return times_.empty(); }
    double operator[](std::size_t i) const { return times_[i]; }

    bool operator==(const DefectTimeline&) const = default;

private:
    explicit DefectTimeline(std::vector<double> times) : times_(std::move(times)) {}
    std::vector<double> times_;
};

/// Parses one failure time per non-empty line; `#` lines are comments.
/// Input without data lines throws EmptyTimelineError unless allow_empty.
DefectTimeline parse_failure_times(std::string_view text, bool allow_empty = false);

/// Inverse of parse_failure_times (shortest round-trip decimal per line).
std::string serialize(const DefectTimeline& timeline, std::string_view header = {});

DefectTimeline load_failure_times(const std::filesystem::path& path, bool allow_empty = false);
void save_failure_times(const std::filesystem::path& path, const DefectTimeline& timeline,
                        std::string_view header = {});

/// Samples a Goel-Okumoto NHPP with mean value function a(1 - exp(-b t)) on
/// (0, horizon]. Pure function of its arguments.
DefectTimeline generate_nhpp_timeline(double a, double b, double horizon, std::uint64_t seed);

}  // namespace rollout
