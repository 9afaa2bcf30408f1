#include "rollout/defect_data.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "rollout/rng.hpp"
#include "rollout/text.hpp"

namespace rollout {

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

ValidationError::ValidationError(std::size_t index, const std::string& what)
    : std::invalid_argument("index " + std::to_string(index) + ": " + what), index_(index) {}

DefectTimeline DefectTimeline::from_times(std::vector<double> times) {
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i])) throw ValidationError(i, "failure time is not finite");
        if (times[i] <= 0.0) throw ValidationError(i, "failure time must be positive");
        if (i > 0 && times[i] <= times[i - 1])
            throw ValidationError(i, "failure times must be strictly increasing");
    }
    return DefectTimeline(std::move(times));
}

DefectTimeline parse_failure_times(std::string_view input, bool allow_empty) {
    std::vector<double> times;
    std::size_t line_no = 0;
    for (auto raw : text::split(input, '\n')) {
        ++line_no;
        const auto line = text::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto value = text::parse_double(line);
        if (!value) throw ParseError(line_no, "not a number: '" + std::string(line) + "'");
        times.push_back(*value);
    }
    if (times.empty() && !allow_empty) throw EmptyTimelineError();
    return DefectTimeline::from_times(std::move(times));
}

std::string serialize(const DefectTimeline& timeline, std::string_view header) {
    std::string out;
    for (auto line : text::split(header, '\n')) {
        if (!line.empty()) out.append("# ").append(line).append("\n");
    }
    for (double t : timeline.times()) out.append(text::format_number(t)).append("\n");
    return out;
}

DefectTimeline load_failure_times(const std::filesystem::path& path, bool allow_empty) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open failure-time file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_failure_times(buf.str(), allow_empty);
}

void save_failure_times(const std::filesystem::path& path, const DefectTimeline& timeline,
                        std::string_view header) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write failure-time file: " + path.string());
    out << serialize(timeline, header);
}

DefectTimeline generate_nhpp_timeline(double a, double b, double horizon, std::uint64_t seed) {
    if (!(a > 0.0) || !(b > 0.0) || !(horizon > 0.0) || !std::isfinite(a) || !std::isfinite(b) ||
        std::isnan(horizon))
        throw std::domain_error("NHPP parameters a, b and horizon must be positive");

    // Time-transform a unit-rate Poisson process through the inverse mean
    // value function m^-1(s) = -log(1 - s/a) / b.
    const double mean_total = -a * std::expm1(-b * horizon);
    Rng rng(seed);
    std::vector<double> times;
    double s = 0.0;
    while (true) {
        s -= std::log(rng.uniform_open());
        if (s >= mean_total) break;
        double t = -std::log1p(-s / a) / b;
        if (!times.empty() && t <= times.back()) t = std::nextafter(times.back(), HUGE_VAL);
        if (t <= 0.0) t = std::nextafter(0.0, 1.0);
        times.push_back(t);
    }
    return DefectTimeline::from_times(std::move(times));
}

}  // namespace rollout
