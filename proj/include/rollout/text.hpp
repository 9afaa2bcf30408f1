#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rollout::text {

std::string_view trim(std::string_view s) noexcept;

/// Shortest decimal string that parses back to exactly `value`.
std::string format_number(double value);

/// Whole-string parse; nullopt on trailing garbage or non-finite input.
std::optional<double> parse_double(std::string_view s) noexcept;

std::vector<std::string_view> split(std::string_view s, char sep);

}  // namespace rollout::text
