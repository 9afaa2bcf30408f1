#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rollout/pareto.hpp"

namespace rollout {

/// Malformed or unreadable tabular input. row() is the 1-based file line
/// (header = 1), or 0 when the error is not tied to a row.
class CsvError : public std::runtime_error {
public:
    CsvError(std::filesystem::path file, std::size_t row, const std::string& what);
    std::size_t row() const noexcept { return row_; }
    const std::filesystem::path& file() const noexcept { return file_; }

private:
    std::filesystem::path file_;
    std::size_t row_;
};

/// Header plus rows of a plain comma-separated file (no quoting).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    /// 1-based file line of each row.
    std::vector<std::size_t> lines;

    /// Column index by name, or npos.
    std::size_t column(std::string_view name) const noexcept;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

CsvTable read_csv(const std::filesystem::path& path);

/// Reads any outcome file carrying `downtime` and `delivery_time` columns.
/// The label joins the remaining columns as name=value pairs, or is taken
/// verbatim from a `label` or `policy` column.
std::vector<OutcomePoint> read_outcome_points(const std::filesystem::path& path);

/// Columns: label, downtime, delivery_time.
void write_points_csv(std::ostream& os, std::span<const OutcomePoint> points);

}  // namespace rollout
