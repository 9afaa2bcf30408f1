#include "rollout/csv.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "rollout/text.hpp"

namespace rollout {

CsvError::CsvError(std::filesystem::path file, std::size_t row, const std::string& what)
    : std::runtime_error(file.string() + (row ? ":" + std::to_string(row) : std::string()) + ": " + what),
      file_(std::move(file)),
      row_(row) {}

std::size_t CsvTable::column(std::string_view name) const noexcept {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    return npos;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError(path, 0, "cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string content = buf.str();

    CsvTable table;
    std::size_t line_no = 0;
    for (auto raw : text::split(content, '\n')) {
        ++line_no;
        const auto line = text::trim(raw);
        if (line.empty()) continue;
        std::vector<std::string> cells;
        for (auto cell : text::split(line, ',')) cells.emplace_back(text::trim(cell));
        if (table.header.empty()) {
            table.header = std::move(cells);
            continue;
        }
        if (cells.size() != table.header.size())
            throw CsvError(path, line_no,
                           "expected " + std::to_string(table.header.size()) + " fields, got " +
                               std::to_string(cells.size()));
        table.rows.push_back(std::move(cells));
        table.lines.push_back(line_no);
    }
    if (table.header.empty()) throw CsvError(path, 0, "missing header row");
    return table;
}

std::vector<OutcomePoint> read_outcome_points(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    const auto dt = table.column("downtime");
    const auto dl = table.column("delivery_time");
    if (dt == CsvTable::npos || dl == CsvTable::npos)
        throw CsvError(path, 1, "header must contain downtime and delivery_time");
    auto verbatim = table.column("label");
    if (verbatim == CsvTable::npos) verbatim = table.column("policy");

    std::vector<OutcomePoint> points;
    points.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto down = text::parse_double(row[dt]);
        const auto del = text::parse_double(row[dl]);
        if (!down || !del || *down < 0.0 || *del < 0.0)
            throw CsvError(path, table.lines[r], "objective values must be non-negative numbers");
        OutcomePoint p{*down, *del, {}};
        if (verbatim != CsvTable::npos) {
            p.label = row[verbatim];
        } else {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c == dt || c == dl) continue;
                if (!p.label.empty()) p.label += ';';
                p.label += table.header[c] + "=" + row[c];
            }
        }
        points.push_back(std::move(p));
    }
    return points;
}

void write_points_csv(std::ostream& os, std::span<const OutcomePoint> points) {
    os << "label,downtime,delivery_time\n";
    for (const auto& p : points)
        os << p.label << ',' << text::format_number(p.downtime) << ',' << text::format_number(p.delivery_time) << '\n';
}

}  // namespace rollout
