#include "pickling/csv.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include "pickling/errors.hpp"
#include "pickling/number_format.hpp"

namespace pickling {

namespace {

constexpr std::size_t kColumnCount = kFieldCount + 1;

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return cells;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

}  // namespace

void write_csv(std::ostream& out, const Dataset& data) {
    out << kCsvHeader << '\n';
    for (const auto& rec : data.records()) {
        for (Field f : kAllFields) out << format_number(rec[f]) << ',';
        out << (rec.under_p() ? '1' : '0') << '\n';
    }
}

void write_csv_file(const std::string& path, const Dataset& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    write_csv(out, data);
    if (!out) throw DataError("write failed for '" + path + "'");
}

CsvImport read_csv(std::istream& in, InvalidRowPolicy policy, const BoundTable& bounds) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("csv: empty input, expected header");

    // column position -> field index (kFieldCount means under_p)
    const auto header = split_commas(line);
    std::vector<std::size_t> column_target;
    std::array<std::optional<std::size_t>, kColumnCount> seen{};
    for (std::size_t col = 0; col < header.size(); ++col) {
        const auto name = trim(header[col]);
        std::size_t target;
        if (name == "under_p") {
            target = kFieldCount;
        } else if (auto f = field_from_name(name)) {
            target = index_of(*f);
        } else {
            throw DataError("csv: unknown column '" + std::string(name) + "'");
        }
        if (seen[target]) throw DataError("csv: duplicate column '" + std::string(name) + "'");
        seen[target] = col;
        column_target.push_back(target);
    }
    std::string missing;
    for (std::size_t t = 0; t < kColumnCount; ++t) {
        if (seen[t]) continue;
        if (!missing.empty()) missing += ", ";
        missing += t == kFieldCount ? std::string("under_p") : std::string(field_name(kAllFields[t]));
    }
    if (!missing.empty()) throw DataError("csv: missing column(s): " + missing);

    std::vector<CoilRecord> records;
    std::vector<SkippedRow> skipped;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_commas(line);

        std::string problem;
        RawRecord raw;
        if (cells.size() != column_target.size()) {
            problem = "expected " + std::to_string(column_target.size()) + " cells, got " +
                      std::to_string(cells.size());
        } else {
            for (std::size_t col = 0; col < cells.size() && problem.empty(); ++col) {
                const auto cell = trim(cells[col]);
                const std::size_t target = column_target[col];
                if (target == kFieldCount) {
                    if (cell == "1") {
                        raw.under_p = true;
                    } else if (cell == "0") {
                        raw.under_p = false;
                    } else {
                        problem = "under_p must be 0 or 1, got '" + std::string(cell) + "'";
                    }
                } else if (!parse_number(cell, raw.values[target])) {
                    problem = std::string(field_name(kAllFields[target])) + ": not a number '" +
                              std::string(cell) + "'";
                }
            }
        }
        if (problem.empty()) {
            auto checked = validate_record(raw, bounds);
            if (checked.accepted()) {
                records.push_back(*checked.record);
                continue;
            }
            problem = checked.report.to_string();
        }
        if (policy == InvalidRowPolicy::Reject) {
            throw DataError("csv line " + std::to_string(line_no) + ": " + problem);
        }
        skipped.push_back({line_no, problem});
    }
    if (records.empty()) throw DataError("csv: no valid records");
    return CsvImport{Dataset(std::move(records), Provenance::Imported), std::move(skipped)};
}

CsvImport read_csv_file(const std::string& path, InvalidRowPolicy policy,
                        const BoundTable& bounds) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    return read_csv(in, policy, bounds);
}

}  // namespace pickling
