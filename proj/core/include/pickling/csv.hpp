#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "pickling/coil.hpp"

namespace pickling {

// Exact header line, lowercase file format: 14 numeric columns then under_p.
inline constexpr std::string_view kCsvHeader =
    "W,t_s,w_s,T_1,T_2,T_3,T_rinse,v,HCl_1,HCl_2,HCl_3,Fe2_1,Fe2_2,Fe2_3,under_p";

void write_csv(std::ostream& out, const Dataset& data);
void write_csv_file(const std::string& path, const Dataset& data);

enum class InvalidRowPolicy { Reject, Skip };

struct SkippedRow {
    std::size_t line;
    std::string reason;
};

struct CsvImport {
    Dataset data;
    std::vector<SkippedRow> skipped;
};

// Columns may come in any order but every column must be present exactly once.
// Throws DataError naming missing or unknown columns, or the first bad row
// under InvalidRowPolicy::Reject.
CsvImport read_csv(std::istream& in, InvalidRowPolicy policy = InvalidRowPolicy::Reject,
                   const BoundTable& bounds = BoundTable::defaults());
CsvImport read_csv_file(const std::string& path,
                        InvalidRowPolicy policy = InvalidRowPolicy::Reject,
                        const BoundTable& bounds = BoundTable::defaults());

}  // namespace pickling
