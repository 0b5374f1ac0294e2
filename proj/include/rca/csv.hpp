#pragma once

#include <string>
#include <vector>

#include "rca/common.hpp"

namespace rca {

struct CsvTable {
    std::vector<std::string> header;
    Matrix values;

    std::size_t column_index(const std::string& name) const;
    bool has_column(const std::string& name) const;
};

// Comma-separated numeric tables. The header row is mandatory; cells are
// plain numbers (no quoting, no embedded commas). Writers render doubles
// with %.17g so a read-back reproduces the exact bits.
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& origin);
void write_csv(const std::string& path, const CsvTable& table);
std::string format_csv(const CsvTable& table);

std::string format_double(double v);  // %.17g

}  // namespace rca
