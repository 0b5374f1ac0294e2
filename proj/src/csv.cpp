#include "rca/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace rca {

std::size_t CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw ConfigError("csv: missing column '" + name + "'");
}

bool CsvTable::has_column(const std::string& name) const {
    for (const auto& h : header) {
        if (h == name) return true;
    }
    return false;
}

std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return cells;
}

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

double parse_cell(const std::string& cell, std::size_t line_no, const std::string& origin) {
    const std::string t = trim(cell);
    if (t.empty()) {
        throw ConfigError("csv: empty cell at " + origin + ":" + std::to_string(line_no));
    }
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0' || errno == ERANGE) {
        throw ConfigError("csv: bad number '" + t + "' at " + origin + ":" +
                          std::to_string(line_no));
    }
    return v;
}

}  // namespace

CsvTable parse_csv(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    CsvTable table;
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            for (const auto& cell : split_line(line)) {
                const std::string name = trim(cell);
                if (name.empty()) {
                    throw ConfigError("csv: empty header name at " + origin + ":1");
                }
                table.header.push_back(name);
            }
            continue;
        }
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != table.header.size()) {
            throw ConfigError("csv: expected " + std::to_string(table.header.size()) +
                              " cells, got " + std::to_string(cells.size()) + " at " + origin +
                              ":" + std::to_string(line_no));
        }
        for (const auto& cell : cells) values.push_back(parse_cell(cell, line_no, origin));
        ++rows;
    }
    if (table.header.empty()) {
        throw ConfigError("csv: missing header row in " + origin);
    }
    table.values = Matrix(rows, table.header.size());
    table.values.data = std::move(values);
    return table;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("csv: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), path);
}

std::string format_csv(const CsvTable& table) {
    if (table.header.empty()) throw ConfigError("csv: refusing to write a headerless table");
    if (table.values.cols != table.header.size()) {
        throw ConfigError("csv: header/value column mismatch");
    }
    std::string out;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out += ',';
        out += table.header[i];
    }
    out += '\n';
    for (std::size_t r = 0; r < table.values.rows; ++r) {
        for (std::size_t c = 0; c < table.values.cols; ++c) {
            if (c) out += ',';
            out += format_double(table.values.at(r, c));
        }
        out += '\n';
    }
    return out;
}

void write_csv(const std::string& path, const CsvTable& table) {
    const std::string text = format_csv(table);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("csv: cannot write " + path);
    out << text;
    if (!out) throw ConfigError("csv: write failed for " + path);
}

}  // namespace rca
