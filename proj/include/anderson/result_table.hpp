#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace anderson {

/// CSV result table with `# key: value` metadata header lines.
/// Emission is byte-stable for identical inputs except the timestamp line.
struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::pair<std::string, std::string>> metadata;

    void add_row(std::vector<std::string> row);
    void add_meta(std::string key, std::string value);
};

std::string format_double(double v);

void emit_report(const ResultTable& table, std::ostream& os, bool with_timestamp = true);
void emit_report(const ResultTable& table, const std::string& path, bool with_timestamp = true);

/// Reads back a table previously emitted (metadata lines preserved).
ResultTable read_report(std::istream& is);

} // namespace anderson
