#include "anderson/result_table.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "anderson/errors.hpp"

namespace anderson {

void ResultTable::add_row(std::vector<std::string> row) {
    if (row.size() != columns.size())
        throw DomainError("ResultTable: row width does not match schema");
    rows.push_back(std::move(row));
}

void ResultTable::add_meta(std::string key, std::string value) {
    metadata.emplace_back(std::move(key), std::move(value));
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void emit_report(const ResultTable& table, std::ostream& os, bool with_timestamp) {
    for (const auto& [k, v] : table.metadata) os << "# " << k << ": " << v << "\n";
    if (with_timestamp) {
        const auto now = std::chrono::system_clock::now();
        const std::time_t tt = std::chrono::system_clock::to_time_t(now);
        char buf[64];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
        os << "# timestamp: " << buf << "\n";
    }
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        os << table.columns[i] << (i + 1 < table.columns.size() ? "," : "");
    os << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << row[i] << (i + 1 < row.size() ? "," : "");
        os << "\n";
    }
}

void emit_report(const ResultTable& table, const std::string& path, bool with_timestamp) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DomainError("emit_report: cannot open " + path);
    emit_report(table, os, with_timestamp);
    if (!os) throw DomainError("emit_report: write failed for " + path);
}

ResultTable read_report(std::istream& is) {
    ResultTable t;
    std::string line;
    bool header_done = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::size_t colon = line.find(':');
            if (colon != std::string::npos) {
                std::string key = line.substr(2, colon - 2);
                std::string value = line.substr(colon + 1);
                if (!value.empty() && value.front() == ' ') value.erase(0, 1);
                t.add_meta(key, value);
            }
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!header_done) {
            t.columns = std::move(cells);
            header_done = true;
        } else {
            t.add_row(std::move(cells));
        }
    }
    return t;
}

} // namespace anderson
