#include "anderson/field_io.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace anderson {

namespace {

// Shortest decimal representation that round-trips the double exactly.
std::string shortest(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace

void write_field(const FieldSample& sample, std::ostream& os) {
    char head[256];
    std::snprintf(head, sizeof(head),
                  "# anderson-field v1; model=%s; d=%d; R=%s; n=%" PRId64
                  "; eps=%s; seed=%" PRIu64 "\n",
                  sample.model.tag().c_str(), sample.grid.d,
                  shortest(sample.grid.half_width).c_str(), sample.grid.n,
                  shortest(sample.epsilon).c_str(), sample.seed);
    os << head;
    for (double v : sample.values) os << shortest(v) << "\n";
}

void write_field(const FieldSample& sample, const std::string& path) {
    std::ofstream os(path, std::ios::binary); // binary: keep LF endings everywhere
    if (!os) throw DomainError("write_field: cannot open " + path);
    write_field(sample, os);
    if (!os) throw DomainError("write_field: write failed for " + path);
}

FieldDump read_field(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw DomainError("read_field: empty input");
    FieldDump dump;
    int d = 0;
    std::int64_t n = 0;
    double r = 0.0;
    char tag[64] = {0};
    const int got = std::sscanf(header.c_str(),
                                "# anderson-field v1; model=%63[^;]; d=%d; R=%lg; n=%" SCNd64
                                "; eps=%lg; seed=%" SCNu64,
                                tag, &d, &r, &n, &dump.epsilon, &dump.seed);
    if (got != 6) throw DomainError("read_field: malformed header: " + header);
    dump.model_tag = tag;
    dump.grid = GridSpec(d, r, n);
    dump.values.reserve(dump.grid.total_nodes());
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        dump.values.push_back(std::stod(line));
    }
    if (static_cast<std::int64_t>(dump.values.size()) != dump.grid.total_nodes())
        throw DomainError("read_field: value count does not match grid");
    return dump;
}

FieldDump read_field_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DomainError("read_field: cannot open " + path);
    return read_field(is);
}

} // namespace anderson
