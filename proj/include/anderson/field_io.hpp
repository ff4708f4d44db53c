#pragma once

#include <iosfwd>
#include <string>

#include "anderson/potentials.hpp"

namespace anderson {

/// anderson-field v1 dump: one header line
///   # anderson-field v1; model=<tag>; d=<d>; R=<R>; n=<n>; eps=<eps>; seed=<seed>
/// followed by one decimal value per line in row-major node order (LF).
void write_field(const FieldSample& sample, std::ostream& os);
void write_field(const FieldSample& sample, const std::string& path);

/// Parsed dump; the model carries only the tag (parameters are not stored
/// in the v1 format), so `model` is left default-constructed and `model_tag`
/// reports what the header said.
struct FieldDump {
    std::string model_tag;
    GridSpec grid;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> values;
};

FieldDump read_field(std::istream& is);
FieldDump read_field_file(const std::string& path);

} // namespace anderson
