#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "geolab/model.hpp"

namespace geolab::io {

using json = nlohmann::ordered_json;

// Shortest decimal string that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

// "x,value" header then one line per node.
std::string field_to_csv(const PeriodicField& u);
PeriodicField field_from_csv(std::string_view text);

// {"n_points": N, "values": [...]}
json field_to_json(const PeriodicField& u);
PeriodicField field_from_json(const json& j);

// Rows indexed by s, columns by x: header "s,x_0,...,x_{N-1}".
std::string path_to_csv(const PathField& path);
PathField path_from_csv(std::string_view text);

// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& target, std::string_view content);
std::string read_file(const std::filesystem::path& source);

}  // namespace geolab::io
