#include "geolab/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include "geolab/errors.hpp"

namespace geolab::io {
namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> lines_of(std::string_view text) {
  auto lines = split(text, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& l : lines)
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  return lines;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) fail(ErrorCode::io, "cannot format double");
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    fail(ErrorCode::io, "not a number: '" + std::string(text) + "'");
  return v;
}

std::string field_to_csv(const PeriodicField& u) {
  std::string out = "x,value\n";
  for (int j = 0; j < u.size(); ++j) {
    out += format_double(u.grid().node(j));
    out += ',';
    out += format_double(u[j]);
    out += '\n';
  }
  return out;
}

PeriodicField field_from_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front() != "x,value") fail(ErrorCode::io, "field CSV header must be 'x,value'");
  std::vector<double> values;
  values.reserve(lines.size() - 1);
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto cols = split(lines[k], ',');
    if (cols.size() != 2) fail(ErrorCode::io, "field CSV rows need two columns");
    values.push_back(parse_double(cols[1]));
  }
  const SpatialGrid grid(static_cast<int>(values.size()));
  return PeriodicField(grid, std::move(values));
}

json field_to_json(const PeriodicField& u) {
  json j;
  j["n_points"] = u.size();
  j["values"] = std::vector<double>(u.values().begin(), u.values().end());
  return j;
}

PeriodicField field_from_json(const json& j) {
  if (!j.is_object() || !j.contains("n_points") || !j.contains("values"))
    fail(ErrorCode::io, "field JSON needs n_points and values");
  const int n = j.at("n_points").get<int>();
  auto values = j.at("values").get<std::vector<double>>();
  if (static_cast<int>(values.size()) != n) fail(ErrorCode::io, "n_points does not match values");
  return PeriodicField(SpatialGrid(n), std::move(values));
}

std::string path_to_csv(const PathField& path) {
  std::string out = "s";
  for (int i = 0; i < path.n_points(); ++i) out += ",x_" + std::to_string(i);
  out += '\n';
  for (int j = 0; j <= path.n_time(); ++j) {
    out += format_double(path.time(j));
    for (double v : path.row(j)) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

PathField path_from_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.size() < 3) fail(ErrorCode::io, "path CSV needs a header and at least two rows");
  const int n = static_cast<int>(split(lines.front(), ',').size()) - 1;
  std::vector<double> values;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto cols = split(lines[k], ',');
    if (static_cast<int>(cols.size()) != n + 1) fail(ErrorCode::io, "ragged path CSV row");
    for (int i = 1; i <= n; ++i) values.push_back(parse_double(cols[i]));
  }
  return PathField(SpatialGrid(n), static_cast<int>(lines.size()) - 2, std::move(values));
}

void write_atomic(const std::filesystem::path& target, std::string_view content) {
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorCode::io, "cannot open " + tmp.string());
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) fail(ErrorCode::io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) fail(ErrorCode::io, "rename to " + target.string() + " failed: " + ec.message());
}

std::string read_file(const std::filesystem::path& source) {
  std::ifstream is(source, std::ios::binary);
  if (!is) fail(ErrorCode::io, "cannot open " + source.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace geolab::io
