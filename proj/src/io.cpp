#include "dynip/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "dynip/errors.hpp"

namespace dynip {

void write_text_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " +
                        ec.message());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_shortest(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_csv(const std::filesystem::path& path, const BochnerFunction& u) {
  write_text_atomic(path, to_csv(u));
}

BochnerFunction read_csv(const std::filesystem::path& path, SpaceMetric metric, double exponent) {
  return from_csv(read_text(path), metric, exponent);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Non-empty lines split on commas; `#` starts a comment line.
std::vector<std::vector<std::string_view>> rows_of(std::string_view text) {
  std::vector<std::vector<std::string_view>> rows;
  while (!text.empty()) {
    const auto end = text.find('\n');
    auto line = trim(text.substr(0, end));
    text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string_view> fields;
    while (true) {
      const auto comma = line.find(',');
      fields.push_back(trim(line.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

template <class T>
T parse_field(std::string_view field, const std::filesystem::path& path, std::size_t row) {
  T value{};
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
    throw InvalidInput(path.string() + ": bad entry '" + std::string(field) + "' in row " +
                       std::to_string(row));
  return value;
}

}  // namespace

std::vector<double> read_kernel_csv(const std::filesystem::path& path) {
  std::vector<double> samples;
  const std::string text = read_text(path);
  const auto rows = rows_of(text);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != 1) throw InvalidInput(path.string() + ": expected one value per row");
    const double a = parse_field<double>(rows[r][0], path, r);
    if (!std::isfinite(a)) throw InvalidInput(path.string() + ": non-finite kernel sample");
    samples.push_back(a);
  }
  return samples;
}

std::vector<std::vector<std::size_t>> read_mask_csv(const std::filesystem::path& path) {
  std::vector<std::vector<std::size_t>> pattern;
  const std::string text = read_text(path);
  const auto rows = rows_of(text);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::vector<std::size_t> indices;
    for (auto f : rows[r]) indices.push_back(parse_field<std::size_t>(f, path, r));
    pattern.push_back(std::move(indices));
  }
  return pattern;
}

}  // namespace dynip
