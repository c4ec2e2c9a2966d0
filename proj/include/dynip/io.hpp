#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dynip/bochner.hpp"

namespace dynip {

/// Writes `content` to a temporary sibling and renames it over `path`.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_text(const std::filesystem::path& path);

/// Shortest decimal that round-trips, e.g. 0.1 -> "0.1".
std::string format_shortest(double value);

void write_csv(const std::filesystem::path& path, const BochnerFunction& u);
BochnerFunction read_csv(const std::filesystem::path& path, SpaceMetric metric,
                         double exponent = 2.0);

/// Causal kernel samples a(k dt), one value per row.
std::vector<double> read_kernel_csv(const std::filesystem::path& path);
/// Observed component indices, one comma-separated row per time node.
std::vector<std::vector<std::size_t>> read_mask_csv(const std::filesystem::path& path);

}  // namespace dynip
