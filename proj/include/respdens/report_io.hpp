#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "respdens/distributions.hpp"

namespace respdens::io {

//! Shortest round-trip decimal form; locale independent.
std::string format_double(double v);

struct Column
{
  std::string name;
  std::span<const double> values;
};

//! Header row, then one row per index; all columns must have equal length.
void write_csv(const std::filesystem::path& path, std::span<const Column> columns);

struct CsvTable
{
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(const std::string& name) const;
  bool has(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const Json& doc);
Json read_json(const std::filesystem::path& path);

//! Lowercase hex SHA-256 of the file contents.
std::string sha256_file(const std::filesystem::path& path);

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kManifestName = "manifest.json";

//! Writes <dir>/manifest.json: config snapshot, tool version, wall time and
//! every listed file (relative to dir) with its hash.
void write_manifest(const std::filesystem::path& dir, const Json& config,
                    std::span<const std::string> files, double seconds);

struct ManifestCheck
{
  bool ok = true;
  std::size_t files = 0;
  std::vector<std::string> problems;
};

ManifestCheck verify_manifest(const std::filesystem::path& manifest_path);

struct Series
{
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

//! Minimal SVG line chart with axes, ticks and a legend.
void write_svg_lines(const std::filesystem::path& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     std::span<const Series> series);

} // namespace respdens::io
