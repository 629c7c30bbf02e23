#include "respdens/report_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "respdens/error.hpp"

namespace respdens::io {

namespace fs = std::filesystem;

std::string format_double(double v)
{
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const fs::path& path)
{
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

double parse_double(const std::string& cell, const fs::path& path)
{
  if (cell == "nan")
    return std::nan("");
  if (cell == "inf")
    return kInf;
  if (cell == "-inf")
    return -kInf;
  double v = 0.0;
  auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
    throw ConfigError("non-numeric cell '" + cell + "' in '" + path.string() + "'");
  return v;
}

std::vector<std::string> split_row(const std::string& line)
{
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ','))
    cells.push_back(cell);
  if (!line.empty() && line.back() == ',')
    cells.emplace_back();
  return cells;
}

std::string xml_escape(const std::string& s)
{
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

} // namespace

void write_csv(const fs::path& path, std::span<const Column> columns)
{
  if (columns.empty())
    throw ConfigError("write_csv: no columns");
  const std::size_t rows = columns.front().values.size();
  for (const auto& c : columns) {
    if (c.values.size() != rows)
      throw ConfigError("write_csv: column '" + c.name + "' has a different length");
  }
  auto out = open_out(path);
  for (std::size_t k = 0; k < columns.size(); ++k)
    out << (k ? "," : "") << columns[k].name;
  out << '\n';
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < columns.size(); ++k)
      out << (k ? "," : "") << format_double(columns[k].values[i]);
    out << '\n';
  }
}

const std::vector<double>& CsvTable::column(const std::string& name) const
{
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name)
      return columns[k];
  }
  throw ConfigError("CSV lacks column '" + name + "'");
}

bool CsvTable::has(const std::string& name) const
{
  return std::find(header.begin(), header.end(), name) != header.end();
}

CsvTable read_csv(const fs::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot read '" + path.string() + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("empty CSV '" + path.string() + "'");
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
  table.header = split_row(line);
  table.columns.resize(table.header.size());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    auto cells = split_row(line);
    if (cells.size() != table.header.size()) {
      throw ConfigError("row " + std::to_string(row) + " of '" + path.string() +
                        "' has " + std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(table.header.size()));
    }
    for (std::size_t k = 0; k < cells.size(); ++k)
      table.columns[k].push_back(parse_double(cells[k], path));
  }
  return table;
}

void write_json(const fs::path& path, const Json& doc)
{
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

Json read_json(const fs::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot read '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("cannot parse '" + path.string() + "': " + e.what());
  }
}

std::string sha256_file(const fs::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError("cannot read '" + path.string() + "' for hashing");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0)
      EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i)
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

void write_manifest(const fs::path& dir, const Json& config, std::span<const std::string> files,
                    double seconds)
{
  Json entries = Json::array();
  for (const auto& f : files)
    entries.push_back({{"path", f}, {"sha256", sha256_file(dir / f)}});
  Json doc = {{"tool", "respdens"},
              {"version", kToolVersion},
              {"config", config},
              {"files", entries},
              {"timing_seconds", seconds}};
  write_json(dir / kManifestName, doc);
}

ManifestCheck verify_manifest(const fs::path& manifest_path)
{
  ManifestCheck check;
  const Json doc = read_json(manifest_path);
  const fs::path dir = manifest_path.parent_path();
  if (!doc.contains("files") || !doc.at("files").is_array()) {
    check.ok = false;
    check.problems.push_back("manifest lacks a files array");
    return check;
  }
  for (const auto& entry : doc.at("files")) {
    ++check.files;
    const std::string rel = entry.value("path", "");
    const fs::path p = dir / rel;
    if (!fs::is_regular_file(p)) {
      check.ok = false;
      check.problems.push_back("missing file " + rel);
      continue;
    }
    if (sha256_file(p) != entry.value("sha256", "")) {
      check.ok = false;
      check.problems.push_back("hash mismatch for " + rel);
    }
  }
  return check;
}

void write_svg_lines(const fs::path& path, const std::string& title, const std::string& x_label,
                     const std::string& y_label, std::span<const Series> series)
{
  constexpr double width = 640, height = 420;
  constexpr double left = 70, right = 170, top = 40, bottom = 55;
  double xmin = kInf, xmax = -kInf, ymin = kInf, ymax = -kInf;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
        continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!(xmax > xmin)) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (!(ymax > ymin)) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  auto out = open_out(path);
  out << std::setprecision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << xml_escape(title) << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = xmin + (xmax - xmin) * t / 4.0;
    const double yv = ymin + (ymax - ymin) * t / 4.0;
    out << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 16
        << "\" text-anchor=\"middle\">" << format_double(std::round(xv * 1000) / 1000)
        << "</text>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
        << format_double(std::round(yv * 1000) / 1000) << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 14
      << "\" text-anchor=\"middle\">" << xml_escape(x_label) << "</text>\n";
  out << "<text transform=\"translate(18," << top + ph / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << xml_escape(y_label) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = colors[k % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
        out << px(s.x[i]) << "," << py(s.y[i]) << " ";
    }
    out << "\"/>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(k);
    out << "<line x1=\"" << width - right + 12 << "\" y1=\"" << ly << "\" x2=\""
        << width - right + 36 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << width - right + 42 << "\" y=\"" << ly + 4 << "\">"
        << xml_escape(s.name) << "</text>\n";
  }
  out << "</svg>\n";
}

} // namespace respdens::io
