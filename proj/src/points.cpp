#include "sefi/points.hpp"

#include "sefi/error.hpp"
#include "sefi/io_util.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace sefi {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_coordinate(std::string_view field, std::size_t line, const char* axis) {
  field = trim(field);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
    throw ParseError(line, std::string("non-numeric ") + axis + " coordinate '" + std::string(field) + "'");
  if (!std::isfinite(value)) throw ParseError(line, std::string("non-finite ") + axis + " coordinate");
  if (value < 0.0) throw ParseError(line, std::string("negative ") + axis + " coordinate");
  return value;
}

}  // namespace

std::vector<std::size_t> PointCloud::gene_counts() const {
  std::vector<std::size_t> counts(gene_panel.size(), 0);
  for (const auto& p : points) ++counts[p.gene];
  return counts;
}

PointCloud PointCloud::subset_genes(const std::vector<int>& genes) const {
  std::vector<int> sorted = genes;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<int> remap(gene_panel.size(), -1);
  PointCloud out;
  for (int g : sorted) {
    if (g < 0 || static_cast<std::size_t>(g) >= gene_panel.size()) throw DataError("gene index out of range");
    remap[static_cast<std::size_t>(g)] = static_cast<int>(out.gene_panel.size());
    out.gene_panel.push_back(gene_panel[static_cast<std::size_t>(g)]);
  }
  for (const auto& p : points) {
    if (int r = remap[p.gene]; r >= 0) out.points.push_back({p.x, p.y, static_cast<std::uint32_t>(r)});
  }
  return out;
}

PointCloud make_point_cloud(const std::vector<double>& xs, const std::vector<double>& ys,
                            const std::vector<std::string>& genes) {
  if (xs.size() != ys.size() || xs.size() != genes.size()) throw DataError("point record arrays differ in length");
  std::map<std::string, std::uint32_t> index;
  for (const auto& g : genes) index.emplace(g, 0);
  PointCloud pc;
  for (auto& [name, idx] : index) {
    idx = static_cast<std::uint32_t>(pc.gene_panel.size());
    pc.gene_panel.push_back(name);
  }
  pc.points.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) pc.points.push_back({xs[i], ys[i], index.at(genes[i])});
  return pc;
}

PointCloud parse_points(std::string_view text) {
  if (text.empty()) throw ParseError(1, "empty file");
  std::vector<double> xs, ys;
  std::vector<std::string> genes;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (!header_seen) {
      if (trim(line) != "x,y,gene") throw ParseError(line_no, "expected header 'x,y,gene'");
      header_seen = true;
      continue;
    }
    if (trim(line).empty()) continue;

    const std::size_t c1 = line.find(',');
    const std::size_t c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos)
      throw ParseError(line_no, "expected 3 fields");
    xs.push_back(parse_coordinate(line.substr(0, c1), line_no, "x"));
    ys.push_back(parse_coordinate(line.substr(c1 + 1, c2 - c1 - 1), line_no, "y"));
    std::string_view gene = trim(line.substr(c2 + 1));
    if (gene.empty()) throw ParseError(line_no, "empty gene token");
    genes.emplace_back(gene);
  }
  return make_point_cloud(xs, ys, genes);
}

std::string write_points(const PointCloud& pc) {
  std::ostringstream out;
  out.precision(17);
  out << "x,y,gene\n";
  for (const auto& p : pc.points) out << p.x << ',' << p.y << ',' << pc.gene_name(p) << '\n';
  return out.str();
}

PointCloud load_points(const std::string& path) { return parse_points(read_file(path)); }

void save_points(const std::string& path, const PointCloud& pc) { write_file(path, write_points(pc)); }

}  // namespace sefi
