#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sefi {

struct Point {
  double x = 0.0;
  double y = 0.0;
  std::uint32_t gene = 0;  // index into PointCloud::gene_panel
  bool operator==(const Point&) const = default;
};

/// Detections in image pixel coordinates. The panel is sorted and unique;
/// gene tokens are case-sensitive.
struct PointCloud {
  std::vector<Point> points;
  std::vector<std::string> gene_panel;

  const std::string& gene_name(const Point& p) const { return gene_panel[p.gene]; }

  /// Point count per panel entry.
  std::vector<std::size_t> gene_counts() const;

  /// Keep only points whose gene is listed (panel indices); the panel shrinks
  /// to the kept genes in canonical order.
  PointCloud subset_genes(const std::vector<int>& genes) const;

  bool operator==(const PointCloud&) const = default;
};

/// Parses `x,y,gene` CSV text (LF or CRLF). Throws ParseError naming the line.
PointCloud parse_points(std::string_view csv_text);

/// Builds a canonical cloud from raw records (panel sorted, indices remapped).
PointCloud make_point_cloud(const std::vector<double>& xs, const std::vector<double>& ys,
                            const std::vector<std::string>& genes);

std::string write_points(const PointCloud& pc);

PointCloud load_points(const std::string& path);
void save_points(const std::string& path, const PointCloud& pc);

}  // namespace sefi
