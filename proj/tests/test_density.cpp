#include "oracles.hpp"
#include "sefi/density.hpp"
#include "sefi/error.hpp"

#include <doctest.h>

#include <random>

using namespace sefi;

namespace {

GridSpec grid(int h, int w, double resolution = 1.0, double sigma = 1.0) {
  GridSpec g;
  g.height_bins = h;
  g.width_bins = w;
  g.resolution = resolution;
  g.sigma = sigma;
  return g;
}

double channel_sum(const FeatureTensor& t, int c) {
  double s = 0.0;
  for (int y = 0; y < t.height(); ++y)
    for (int x = 0; x < t.width(); ++x) s += t.at(y, x, c);
  return s;
}

}  // namespace

TEST_CASE("rasterize uses floor division") {
  const PointCloud pc = parse_points("x,y,gene\n5,5,A\n");
  const auto m = rasterize_points(pc, grid(4, 4, 2.0));
  CHECK(m.tensor.at(2, 2, 0) == 1.0f);
  CHECK(channel_sum(m.tensor, 0) == 1.0);
  CHECK(m.tensor.channel_names() == std::vector<std::string>{"A"});
}

TEST_CASE("rasterize of no points is all zero") {
  PointCloud pc;
  pc.gene_panel = {"A", "B"};
  const auto m = rasterize_points(pc, grid(3, 3));
  for (float v : m.tensor.data()) CHECK(v == 0.0f);
}

TEST_CASE("rasterize counts every point") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 63.999);
  std::vector<double> xs, ys;
  std::vector<std::string> genes;
  for (int i = 0; i < 100; ++i) {
    xs.push_back(u(rng));
    ys.push_back(u(rng));
    genes.emplace_back("A");
  }
  const auto m = rasterize_points(make_point_cloud(xs, ys, genes), grid(16, 16, 4.0));
  CHECK(channel_sum(m.tensor, 0) == 100.0);
}

TEST_CASE("points outside the grid are reported") {
  const PointCloud pc = parse_points("x,y,gene\n1,1,A\n9,1,A\n1,40,A\n");
  try {
    rasterize_points(pc, grid(4, 4, 2.0));
    FAIL("expected an error");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2 point(s)") != std::string::npos);
    CHECK(msg.find(" 1 2") != std::string::npos);
  }
}

TEST_CASE("grid from extent and from points") {
  const GridSpec g = GridSpec::for_extent(512, 510, 4.0, 2.0);
  CHECK(g.height_bins == 128);
  CHECK(g.width_bins == 128);
  const GridSpec p = GridSpec::for_points(parse_points("x,y,gene\n8,3.9,A\n"), 4.0, 2.0);
  CHECK(p.width_bins == 3);
  CHECK(p.height_bins == 1);
  CHECK_THROWS_AS(GridSpec::for_extent(10, 10, 0.0, 1.0), DataError);
  CHECK_THROWS_AS(GridSpec::for_extent(10, 10, 1.0, -1.0), DataError);
}

TEST_CASE("kernel is normalized and truncated at ceil(4 sigma)") {
  const auto taps = gaussian_kernel(1.3);
  CHECK(taps.size() == 2 * 6 + 1);
  double s = 0.0;
  for (double t : taps) s += t;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(taps[6] > taps[5]);
}

TEST_CASE("delta response peaks in place and keeps unit mass") {
  GeneExpressionMap m{FeatureTensor(21, 21, 1), grid(21, 21)};
  m.tensor.at(10, 10, 0) = 1.0f;
  const auto s = gaussian_smooth(m);
  float best = -1;
  int by = -1, bx = -1;
  for (int y = 0; y < 21; ++y)
    for (int x = 0; x < 21; ++x)
      if (s.tensor.at(y, x, 0) > best) {
        best = s.tensor.at(y, x, 0);
        by = y;
        bx = x;
      }
  CHECK(by == 10);
  CHECK(bx == 10);
  CHECK(channel_sum(s.tensor, 0) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("uniform map is a fixed point away from the border") {
  GeneExpressionMap m{FeatureTensor(20, 20, 1), grid(20, 20, 1.0, 1.5)};
  for (auto& v : m.tensor.data()) v = 3.0f;
  const auto s = gaussian_smooth(m);
  const int r = static_cast<int>(std::ceil(4 * 1.5));
  for (int y = r; y < 20 - r; ++y)
    for (int x = r; x < 20 - r; ++x) CHECK(std::abs(s.tensor.at(y, x, 0) - 3.0f) <= 1e-6f);
}

TEST_CASE("separable smoothing matches direct 2D convolution") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  GeneExpressionMap m{FeatureTensor(8, 8, 1), grid(8, 8, 1.0, 0.8)};
  std::vector<std::vector<double>> raw(8, std::vector<double>(8));
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) m.tensor.at(y, x, 0) = static_cast<float>(raw[y][x] = u(rng));
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) raw[y][x] = m.tensor.at(y, x, 0);
  const auto s = gaussian_smooth(m);
  const auto direct = oracle::direct_convolve(raw, oracle::gaussian_taps(0.8));
  double worst = 0.0;
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) worst = std::max(worst, std::abs(s.tensor.at(y, x, 0) - direct[y][x]));
  CHECK(worst <= 1e-6);
}

TEST_CASE("smoothing is translation equivariant in the interior") {
  const PointCloud a = parse_points("x,y,gene\n10.5,12.5,A\n14.5,15.5,A\n12.2,11.7,B\n");
  const PointCloud b = parse_points("x,y,gene\n11.5,12.5,A\n15.5,15.5,A\n13.2,11.7,B\n");
  const auto sa = gaussian_smooth(rasterize_points(a, grid(30, 30)));
  const auto sb = gaussian_smooth(rasterize_points(b, grid(30, 30)));
  for (int c = 0; c < 2; ++c)
    for (int y = 4; y < 26; ++y)
      for (int x = 4; x < 25; ++x) CHECK(std::abs(sa.tensor.at(y, x, c) - sb.tensor.at(y, x + 1, c)) <= 1e-6f);
}

TEST_CASE("parallel smoothing equals serial smoothing") {
  std::mt19937_64 rng(2);
  GeneExpressionMap m{FeatureTensor(16, 12, 5), grid(16, 12, 1.0, 1.2)};
  std::uniform_real_distribution<float> u(0.0f, 2.0f);
  for (auto& v : m.tensor.data()) v = u(rng);
  CHECK(gaussian_smooth(m, 1).tensor == gaussian_smooth(m, 3).tensor);
}

TEST_CASE("foreground mask thresholds the channel sum") {
  GeneExpressionMap zero{FeatureTensor(5, 5, 2), grid(5, 5)};
  CHECK_FALSE(foreground_mask(zero, 0.0).any());

  GeneExpressionMap one{FeatureTensor(15, 15, 1), grid(15, 15, 1.0, 1.0)};
  one.tensor.at(7, 7, 0) = 1.0f;
  const auto s = gaussian_smooth(one);
  const Mask mask = foreground_mask(s, 0.0);
  for (int y = 0; y < 15; ++y)
    for (int x = 0; x < 15; ++x) CHECK(mask(y, x) == (std::abs(y - 7) <= 4 && std::abs(x - 7) <= 4));

  const float peak = s.tensor.matrix().maxCoeff();
  CHECK_FALSE(foreground_mask(s, peak + 1.0).any());
  CHECK_THROWS_AS(foreground_mask(s, -1.0), DataError);
}

TEST_CASE("composition normalization sums to one on foreground") {
  GeneExpressionMap m{FeatureTensor(1, 2, 2), grid(1, 2)};
  m.tensor.at(0, 0, 0) = 1.0f;
  m.tensor.at(0, 0, 1) = 3.0f;
  const auto c = compose_normalize(m, 1e-3);
  CHECK(c.tensor.at(0, 0, 0) == doctest::Approx(0.25));
  CHECK(c.tensor.at(0, 0, 1) == doctest::Approx(0.75));
  CHECK(c.tensor.at(0, 1, 0) == 0.0f);
}
