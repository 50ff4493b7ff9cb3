#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>

namespace sefi {

struct AriScore {
  double value = 0.0;
  std::size_t n = 0;
};

/// Hubert-Arabie adjusted Rand index over paired labels, computed from the
/// contingency table in exact integer arithmetic. When the chance-corrected
/// denominator vanishes (both partitions trivial) the score is 1 for identical
/// partitions and 0 otherwise.
template <typename LabelA, typename LabelB>
AriScore adjusted_rand_index(std::span<const LabelA> a, std::span<const LabelB> b) {
  if (a.size() != b.size()) throw std::invalid_argument("label sequences differ in length");
  if (a.size() < 2) throw std::invalid_argument("ARI needs at least 2 labelled points");
  using Wide = __int128;

  std::map<std::pair<LabelA, LabelB>, std::int64_t> table;
  std::map<LabelA, std::int64_t> rows;
  std::map<LabelB, std::int64_t> cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++table[{a[i], b[i]}];
    ++rows[a[i]];
    ++cols[b[i]];
  }
  auto pairs = [](std::int64_t m) -> Wide { return static_cast<Wide>(m) * (m - 1) / 2; };
  Wide index = 0, sum_a = 0, sum_b = 0;
  for (const auto& [key, count] : table) index += pairs(count);
  for (const auto& [key, count] : rows) sum_a += pairs(count);
  for (const auto& [key, count] : cols) sum_b += pairs(count);
  const Wide total = pairs(static_cast<std::int64_t>(a.size()));

  // ARI = (index - A·B/T) / ((A+B)/2 - A·B/T), scaled by 2T.
  const Wide numerator = 2 * (index * total - sum_a * sum_b);
  const Wide denominator = (sum_a + sum_b) * total - 2 * sum_a * sum_b;
  AriScore score;
  score.n = a.size();
  if (denominator == 0) {
    score.value = (index == sum_a && index == sum_b) ? 1.0 : 0.0;
    return score;
  }
  score.value = static_cast<double>(static_cast<long double>(numerator) / static_cast<long double>(denominator));
  return score;
}

}  // namespace sefi
