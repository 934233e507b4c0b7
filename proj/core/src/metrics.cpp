#include "augclust/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "augclust/error.hpp"

namespace augclust {

namespace {

struct Contingency {
  std::vector<std::vector<std::int64_t>> cells;  // rows: y classes, cols: c classes
  std::vector<std::int64_t> row_sums;
  std::vector<std::int64_t> col_sums;
  std::int64_t n = 0;
};

Contingency build_contingency(const std::vector<int>& y, const std::vector<int>& c) {
  if (y.size() != c.size()) {
    throw InputError("label vectors differ in length: " + std::to_string(y.size()) + " vs " + std::to_string(c.size()));
  }
  std::map<int, int> y_ids, c_ids;
  for (int v : y) y_ids.emplace(v, 0);
  for (int v : c) c_ids.emplace(v, 0);
  int next = 0;
  for (auto& [k, v] : y_ids) v = next++;
  next = 0;
  for (auto& [k, v] : c_ids) v = next++;

  Contingency t;
  t.n = static_cast<std::int64_t>(y.size());
  t.cells.assign(y_ids.size(), std::vector<std::int64_t>(c_ids.size(), 0));
  t.row_sums.assign(y_ids.size(), 0);
  t.col_sums.assign(c_ids.size(), 0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const int r = y_ids[y[i]];
    const int col = c_ids[c[i]];
    t.cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)]++;
    t.row_sums[static_cast<std::size_t>(r)]++;
    t.col_sums[static_cast<std::size_t>(col)]++;
  }
  return t;
}

double entropy(const std::vector<std::int64_t>& counts, std::int64_t n) {
  double h = 0.0;
  for (std::int64_t count : counts) {
    if (count == 0) continue;
    const double p = static_cast<double>(count) / static_cast<double>(n);
    h -= p * std::log(p);
  }
  return h;
}

std::int64_t choose2(std::int64_t m) { return m * (m - 1) / 2; }

}  // namespace

double nmi(const std::vector<int>& y, const std::vector<int>& c, NmiNorm norm) {
  if (y.empty()) throw InputError("nmi: empty label vectors");
  const Contingency t = build_contingency(y, c);

  const double hy = entropy(t.row_sums, t.n);
  const double hc = entropy(t.col_sums, t.n);
  if (hy == 0.0 && hc == 0.0) return 1.0;
  if (hy == 0.0 || hc == 0.0) return 0.0;

  double mi = 0.0;
  for (std::size_t r = 0; r < t.cells.size(); ++r) {
    for (std::size_t col = 0; col < t.cells[r].size(); ++col) {
      const std::int64_t cell = t.cells[r][col];
      if (cell == 0) continue;
      const double p_joint = static_cast<double>(cell) / static_cast<double>(t.n);
      const double p_y = static_cast<double>(t.row_sums[r]) / static_cast<double>(t.n);
      const double p_c = static_cast<double>(t.col_sums[col]) / static_cast<double>(t.n);
      mi += p_joint * std::log(p_joint / (p_y * p_c));
    }
  }

  double denom = 0.0;
  switch (norm) {
    case NmiNorm::arithmetic:
      denom = 0.5 * (hy + hc);
      break;
    case NmiNorm::geometric:
      denom = std::sqrt(hy * hc);
      break;
    case NmiNorm::min:
      denom = std::min(hy, hc);
      break;
    case NmiNorm::max:
      denom = std::max(hy, hc);
      break;
  }
  return std::clamp(mi / denom, 0.0, 1.0);
}

double rand_index(const std::vector<int>& y, const std::vector<int>& c) {
  if (y.size() < 2) throw InputError("rand_index: need at least 2 points");
  const Contingency t = build_contingency(y, c);

  std::int64_t same_both = 0;  // pairs co-clustered in both labelings
  for (const auto& row : t.cells) {
    for (std::int64_t cell : row) same_both += choose2(cell);
  }
  std::int64_t same_y = 0, same_c = 0;
  for (std::int64_t s : t.row_sums) same_y += choose2(s);
  for (std::int64_t s : t.col_sums) same_c += choose2(s);

  const std::int64_t total = choose2(t.n);
  // Pairs separated in both = total - (same in y only) - (same in c only) - (same in both).
  const std::int64_t apart_both = total - same_y - same_c + same_both;
  return static_cast<double>(same_both + apart_both) / static_cast<double>(total);
}

}  // namespace augclust
