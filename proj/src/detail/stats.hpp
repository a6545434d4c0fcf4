#pragma once

#include <algorithm>
#include <vector>

#include "oose/types.hpp"

namespace oose::detail {

// Median with the textbook even-count convention (mean of the two middle
// order statistics).  Shared by the hyperparameter init grid and the
// bandwidth policies so "median" means one thing everywhere.
inline double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

// Median of the strict lower triangle (all unordered pairs) of a symmetric
// pairwise matrix.
inline double median_offdiag(const Matrix& D) {
  const Index m = D.rows();
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(m) * static_cast<std::size_t>(m - 1) / 2);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < i; ++j) v.push_back(D(i, j));
  return median_of(std::move(v));
}

}  // namespace oose::detail
