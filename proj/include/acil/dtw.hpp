// Copyright 2026 The ACIL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Dynamic time warping over state sequences stored as matrix rows. The
// functions accept arbitrary dense Eigen expressions (blocks, maps, ...)
// without copying.

#ifndef ACIL_DTW_HPP_
#define ACIL_DTW_HPP_

#include <algorithm>
#include <limits>
#include <utility>
#include <vector>

#include "acil/common.hpp"

namespace acil {

// Per-dimension min/max of a reference sequence, used to rescale both
// sides of a DTW comparison into a common range.
struct NormalizationStats {
  Eigen::RowVectorXd min;
  Eigen::RowVectorXd max;

  template <typename Derived>
  static NormalizationStats from_rows(const Eigen::MatrixBase<Derived>& seq) {
    if (seq.rows() == 0)
      throw InputError("normalization stats: empty sequence");
    NormalizationStats s;
    s.min = seq.colwise().minCoeff();
    s.max = seq.colwise().maxCoeff();
    return s;
  }
};

// x -> (x - min) / (max - min) per dimension. A degenerate dimension
// (max == min) maps to 0.0; values outside [min, max] extrapolate
// linearly outside [0, 1].
template <typename Derived>
Matrix minmax_normalize(const Eigen::MatrixBase<Derived>& seq,
                        const NormalizationStats& stats) {
  if (seq.cols() != stats.min.cols())
    throw InputError("minmax_normalize: dimension mismatch");
  Matrix out(seq.rows(), seq.cols());
  for (int d = 0; d < seq.cols(); ++d) {
    double range = stats.max[d] - stats.min[d];
    if (range == 0.0)
      out.col(d).setZero();
    else
      out.col(d) = (seq.col(d).array() - stats.min[d]) / range;
  }
  return out;
}

// Monotone alignment between two sequences: starts at (0,0), ends at
// (m-1, n-1), each step increments the row index, the column index, or
// both by exactly one.
struct WarpingPath {
  std::vector<std::pair<int, int>> steps;
};

struct DtwResult {
  double cost = 0.0;
  WarpingPath path;
};

// Minimum total pairwise L2 distance over all warping paths, by dynamic
// programming. The returned path is an argmin; backtracking ties prefer
// the diagonal move, then advancing the row (first sequence), then the
// column.
template <typename DerivedA, typename DerivedB>
DtwResult dtw_distance(const Eigen::MatrixBase<DerivedA>& a,
                       const Eigen::MatrixBase<DerivedB>& b) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(b.rows());
  if (m == 0 || n == 0) throw InputError("dtw: empty sequence");
  if (a.cols() != b.cols()) throw InputError("dtw: dimension mismatch");

  Matrix local(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      local(i, j) = (a.row(i) - b.row(j)).norm();

  Matrix acc(m, n);
  acc(0, 0) = local(0, 0);
  for (int i = 1; i < m; ++i) acc(i, 0) = local(i, 0) + acc(i - 1, 0);
  for (int j = 1; j < n; ++j) acc(0, j) = local(0, j) + acc(0, j - 1);
  for (int i = 1; i < m; ++i)
    for (int j = 1; j < n; ++j)
      acc(i, j) = local(i, j) + std::min({acc(i - 1, j - 1), acc(i - 1, j),
                                          acc(i, j - 1)});

  DtwResult result;
  result.cost = acc(m - 1, n - 1);
  int i = m - 1, j = n - 1;
  result.path.steps.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      double diag = acc(i - 1, j - 1);
      double up = acc(i - 1, j);
      double left = acc(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    }
    result.path.steps.emplace_back(i, j);
  }
  std::reverse(result.path.steps.begin(), result.path.steps.end());
  return result;
}

namespace detail {

template <typename DerivedA, typename DerivedB>
double bruteforce_from(const Eigen::MatrixBase<DerivedA>& a,
                       const Eigen::MatrixBase<DerivedB>& b, int i, int j) {
  double here = (a.row(i) - b.row(j)).norm();
  const bool last_i = i == a.rows() - 1;
  const bool last_j = j == b.rows() - 1;
  if (last_i && last_j) return here;
  double best = std::numeric_limits<double>::infinity();
  if (!last_i) best = std::min(best, bruteforce_from(a, b, i + 1, j));
  if (!last_j) best = std::min(best, bruteforce_from(a, b, i, j + 1));
  if (!last_i && !last_j)
    best = std::min(best, bruteforce_from(a, b, i + 1, j + 1));
  return here + best;
}

}  // namespace detail

// Exact minimum over an explicit enumeration of every warping path; test
// oracle only, refuses sequences longer than 8.
template <typename DerivedA, typename DerivedB>
double dtw_bruteforce(const Eigen::MatrixBase<DerivedA>& a,
                      const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() == 0 || b.rows() == 0)
    throw InputError("dtw_bruteforce: empty sequence");
  if (a.rows() > 8 || b.rows() > 8)
    throw InputError("dtw_bruteforce: sequences longer than 8 refused");
  if (a.cols() != b.cols())
    throw InputError("dtw_bruteforce: dimension mismatch");
  return detail::bruteforce_from(a, b, 0, 0);
}

// Whether the path says the agent's first next-state (row 1) aligned past
// the reference column 0. Returns 1 when the smallest column matched with
// row 1 is >= 1, else 0; a single-row path has no movement to assess.
inline int progression_advancement(const WarpingPath& path) {
  int min_col = -1;
  for (const auto& [i, j] : path.steps) {
    if (i == 1 && (min_col < 0 || j < min_col)) min_col = j;
  }
  if (min_col < 0) return 0;
  return min_col >= 1 ? 1 : 0;
}

}  // namespace acil

#endif  // ACIL_DTW_HPP_
