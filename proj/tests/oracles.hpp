#pragma once
// Test-side reference computations. None of these call into the library's
// solvers or elimination code.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "dmic/clustering.hpp"
#include "dmic/random.hpp"

namespace oracle {

using Grid = std::vector<std::vector<double>>;

inline Grid to_grid(const dmic::DenseMatrix& m) {
  Grid g(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) g[i][j] = m(i, j);
  return g;
}

// Laplace expansion along the first row.
inline double cofactor_det(const Grid& m) {
  const std::size_t n = m.size();
  if (n == 0) return 1.0;
  if (n == 1) return m[0][0];
  if (n == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  double det = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    Grid minor;
    for (std::size_t i = 1; i < n; ++i) {
      std::vector<double> row;
      for (std::size_t c = 0; c < n; ++c)
        if (c != j) row.push_back(m[i][c]);
      minor.push_back(std::move(row));
    }
    det += (j % 2 == 0 ? 1.0 : -1.0) * m[0][j] * cofactor_det(minor);
  }
  return det;
}

inline double cofactor_det(const dmic::DenseMatrix& m) { return cofactor_det(to_grid(m)); }

// |det(C^T X)| built from the labels directly.
inline double score(const std::vector<int>& labels, const dmic::DenseMatrix& x, std::size_t k) {
  Grid agg(k, std::vector<double>(x.cols(), 0.0));
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) agg[static_cast<std::size_t>(labels[i])][j] += x(i, j);
  return std::abs(cofactor_det(agg));
}

// Visits every labeling of n rows into k clusters.
inline void for_each_labeling(std::size_t n, std::size_t k, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> labels(n, 0);
  while (true) {
    f(labels);
    std::size_t i = 0;
    while (i < n && labels[i] == static_cast<int>(k) - 1) labels[i++] = 0;
    if (i == n) return;
    ++labels[i];
  }
}

struct Enumerated {
  double best = 0.0;
  std::vector<std::vector<int>> argmax;  // labelings within rel_tol of best
};

inline Enumerated enumerate(const dmic::DenseMatrix& x, std::size_t k, double rel_tol = 1e-9) {
  Enumerated e;
  std::vector<std::pair<double, std::vector<int>>> all;
  for_each_labeling(x.rows(), k, [&](const std::vector<int>& l) {
    const double s = score(l, x, k);
    e.best = std::max(e.best, s);
    all.emplace_back(s, l);
  });
  for (auto& [s, l] : all)
    if (s >= e.best * (1.0 - rel_tol) && e.best > 0.0) e.argmax.push_back(l);
  return e;
}

// Same partition up to relabeling, decided by a label bijection.
inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::vector<int> fwd(64, -1), bwd(64, -1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto& f = fwd[static_cast<std::size_t>(a[i])];
    auto& g = bwd[static_cast<std::size_t>(b[i])];
    if (f == -1 && g == -1) {
      f = b[i];
      g = a[i];
    } else if (f != b[i] || g != a[i]) {
      return false;
    }
  }
  return true;
}

// True when no single-row reassignment raises |det| (direct recomputation).
inline bool no_improving_move(const std::vector<int>& labels, const dmic::DenseMatrix& x, std::size_t k,
                              double rel_tol = 1e-9) {
  const double base = score(labels, x, k);
  auto trial = labels;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      if (static_cast<int>(c) == labels[i]) continue;
      trial[i] = static_cast<int>(c);
      if (score(trial, x, k) > base * (1.0 + rel_tol)) return false;
    }
    trial[i] = labels[i];
  }
  return true;
}

inline dmic::DenseMatrix random_matrix(dmic::Rng& rng, std::size_t r, std::size_t c, double lo = -1.0,
                                       double hi = 1.0) {
  dmic::DenseMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = lo + (hi - lo) * rng.uniform();
  return m;
}

// Random matrix with |det| bounded away from zero relative to its scale.
inline dmic::DenseMatrix random_invertible(dmic::Rng& rng, std::size_t n) {
  while (true) {
    auto m = random_matrix(rng, n, n);
    if (std::abs(cofactor_det(m)) > 0.05) return m;
  }
}

// Labels in [0, k) with every cluster used.
inline std::vector<int> random_full_labels(dmic::Rng& rng, std::size_t n, std::size_t k) {
  std::vector<int> l(n);
  for (std::size_t i = 0; i < n; ++i) l[i] = i < k ? static_cast<int>(i) : static_cast<int>(rng.index(k));
  rng.shuffle(l);
  return l;
}

}  // namespace oracle
