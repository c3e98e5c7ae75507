#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <unordered_set>

#include "detail.hpp"
#include "dmic/clustering.hpp"

namespace dmic {

namespace detail {

std::vector<int> exact_1d_labels(std::span<const double> values) {
  if (values.empty()) throw Error(Errc::DegenerateInput, "no values");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) throw Error(Errc::AllEqual, "all " + std::to_string(values.size()) + " values equal");
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  std::vector<int> labels(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) labels[i] = values[i] > mean ? 0 : 1;

  // Values sitting at the mean are a tie in exact arithmetic; confirm the
  // default placement by scoring the alternative.
  const double scale = std::max(std::abs(*lo), std::abs(*hi));
  DenseMatrix reduced(values.size(), 2);
  for (std::size_t i = 0; i < values.size(); ++i) {
    reduced(i, 0) = values[i];
    reduced(i, 1) = 1.0;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::abs(values[i] - mean) > 1e-12 * scale || labels[i] != 1) continue;
    auto moved = labels;
    moved[i] = 0;
    const double current = dmi_score(Assignment(2, labels), reduced);
    const double alternative = dmi_score(Assignment(2, moved), reduced);
    if (alternative > current * (1.0 + 1e-12)) labels = std::move(moved);
  }
  return labels;
}

std::vector<int> exact_2d_labels(const DenseMatrix& centered) {
  if (centered.cols() != 2) throw Error(Errc::ShapeMismatch, "exact 2d solver needs n x 2 input");
  const std::size_t n = centered.rows();
  const double tiny = 1e-12 * std::max(centered.max_abs(), 1e-300);

  struct Polar {
    double angle, radius;
    std::size_t index;
  };
  std::vector<Polar> ring;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = centered(i, 0), y = centered(i, 1);
    const double r = std::hypot(x, y);
    if (r > tiny) ring.push_back({std::atan2(y, x), r, i});
  }
  if (ring.size() < 3) throw Error(Errc::DegenerateRank, "fewer than three points off the mean");
  std::sort(ring.begin(), ring.end(), [](const Polar& a, const Polar& b) {
    if (a.angle != b.angle) return a.angle < b.angle;
    if (a.radius != b.radius) return a.radius < b.radius;
    return a.index < b.index;
  });

  const std::size_t m = ring.size();
  struct Sum {
    double x = 0, y = 0, w = 0;
  };
  std::vector<Sum> prefix(m + 1);
  for (std::size_t p = 0; p < m; ++p) {
    const std::size_t i = ring[p].index;
    prefix[p + 1] = {prefix[p].x + centered(i, 0), prefix[p].y + centered(i, 1), prefix[p].w + 1.0};
  }
  const Sum total = prefix[m];
  auto arc = [&](std::size_t from, std::size_t to) {
    return Sum{prefix[to].x - prefix[from].x, prefix[to].y - prefix[from].y,
               prefix[to].w - prefix[from].w};
  };

  double best = -1.0;
  std::size_t bi = 0, bj = 1, bl = 2;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const Sum a = arc(i, j);
      for (std::size_t l = j + 1; l < m; ++l) {
        const Sum b = arc(j, l);
        const Sum c{total.x - a.x - b.x, total.y - a.y - b.y, total.w - a.w - b.w};
        const double det = a.x * (b.y * c.w - b.w * c.y) - a.y * (b.x * c.w - b.w * c.x) +
                           a.w * (b.x * c.y - b.y * c.x);
        if (std::abs(det) > best) {
          best = std::abs(det);
          bi = i;
          bj = j;
          bl = l;
        }
      }
    }

  std::vector<int> labels(n, 0);
  for (std::size_t p = 0; p < m; ++p) {
    int label = 2;
    if (p >= bi && p < bj) label = 0;
    else if (p >= bj && p < bl) label = 1;
    labels[ring[p].index] = label;
  }
  return labels;
}

}  // namespace detail

ClusteringResult solve_exact_1d(std::span<const double> values, const KernelOptions& opts) {
  auto labels = detail::exact_1d_labels(values);
  DenseMatrix reduced(values.size(), 2);
  for (std::size_t i = 0; i < values.size(); ++i) {
    reduced(i, 0) = values[i];
    reduced(i, 1) = 1.0;
  }
  return detail::finish(reduced, {0, 1}, Assignment(2, std::move(labels)), SolverTag::exact_1d,
                        opts);
}

ClusteringResult solve_exact_2d(const DenseMatrix& points, const SolverConfig& config) {
  if (points.cols() != 2) throw Error(Errc::ShapeMismatch, "solve_exact_2d needs n x 2 points");
  const AugmentedData aug = augment_and_pick(points, config.kernel);
  if (aug.k == 3) {
    const DenseMatrix plane = detail::centered_plane(aug.reduced, config.kernel);
    return detail::finish(aug.reduced, aug.picked, Assignment(3, detail::exact_2d_labels(plane)),
                          SolverTag::exact_2d, config.kernel);
  }
  if (aug.k == 2 && config.allow_1d_fallback) {
    const auto y = detail::centered_coordinate(aug.reduced);
    return detail::finish(aug.reduced, aug.picked, Assignment(2, detail::exact_1d_labels(y)),
                          SolverTag::exact_1d, config.kernel);
  }
  if (aug.k == 1) throw Error(Errc::AllEqual, "all points coincide");
  throw Error(Errc::DegenerateRank, "points are collinear after centering");
}

namespace {

// Depth-first enumeration of all labelings with no empty cluster. Each
// leaf's aggregate is built by summing rows in a fixed order, so scores are
// reproducible bit for bit.
template <class Visit>
void enumerate_labelings(const DenseMatrix& reduced, Visit&& visit) {
  const std::size_t n = reduced.rows();
  const std::size_t k = reduced.cols();
  std::vector<std::vector<double>> level(n + 1, std::vector<double>(k * k, 0.0));
  std::vector<int> labels(n, 0);
  std::vector<std::size_t> counts(k, 0);
  std::size_t empty = k;
  KernelOptions opts;
  opts.max_side = k;

  auto recurse = [&](auto&& self, std::size_t i) -> void {
    if (empty > n - i) return;
    if (i == n) {
      const double score = std::abs(determinant(DenseMatrix(k, k, level[n]), opts));
      visit(labels, score);
      return;
    }
    const auto row = reduced.row(i);
    for (std::size_t c = 0; c < k; ++c) {
      level[i + 1] = level[i];
      for (std::size_t j = 0; j < k; ++j) level[i + 1][c * k + j] += row[j];
      labels[i] = static_cast<int>(c);
      if (counts[c]++ == 0) --empty;
      self(self, i + 1);
      if (--counts[c] == 0) ++empty;
    }
  };
  recurse(recurse, 0);
}

void check_brute_force_size(std::size_t n, std::size_t k, std::size_t cap) {
  double count = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    count *= static_cast<double>(k);
    if (count > static_cast<double>(cap)) {
      throw Error(Errc::TooLarge, std::to_string(k) + "^" + std::to_string(n) +
                                      " labelings exceed the cap of " + std::to_string(cap));
    }
  }
}

}  // namespace

ClusteringResult brute_force(const DenseMatrix& reduced, const SolverConfig& config) {
  const std::size_t n = reduced.rows(), k = reduced.cols();
  check_brute_force_size(n, k, config.brute_force_cap);
  if (n < k) throw Error(Errc::DegenerateInput, "fewer rows than clusters");
  double best = -1.0;
  std::vector<int> best_labels;
  enumerate_labelings(reduced, [&](const std::vector<int>& labels, double score) {
    if (score > best) {
      best = score;
      best_labels = labels;
    }
  });
  std::vector<std::size_t> picked(k);
  std::iota(picked.begin(), picked.end(), 0);
  return detail::finish(reduced, std::move(picked), Assignment(k, std::move(best_labels)),
                        SolverTag::brute_force, config.kernel);
}

std::vector<Assignment> brute_force_optima(const DenseMatrix& reduced, double rel_tol,
                                           const SolverConfig& config) {
  const std::size_t n = reduced.rows(), k = reduced.cols();
  check_brute_force_size(n, k, config.brute_force_cap);
  double best = 0.0;
  enumerate_labelings(reduced, [&](const std::vector<int>&, double score) {
    best = std::max(best, score);
  });
  std::set<std::vector<int>> seen;
  std::vector<Assignment> out;
  if (best == 0.0) return out;
  enumerate_labelings(reduced, [&](const std::vector<int>& labels, double score) {
    if (score < best * (1.0 - rel_tol)) return;
    Assignment c = canonical(Assignment(k, labels));
    if (seen.insert(c.labels()).second) out.push_back(std::move(c));
  });
  return out;
}

ClusteringResult k_cofactors(const DenseMatrix& reduced, const Assignment& init,
                             const SolverConfig& config) {
  const std::size_t n = reduced.rows(), k = reduced.cols();
  if (init.n() != n || init.k() != k) {
    throw Error(Errc::ShapeMismatch, "init is " + std::to_string(init.n()) + "x" +
                                         std::to_string(init.k()) + ", data is " +
                                         std::to_string(n) + "x" + std::to_string(k));
  }
  if (config.max_iters == 0) throw Error(Errc::InvalidArgument, "max_iters must be at least 1");
  KernelOptions opts = config.kernel;
  opts.max_side = std::max(opts.max_side, k);

  std::vector<int> labels = init.labels();
  DenseMatrix aggregate = cluster_aggregate(init, reduced);
  double score = init.has_empty_cluster() ? 0.0 : std::abs(determinant(aggregate, opts));
  DenseMatrix partition;
  try {
    if (score == 0.0) throw Error(Errc::Singular, "init has an empty cluster or zero score");
    partition = inverse(aggregate, opts);
  } catch (const Error& e) {
    if (e.code() != Errc::Singular) throw;
    throw Error(Errc::SingularIteration, std::string("initial aggregate is singular: ") + e.what());
  }

  ClusteringResult result;
  result.score_trace.push_back(score);
  std::vector<std::size_t> sizes = Assignment(k, labels).cluster_sizes();

  auto hash_labels = [](const std::vector<int>& v) {
    std::size_t h = 1469598103934665603ULL;
    for (int x : v) h = (h ^ static_cast<std::size_t>(x)) * 1099511628211ULL;
    return h;
  };
  std::unordered_set<std::size_t> visited{hash_labels(labels)};

  // Best single-row move by |1 + P[i][c] - P[i][cur]|; returns false when no
  // move raises |det|. Moves emptying a cluster are never considered.
  auto best_single_move = [&](const DenseMatrix& proj, std::size_t& row, int& to) {
    double best = 1.0 + 1e-12;
    bool found = false;
    for (std::size_t i = 0; i < n; ++i) {
      const auto cur = static_cast<std::size_t>(labels[i]);
      if (sizes[cur] <= 1) continue;
      for (std::size_t c = 0; c < k; ++c) {
        if (c == cur) continue;
        const double factor = std::abs(1.0 + proj(i, c) - proj(i, cur));
        if (factor > best) {
          best = factor;
          row = i;
          to = static_cast<int>(c);
          found = true;
        }
      }
    }
    return found;
  };

  result.termination = Termination::iteration_cap;
  std::size_t iter = 0;
  for (; iter < config.max_iters; ++iter) {
    const DenseMatrix proj = reduced * partition;
    std::vector<int> proposal = idxmax_labels(proj, std::span<const int>(labels), config.tie_tol);

    std::vector<int> next;
    bool accepted = false;
    if (proposal != labels) {
      Assignment candidate(k, proposal);
      if (!candidate.has_empty_cluster()) {
        const double cand_score = std::abs(determinant(cluster_aggregate(candidate, reduced), opts));
        if (cand_score > score) {
          next = std::move(proposal);
          accepted = true;
        }
      }
    }
    if (!accepted) {
      std::size_t row = 0;
      int to = 0;
      if (!best_single_move(proj, row, to)) {
        result.termination = Termination::converged;
        break;
      }
      next = labels;
      next[row] = to;
      const double cand_score =
          std::abs(determinant(cluster_aggregate(Assignment(k, next), reduced), opts));
      if (!(cand_score > score)) {
        // Predicted gain lost to rounding: numerically a fixed point.
        result.termination = Termination::converged;
        break;
      }
    }

    if (!visited.insert(hash_labels(next)).second) {
      result.termination = Termination::cycle;
      break;
    }
    labels = std::move(next);
    Assignment current(k, labels);
    sizes = current.cluster_sizes();
    aggregate = cluster_aggregate(current, reduced);
    score = std::abs(determinant(aggregate, opts));
    partition = inverse(aggregate, opts);
    result.score_trace.push_back(score);
  }

  result.k = k;
  result.picked_columns.resize(k);
  std::iota(result.picked_columns.begin(), result.picked_columns.end(), 0);
  result.assignment = Assignment(k, std::move(labels));
  result.partition = std::move(partition);
  result.score = score;
  result.solver = SolverTag::k_cofactors;
  result.reduced = reduced;
  result.iterations = iter;
  return result;
}

}  // namespace dmic
