#include <algorithm>
#include <cmath>
#include <string>

#include "detail.hpp"
#include "dmic/clustering.hpp"
#include "dmic/random.hpp"

namespace dmic {

std::string_view to_string(SolverTag tag) noexcept {
  switch (tag) {
    case SolverTag::single_cluster: return "single_cluster";
    case SolverTag::exact_1d: return "exact_1d";
    case SolverTag::exact_2d: return "exact_2d";
    case SolverTag::k_cofactors: return "k_cofactors";
    case SolverTag::brute_force: return "brute_force";
  }
  return "unknown";
}

std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::not_iterative: return "not_iterative";
    case Termination::converged: return "converged";
    case Termination::iteration_cap: return "iteration_cap";
    case Termination::cycle: return "cycle";
  }
  return "unknown";
}

std::string_view to_string(SolverMode mode) noexcept {
  switch (mode) {
    case SolverMode::automatic: return "auto";
    case SolverMode::exact: return "exact";
    case SolverMode::k_cofactors: return "kcofactors";
    case SolverMode::brute: return "brute";
  }
  return "unknown";
}

SolverMode parse_solver_mode(std::string_view text) {
  for (auto mode : {SolverMode::automatic, SolverMode::exact, SolverMode::k_cofactors,
                    SolverMode::brute}) {
    if (to_string(mode) == text) return mode;
  }
  throw Error(Errc::InvalidArgument, "unknown solver mode '" + std::string(text) + "'");
}

AugmentedData augment_and_pick(const DenseMatrix& a, const KernelOptions& opts) {
  if (a.rows() == 0 || a.cols() == 0) throw Error(Errc::DegenerateInput, "empty input matrix");
  const DenseMatrix full = a.append_ones_column();
  const std::size_t k = numerical_rank(full, opts);
  if (k == 0) throw Error(Errc::DegenerateInput, "augmented matrix has rank 0");
  AugmentedData out;
  out.k = k;
  if (k == 1) {
    // Every column is a multiple of the ones column; take that one.
    out.picked = {a.cols()};
  } else {
    out.picked = pick_independent_columns(full, k, opts);
  }
  out.reduced = full.select_columns(out.picked);
  return out;
}

DenseMatrix cluster_aggregate(const Assignment& c, const DenseMatrix& reduced) {
  if (c.n() != reduced.rows()) {
    throw Error(Errc::ShapeMismatch, "assignment covers " + std::to_string(c.n()) +
                                         " rows, data has " + std::to_string(reduced.rows()));
  }
  DenseMatrix v(c.k(), reduced.cols());
  for (std::size_t i = 0; i < c.n(); ++i) {
    auto dst = v.row(static_cast<std::size_t>(c[i]));
    const auto src = reduced.row(i);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
  }
  return v;
}

double dmi_score(const Assignment& c, const DenseMatrix& reduced) {
  if (c.k() != reduced.cols()) {
    throw Error(Errc::ShapeMismatch, "assignment has " + std::to_string(c.k()) +
                                         " clusters, data has " + std::to_string(reduced.cols()) +
                                         " columns");
  }
  if (c.has_empty_cluster()) return 0.0;
  KernelOptions unlimited;
  unlimited.max_side = c.k();
  return std::abs(determinant(cluster_aggregate(c, reduced), unlimited));
}

Assignment mean_split_init(const DenseMatrix& reduced) {
  const auto mean = reduced.column_means();
  std::vector<double> neg(mean.size());
  for (std::size_t j = 0; j < mean.size(); ++j) neg[j] = -mean[j];
  return Assignment(reduced.cols(), idxmax_labels(add_row_vector(reduced, neg)));
}

namespace detail {

ClusteringResult finish(const DenseMatrix& reduced, std::vector<std::size_t> picked,
                        Assignment assignment, SolverTag tag, const KernelOptions& opts) {
  ClusteringResult r;
  r.k = reduced.cols();
  r.picked_columns = std::move(picked);
  r.solver = tag;
  r.score = dmi_score(assignment, reduced);
  if (r.score > 0.0) {
    try {
      r.partition = inverse(cluster_aggregate(assignment, reduced), opts);
    } catch (const Error& e) {
      if (e.code() != Errc::Singular) throw;
    }
  }
  r.assignment = std::move(assignment);
  r.reduced = reduced;
  return r;
}

std::vector<double> centered_coordinate(const DenseMatrix& reduced) {
  const auto mean = reduced.column_means();
  std::size_t best = 0;
  double best_norm = -1.0;
  for (std::size_t j = 0; j < reduced.cols(); ++j) {
    double norm = 0.0;
    for (std::size_t i = 0; i < reduced.rows(); ++i) {
      const double v = reduced(i, j) - mean[j];
      norm += v * v;
    }
    if (norm > best_norm) {
      best_norm = norm;
      best = j;
    }
  }
  std::vector<double> y(reduced.rows());
  for (std::size_t i = 0; i < reduced.rows(); ++i) y[i] = reduced(i, best) - mean[best];
  return y;
}

DenseMatrix centered_plane(const DenseMatrix& reduced, const KernelOptions& opts) {
  const auto mean = reduced.column_means();
  std::vector<double> neg(mean.size());
  for (std::size_t j = 0; j < mean.size(); ++j) neg[j] = -mean[j];
  const DenseMatrix centered = add_row_vector(reduced, neg);
  // Tolerance from the uncentered scale so centering cannot inflate noise.
  const double tol = default_rank_tolerance(reduced, opts);
  if (numerical_rank(centered, tol) != 2) {
    throw Error(Errc::DegenerateRank, "centered data does not span a plane");
  }
  std::vector<std::size_t> picked;
  for (std::size_t j = 0; j < centered.cols() && picked.size() < 2; ++j) {
    auto trial = picked;
    trial.push_back(j);
    if (numerical_rank(centered.select_columns(trial), tol) == trial.size()) picked = trial;
  }
  return centered.select_columns(picked);
}

}  // namespace detail

namespace {

bool usable_init(const Assignment& c, const DenseMatrix& reduced, const KernelOptions& opts) {
  if (c.n() != reduced.rows() || c.k() != reduced.cols() || c.has_empty_cluster()) return false;
  const DenseMatrix v = cluster_aggregate(c, reduced);
  const double scale = v.max_abs();
  KernelOptions unlimited = opts;
  unlimited.max_side = c.k();
  return scale > 0.0 && std::abs(determinant((1.0 / scale) * v, unlimited)) >= opts.tol_singular;
}

std::optional<Assignment> random_init(const DenseMatrix& reduced, Rng& rng,
                                      const KernelOptions& opts) {
  const std::size_t n = reduced.rows();
  const std::size_t k = reduced.cols();
  if (n < k) return std::nullopt;
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<int> labels(n);
    for (auto& l : labels) l = static_cast<int>(rng.index(k));
    Assignment c(k, std::move(labels));
    if (usable_init(c, reduced, opts)) return c;
  }
  return std::nullopt;
}

ClusteringResult run_restarts(const DenseMatrix& reduced, const std::vector<std::size_t>& picked,
                              const SolverConfig& config) {
  std::vector<Assignment> inits;
  if (auto mean = mean_split_init(reduced); usable_init(mean, reduced, config.kernel)) {
    inits.push_back(std::move(mean));
  }
  if (config.seed_assignment && usable_init(*config.seed_assignment, reduced, config.kernel)) {
    inits.push_back(*config.seed_assignment);
  }
  const Rng base(config.seed);
  for (std::size_t r = 0; inits.size() < std::max<std::size_t>(config.restarts, 1); ++r) {
    if (r >= 4 * std::max<std::size_t>(config.restarts, 1)) break;
    Rng rng = base.split(r);
    if (auto c = random_init(reduced, rng, config.kernel)) inits.push_back(std::move(*c));
  }
  if (inits.empty()) {
    throw Error(Errc::SingularIteration, "no initialization with a nonsingular aggregate");
  }
  // Sequential best-score-then-lowest-index merge; order is fixed.
  std::optional<ClusteringResult> best;
  for (const auto& init : inits) {
    ClusteringResult run = k_cofactors(reduced, init, config);
    if (!best || run.score > best->score) best = std::move(run);
  }
  best->picked_columns = picked;
  best->restarts_run = inits.size();
  return std::move(*best);
}

bool brute_force_fits(std::size_t n, std::size_t k, std::size_t cap) {
  double count = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    count *= static_cast<double>(k);
    if (count > static_cast<double>(cap)) return false;
  }
  return true;
}

}  // namespace

ClusteringResult dmi_cluster(const DenseMatrix& a, const SolverConfig& config) {
  const AugmentedData aug = augment_and_pick(a, config.kernel);
  const DenseMatrix& reduced = aug.reduced;
  const std::size_t n = reduced.rows();
  const std::size_t k = aug.k;

  ClusteringResult result;
  if (k == 1) {
    result = detail::finish(reduced, aug.picked, Assignment(1, std::vector<int>(n, 0)),
                            SolverTag::single_cluster, config.kernel);
    return result;
  }

  SolverMode mode = config.mode;
  if (mode == SolverMode::exact) {
    mode = brute_force_fits(n, k, config.brute_force_cap) ? SolverMode::brute
                                                          : SolverMode::automatic;
  }

  switch (mode) {
    case SolverMode::brute:
      result = brute_force(reduced, config);
      result.picked_columns = aug.picked;
      break;
    case SolverMode::k_cofactors:
      result = run_restarts(reduced, aug.picked, config);
      break;
    default:
      if (k == 2) {
        const auto y = detail::centered_coordinate(reduced);
        result = detail::finish(reduced, aug.picked,
                                Assignment(2, detail::exact_1d_labels(y)), SolverTag::exact_1d,
                                config.kernel);
      } else if (k == 3) {
        const DenseMatrix plane = detail::centered_plane(reduced, config.kernel);
        result = detail::finish(reduced, aug.picked,
                                Assignment(3, detail::exact_2d_labels(plane)),
                                SolverTag::exact_2d, config.kernel);
      } else {
        result = run_restarts(reduced, aug.picked, config);
      }
  }
  return canonicalize(std::move(result));
}

}  // namespace dmic
