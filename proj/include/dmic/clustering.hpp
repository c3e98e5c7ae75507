#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dmic/matrix.hpp"

namespace dmic {

/// Hard clustering of n rows into k labels: the one-hot n x k matrix C,
/// stored as one label per row.
class Assignment {
 public:
  Assignment() = default;
  Assignment(std::size_t k, std::vector<int> labels);
  static Assignment from_matrix(const DenseMatrix& one_hot);

  std::size_t n() const noexcept { return labels_.size(); }
  std::size_t k() const noexcept { return k_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  int operator[](std::size_t row) const { return labels_[row]; }

  std::vector<std::size_t> cluster_sizes() const;
  bool has_empty_cluster() const;
  DenseMatrix to_matrix() const;
  Assignment restricted(std::span<const std::size_t> rows) const;
  /// Relabels every row: new label = perm[old label].
  Assignment relabeled(std::span<const int> perm) const;

  friend bool operator==(const Assignment&, const Assignment&) = default;

 private:
  std::size_t k_ = 0;
  std::vector<int> labels_;
};

enum class SolverTag { single_cluster, exact_1d, exact_2d, k_cofactors, brute_force };
enum class Termination { not_iterative, converged, iteration_cap, cycle };
enum class SolverMode { automatic, exact, k_cofactors, brute };
enum class InitStrategy { mean_split, sp_seed };

std::string_view to_string(SolverTag tag) noexcept;
std::string_view to_string(Termination t) noexcept;
std::string_view to_string(SolverMode mode) noexcept;
SolverMode parse_solver_mode(std::string_view text);

struct SolverConfig {
  SolverMode mode = SolverMode::automatic;
  std::size_t restarts = 16;
  std::uint64_t seed = 0;
  std::size_t max_iters = 500;
  std::size_t brute_force_cap = 2'000'000;
  /// Relative slack under which k-cofactors keeps a row's current label.
  double tie_tol = 1e-12;
  /// solve_exact_2d falls back to the 1d solver on collinear input.
  bool allow_1d_fallback = true;
  KernelOptions kernel;
  /// Extra k-cofactors start (e.g. the surprisingly-popular answer when the
  /// init strategy is sp_seed). Ignored when its k differs from the data's.
  std::optional<Assignment> seed_assignment;
};

/// [A 1] reduced to k = rank([A 1]) independent columns.
struct AugmentedData {
  DenseMatrix reduced;
  std::vector<std::size_t> picked;
  std::size_t k = 0;
};

AugmentedData augment_and_pick(const DenseMatrix& a, const KernelOptions& opts = {});

/// C^T * reduced, the k x k matrix of per-cluster row sums.
DenseMatrix cluster_aggregate(const Assignment& c, const DenseMatrix& reduced);

/// |det(C^T reduced)|; zero when a cluster is empty.
double dmi_score(const Assignment& c, const DenseMatrix& reduced);

struct ClusteringResult {
  std::size_t k = 0;
  std::vector<std::size_t> picked_columns;
  Assignment assignment;
  /// inverse(C^T reduced); empty when the score is zero.
  DenseMatrix partition;
  double score = 0.0;
  SolverTag solver = SolverTag::single_cluster;
  DenseMatrix reduced;

  Termination termination = Termination::not_iterative;
  std::size_t iterations = 0;
  /// |det| after every accepted k-cofactors step, starting with the init.
  std::vector<double> score_trace;
  std::size_t restarts_run = 0;
};

/// Alternating assignment/update local search from `init`.
///
/// Each round proposes C <- idxmax(reduced * D), keeping a row's current
/// label on ties. The proposal is accepted when it strictly raises the
/// score; otherwise the single row move with the largest score gain is made
/// (gain factor 1 + P[i][c] - P[i][current], exact by the matrix determinant
/// lemma). The run stops when C is in idxmax(reduced * D) and no single move
/// raises |det|, so a converged result is a certified local maximum and the
/// score trace is strictly increasing. Throws Errc::SingularIteration when
/// `init` has a singular aggregate.
ClusteringResult k_cofactors(const DenseMatrix& reduced, const Assignment& init,
                             const SolverConfig& config = {});

/// Two-cluster optimum for 1d data: label 0 above the mean, label 1 at or
/// below it. Throws Errc::AllEqual when every value is identical.
ClusteringResult solve_exact_1d(std::span<const double> values, const KernelOptions& opts = {});

/// Exact optimum for 2d points. Every optimum is a wedge partition around
/// the mean, so all cut triples of the angular order are scored.
ClusteringResult solve_exact_2d(const DenseMatrix& points, const SolverConfig& config = {});

/// Global optimum over all k^n labelings of `reduced`. Oracle only.
ClusteringResult brute_force(const DenseMatrix& reduced, const SolverConfig& config = {});

/// Every labeling (canonical, deduplicated) whose score is within
/// `rel_tol` of the brute-force optimum.
std::vector<Assignment> brute_force_optima(const DenseMatrix& reduced, double rel_tol,
                                           const SolverConfig& config = {});

/// Full pipeline: augment, pick columns, dispatch to the best solver and
/// canonicalize labels.
ClusteringResult dmi_cluster(const DenseMatrix& a, const SolverConfig& config = {});

/// Mean-centered split C <- idxmax(reduced - mean row).
Assignment mean_split_init(const DenseMatrix& reduced);

/// Labels ordered by cluster size (desc), then by smallest member index.
Assignment canonical(const Assignment& c);
/// canonical() applied to the assignment with partition columns permuted to match.
ClusteringResult canonicalize(ClusteringResult r);
bool same_up_to_permutation(const Assignment& a, const Assignment& b);

}  // namespace dmic
