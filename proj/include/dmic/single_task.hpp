#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dmic/matrix.hpp"

namespace dmic {

struct SingleTaskRecord {
  int signal = 0;
  std::vector<double> prediction;
};

/// (signal, prediction) pairs for one question with `options` choices.
struct SingleTaskDataset {
  std::size_t options = 0;
  std::vector<SingleTaskRecord> records;

  /// Throws InvalidArgument on out-of-range signals or predictions that are
  /// negative or do not sum to 1 within 1e-9.
  void validate() const;
};

struct MomentOptions {
  /// Additive smoothing of the conditionals; 0 keeps zero entries as errors.
  double smoothing = 0.0;
};

struct MomentEstimates {
  std::vector<double> answer_shares;  // a
  DenseMatrix conditional;            // (c, c') -> Pr[c' | c]
  std::vector<double> prior;          // v
  DenseMatrix joint;                  // (c, c') -> Pr[c' | c] Pr[c]; row sums = prior
  DenseMatrix covariance;             // joint - v v^T
  /// |sum of the reconstructed prior - 1| before normalization.
  double prior_inconsistency = 0.0;
  /// max |joint - joint^T|; zero for conditionals from a consistent joint.
  double joint_asymmetry = 0.0;
};

/// Signal-group mean predictions and the harmonic prior reconstruction
/// Pr[c] = (sum_c' Pr[c'|c] / Pr[c|c'])^-1, renormalized to sum to 1.
/// Throws MissingOption and ZeroConditional.
MomentEstimates estimate_moments(const SingleTaskDataset& d, const MomentOptions& options = {});

struct SpChoice {
  std::size_t option = 0;
  bool tied = false;
  std::vector<double> ratios;  // a_c / v_c
};

/// argmax_c a_c / v_c with ties to the lowest index (flagged).
/// v_c must be positive wherever a_c > 0 (InvalidArgument otherwise); options
/// with a_c = v_c = 0 get ratio 0.
SpChoice surprisingly_popular_choice(std::span<const double> shares, std::span<const double> prior);

struct SpSingleResult {
  SpChoice choice;
  MomentEstimates moments;
};

SpSingleResult surprisingly_popular_single(const SingleTaskDataset& d,
                                           const MomentOptions& options = {});

struct SpectralOptions {
  double tol_gap = 1e-8;
  double tol = 1e-10;
  std::size_t max_iters = 10000;
  std::uint64_t seed = 0;
  /// Projections with |value| at or below this count as ties.
  double tie_tol = 1e-12;
};

struct SpectralResult {
  /// +1 or -1: sign of <e*, a - v>; empty on a tie.
  std::optional<int> label;
  bool tie = false;
  double eigenvalue = 0.0;
  double second_eigenvalue = 0.0;
  double gap = 0.0;
  std::vector<double> eigenvector;  // unit norm, largest-magnitude entry positive
  double projection = 0.0;
  double residual = 0.0;  // ||Cov e - lambda e||
  std::size_t iterations = 0;
  double asymmetry = 0.0;  // max |Cov - Cov^T| before symmetrization
  bool asymmetry_flag = false;
  MomentEstimates moments;
};

/// Top eigenvector of Cov by shifted power iteration from a seeded start,
/// then the sign of its inner product with a - v.
/// Throws DegenerateSpectrum (gap below tolerance) and NonConvergence.
SpectralResult spectral_truth_serum(const SingleTaskDataset& d, const SpectralOptions& options = {},
                                    const MomentOptions& moment_options = {});

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;
  std::size_t iterations = 0;
};

/// Largest algebraic eigenpair of a symmetric matrix, optionally restricted
/// to the orthogonal complement of `deflate`. Throws NonConvergence.
EigenPair top_eigenpair(const DenseMatrix& sym, const SpectralOptions& options,
                        std::span<const double> deflate = {});

}  // namespace dmic
