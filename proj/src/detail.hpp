#pragma once

#include <span>
#include <vector>

#include "dmic/clustering.hpp"

namespace dmic::detail {

/// Builds a result for `assignment` on `reduced`: score and partition.
ClusteringResult finish(const DenseMatrix& reduced, std::vector<std::size_t> picked,
                        Assignment assignment, SolverTag tag, const KernelOptions& opts);

/// Mean split of 1d values: 0 above the mean, 1 at or below.
std::vector<int> exact_1d_labels(std::span<const double> values);

/// Best wedge partition of centered 2d points (n x 2, column means zero).
std::vector<int> exact_2d_labels(const DenseMatrix& centered);

/// The centered column of largest spread, an affine image of rank-2 data.
std::vector<double> centered_coordinate(const DenseMatrix& reduced);

/// Two independent centered columns of rank-3 data (ones in its span).
DenseMatrix centered_plane(const DenseMatrix& reduced, const KernelOptions& opts);

}  // namespace dmic::detail
