#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dmic/matrix.hpp"

namespace dmic::fixtures {

/// Names accepted by fixture_csv / fixture_matrix.
std::vector<std::string_view> names();

/// The matrix as decimal CSV, one row per line, digits exactly as published.
std::string fixture_csv(std::string_view name);
DenseMatrix fixture_matrix(std::string_view name);

/// 7x2 points used for the affine-invariance demonstration.
DenseMatrix affine_7x2();
/// The 2x2 linear map and 1x2 offset applied to affine_7x2.
DenseMatrix transform_T();
std::vector<double> transform_b();
/// 30x2 points of the k-cofactors walkthrough.
DenseMatrix kcofactors_30x2();
/// 20x3 row-stochastic answer matrix.
DenseMatrix dmi_20x3();

/// Example strategy; applied to pure states it yields the example answer rows.
DenseMatrix example2_strategy();

}  // namespace dmic::fixtures
