#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include "dmic/error.hpp"

namespace dmic {

/// Row-major dense real matrix. Construction from external data rejects
/// NaN and infinities; arithmetic helpers below never produce them from
/// finite input except through division by a caller-supplied zero.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> data() const noexcept { return data_; }

  std::vector<double> column(std::size_t c) const;
  double max_abs() const noexcept;

  DenseMatrix transpose() const;
  DenseMatrix select_columns(std::span<const std::size_t> cols) const;
  DenseMatrix select_rows(std::span<const std::size_t> rows) const;
  /// Appends a column of ones on the right: [A 1].
  DenseMatrix append_ones_column() const;
  std::vector<double> column_means() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(double s, const DenseMatrix& a);

/// Adds the row vector `b` to every row of `a`.
DenseMatrix add_row_vector(const DenseMatrix& a, std::span<const double> b);

/// Knobs shared by the elimination routines.
struct KernelOptions {
  std::size_t max_side = 12;       // determinant size cap
  double tol_singular = 1e-12;     // |det| / scale^k below this is singular
  double rank_tol_relative = 1e-6; // pivot threshold as a fraction of max |entry|
};

double determinant(const DenseMatrix& m, const KernelOptions& opts = {});

/// Gauss-Jordan inverse with partial pivoting. Throws Errc::Singular when
/// |det| is below tol_singular relative to the entry scale.
DenseMatrix inverse(const DenseMatrix& m, const KernelOptions& opts = {});

/// Number of pivots above `tol` under full-pivoted elimination.
std::size_t numerical_rank(const DenseMatrix& m, double tol);
std::size_t numerical_rank(const DenseMatrix& m, const KernelOptions& opts = {});
double default_rank_tolerance(const DenseMatrix& m, const KernelOptions& opts = {});

/// Greedy left-to-right choice of `k` independent columns. Ones columns
/// placed last by the caller are therefore picked only when needed.
std::vector<std::size_t> pick_independent_columns(const DenseMatrix& m, std::size_t k,
                                                  const KernelOptions& opts = {});

/// Per-row argmax labels. Exact ties go to the lowest column unless
/// `reference` is given: then a row keeps its reference label whenever that
/// entry is within `tie_tol` (relative to the row scale) of the row maximum.
std::vector<int> idxmax_labels(const DenseMatrix& m,
                               std::optional<std::span<const int>> reference = std::nullopt,
                               double tie_tol = 0.0);

/// One-hot form of idxmax_labels.
DenseMatrix idxmax(const DenseMatrix& m);

}  // namespace dmic
