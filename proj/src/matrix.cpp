#include "dmic/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace dmic {

namespace {

void require_finite(std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(Errc::NonFinite, "entry " + std::to_string(i) + " is not finite");
    }
  }
}

std::string shape(const DenseMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// LU with partial pivoting in place; returns the permutation sign, or 0 if
// an exactly zero column was met.
int lu_in_place(std::vector<double>& a, std::size_t n) {
  int sign = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::abs(a[col * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      double v = std::abs(a[r * n + col]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best == 0.0) return 0;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      sign = -sign;
    }
    const double d = a[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / d;
      if (f == 0.0) continue;
      a[r * n + col] = f;
      for (std::size_t c = col + 1; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
    }
  }
  return sign;
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (!std::isfinite(fill)) throw Error(Errc::NonFinite, "fill value is not finite");
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols) {
    throw Error(Errc::ShapeMismatch, std::to_string(data_.size()) + " entries for a " +
                                         std::to_string(rows) + "x" + std::to_string(cols) +
                                         " matrix");
  }
  require_finite(data_);
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error(Errc::ShapeMismatch, "ragged row in initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite(data_);
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw Error(Errc::ShapeMismatch, "matrix needs at least one row and one column");
  }
  const std::size_t cols = rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      throw Error(Errc::ShapeMismatch, "row " + std::to_string(r) + " has " +
                                           std::to_string(rows[r].size()) + " entries, expected " +
                                           std::to_string(cols));
    }
    data.insert(data.end(), rows[r].begin(), rows[r].end());
  }
  return DenseMatrix(rows.size(), cols, std::move(data));
}

std::vector<double> DenseMatrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

double DenseMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

DenseMatrix DenseMatrix::select_columns(std::span<const std::size_t> cols) const {
  DenseMatrix out(rows_, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] >= cols_) throw Error(Errc::ShapeMismatch, "column index out of range");
    for (std::size_t r = 0; r < rows_; ++r) out(r, j) = (*this)(r, cols[j]);
  }
  return out;
}

DenseMatrix DenseMatrix::select_rows(std::span<const std::size_t> rows) const {
  DenseMatrix out(rows.size(), cols_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= rows_) throw Error(Errc::ShapeMismatch, "row index out of range");
    std::copy_n(row(rows[i]).begin(), cols_, out.row(i).begin());
  }
  return out;
}

DenseMatrix DenseMatrix::append_ones_column() const {
  DenseMatrix out(rows_, cols_ + 1);
  for (std::size_t r = 0; r < rows_; ++r) {
    std::copy_n(row(r).begin(), cols_, out.row(r).begin());
    out(r, cols_) = 1.0;
  }
  return out;
}

std::vector<double> DenseMatrix::column_means() const {
  std::vector<double> mean(cols_, 0.0);
  if (rows_ == 0) return mean;
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) mean[c] += (*this)(r, c);
  for (double& v : mean) v /= static_cast<double>(rows_);
  return mean;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(Errc::ShapeMismatch, "cannot multiply " + shape(a) + " by " + shape(b));
  }
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double v = a(i, k);
      if (v == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += v * b(k, j);
    }
  return out;
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(Errc::ShapeMismatch, "cannot add " + shape(a) + " and " + shape(b));
  }
  DenseMatrix out = a;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) += b(r, c);
  return out;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) { return a + (-1.0) * b; }

DenseMatrix operator*(double s, const DenseMatrix& a) {
  DenseMatrix out = a;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (double& v : out.row(r)) v *= s;
  return out;
}

DenseMatrix add_row_vector(const DenseMatrix& a, std::span<const double> b) {
  if (b.size() != a.cols()) throw Error(Errc::ShapeMismatch, "row vector width mismatch");
  DenseMatrix out = a;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) += b[c];
  return out;
}

double determinant(const DenseMatrix& m, const KernelOptions& opts) {
  if (!m.square()) throw Error(Errc::NonSquare, "determinant of a " + shape(m) + " matrix");
  if (m.rows() > opts.max_side) {
    throw Error(Errc::TooLarge, "determinant side " + std::to_string(m.rows()) +
                                    " exceeds cap " + std::to_string(opts.max_side));
  }
  const std::size_t n = m.rows();
  if (n == 0) return 1.0;
  std::vector<double> a(m.data().begin(), m.data().end());
  const int sign = lu_in_place(a, n);
  if (sign == 0) return 0.0;
  double det = sign;
  for (std::size_t i = 0; i < n; ++i) det *= a[i * n + i];
  return det;
}

DenseMatrix inverse(const DenseMatrix& m, const KernelOptions& opts) {
  if (!m.square()) throw Error(Errc::NonSquare, "inverse of a " + shape(m) + " matrix");
  const std::size_t n = m.rows();
  const double scale = m.max_abs();
  if (scale == 0.0) throw Error(Errc::Singular, "zero matrix");
  // Scale-free singularity test on the normalized matrix.
  {
    KernelOptions unlimited = opts;
    unlimited.max_side = n;
    const double det = determinant((1.0 / scale) * m, unlimited);
    if (std::abs(det) < opts.tol_singular) {
      throw Error(Errc::Singular, "relative |det| " + std::to_string(std::abs(det)) +
                                      " below tolerance");
    }
  }
  std::vector<double> a(m.data().begin(), m.data().end());
  DenseMatrix inv = DenseMatrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    if (a[pivot * n + col] == 0.0) throw Error(Errc::Singular, "zero pivot");
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) {
        std::swap(a[col * n + c], a[pivot * n + c]);
        std::swap(inv(col, c), inv(pivot, c));
      }
    }
    const double d = a[col * n + col];
    for (std::size_t c = 0; c < n; ++c) {
      a[col * n + c] /= d;
      inv(col, c) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r * n + col];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) {
        a[r * n + c] -= f * a[col * n + c];
        inv(r, c) -= f * inv(col, c);
      }
    }
  }
  return inv;
}

double default_rank_tolerance(const DenseMatrix& m, const KernelOptions& opts) {
  const double scale = m.max_abs();
  return scale == 0.0 ? opts.rank_tol_relative : opts.rank_tol_relative * scale;
}

std::size_t numerical_rank(const DenseMatrix& m, double tol) {
  if (!(tol > 0.0)) throw Error(Errc::InvalidArgument, "rank tolerance must be positive");
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  std::vector<double> a(m.data().begin(), m.data().end());
  std::vector<std::size_t> row_order(rows), col_order(cols);
  for (std::size_t i = 0; i < rows; ++i) row_order[i] = i;
  for (std::size_t j = 0; j < cols; ++j) col_order[j] = j;
  auto at = [&](std::size_t r, std::size_t c) -> double& {
    return a[row_order[r] * cols + col_order[c]];
  };
  std::size_t rank = 0;
  const std::size_t steps = std::min(rows, cols);
  for (; rank < steps; ++rank) {
    std::size_t pr = rank, pc = rank;
    double best = 0.0;
    for (std::size_t r = rank; r < rows; ++r)
      for (std::size_t c = rank; c < cols; ++c) {
        const double v = std::abs(at(r, c));
        if (v > best) {
          best = v;
          pr = r;
          pc = c;
        }
      }
    if (best <= tol) break;
    std::swap(row_order[rank], row_order[pr]);
    std::swap(col_order[rank], col_order[pc]);
    const double d = at(rank, rank);
    for (std::size_t r = rank + 1; r < rows; ++r) {
      const double f = at(r, rank) / d;
      if (f == 0.0) continue;
      for (std::size_t c = rank; c < cols; ++c) at(r, c) -= f * at(rank, c);
    }
  }
  return rank;
}

std::size_t numerical_rank(const DenseMatrix& m, const KernelOptions& opts) {
  return numerical_rank(m, default_rank_tolerance(m, opts));
}

std::vector<std::size_t> pick_independent_columns(const DenseMatrix& m, std::size_t k,
                                                  const KernelOptions& opts) {
  const double tol = default_rank_tolerance(m, opts);
  const std::size_t rank = numerical_rank(m, tol);
  if (rank != k) {
    throw Error(Errc::RankMismatch, "requested " + std::to_string(k) +
                                        " independent columns from a rank-" +
                                        std::to_string(rank) + " matrix");
  }
  std::vector<std::size_t> picked;
  for (std::size_t j = 0; j < m.cols() && picked.size() < k; ++j) {
    std::vector<std::size_t> trial = picked;
    trial.push_back(j);
    if (numerical_rank(m.select_columns(trial), tol) == trial.size()) picked = std::move(trial);
  }
  if (picked.size() != k) {
    throw Error(Errc::RankMismatch, "greedy scan found only " + std::to_string(picked.size()) +
                                        " independent columns");
  }
  return picked;
}

std::vector<int> idxmax_labels(const DenseMatrix& m, std::optional<std::span<const int>> reference,
                               double tie_tol) {
  if (reference && reference->size() != m.rows()) {
    throw Error(Errc::ShapeMismatch, "reference assignment length differs from row count");
  }
  std::vector<int> labels(m.rows(), 0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    std::size_t best = 0;
    double scale = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (row[c] > row[best]) best = c;
      scale = std::max(scale, std::abs(row[c]));
    }
    if (reference) {
      const int ref = (*reference)[r];
      if (ref >= 0 && static_cast<std::size_t>(ref) < row.size() &&
          row[static_cast<std::size_t>(ref)] >= row[best] - tie_tol * scale) {
        best = static_cast<std::size_t>(ref);
      }
    }
    labels[r] = static_cast<int>(best);
  }
  return labels;
}

DenseMatrix idxmax(const DenseMatrix& m) {
  DenseMatrix out(m.rows(), m.cols());
  const auto labels = idxmax_labels(m);
  for (std::size_t r = 0; r < m.rows(); ++r) out(r, static_cast<std::size_t>(labels[r])) = 1.0;
  return out;
}

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NonFinite: return "NonFinite";
    case Errc::NonSquare: return "NonSquare";
    case Errc::Singular: return "Singular";
    case Errc::RankMismatch: return "RankMismatch";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::TooLarge: return "TooLarge";
    case Errc::DegenerateInput: return "DegenerateInput";
    case Errc::SingularIteration: return "SingularIteration";
    case Errc::AllEqual: return "AllEqual";
    case Errc::DegenerateRank: return "DegenerateRank";
    case Errc::UnansweredTask: return "UnansweredTask";
    case Errc::InsufficientTasks: return "InsufficientTasks";
    case Errc::LeaveOneOutUnanswered: return "LeaveOneOutUnanswered";
    case Errc::DeadOption: return "DeadOption";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::EmptyGold: return "EmptyGold";
    case Errc::MissingOption: return "MissingOption";
    case Errc::ZeroConditional: return "ZeroConditional";
    case Errc::DegenerateSpectrum: return "DegenerateSpectrum";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::InfeasibleAssignment: return "InfeasibleAssignment";
    case Errc::ParseError: return "ParseError";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::UnknownFixture: return "UnknownFixture";
  }
  return "Unknown";
}

}  // namespace dmic
