#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "dmic/fixtures.hpp"
#include "dmic/matrix.hpp"
#include "oracles.hpp"

using dmic::DenseMatrix;
using dmic::Errc;

namespace {

Eigen::MatrixXd to_eigen(const DenseMatrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const dmic::Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::InvalidArgument;
}

}  // namespace

TEST_CASE("construction rejects non-finite entries and bad sizes") {
  CHECK(code_of([] { DenseMatrix(1, 2, std::vector<double>{1.0, NAN}); }) == Errc::NonFinite);
  CHECK(code_of([] { DenseMatrix(1, 2, std::vector<double>{1.0, INFINITY}); }) == Errc::NonFinite);
  CHECK_THROWS(DenseMatrix(2, 2, std::vector<double>{1.0, 2.0, 3.0}));
}

TEST_CASE("determinant examples") {
  CHECK(dmic::determinant(DenseMatrix::identity(3)) == doctest::Approx(1.0));
  const DenseMatrix s = dmic::fixtures::example2_strategy();
  CHECK(dmic::determinant(s) == doctest::Approx(oracle::cofactor_det(s)).epsilon(1e-12));
  CHECK(dmic::determinant(DenseMatrix{{1, 2, 3}, {4, 5, 6}, {1, 2, 3}}) == doctest::Approx(0.0));
  CHECK(code_of([] { dmic::determinant(DenseMatrix(2, 3)); }) == Errc::NonSquare);
  CHECK(code_of([] { dmic::determinant(DenseMatrix::identity(13)); }) == Errc::TooLarge);
}

TEST_CASE("determinant matches cofactor expansion on random input") {
  dmic::Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.index(6);
    const auto m = oracle::random_matrix(rng, n, n);
    const double ref = oracle::cofactor_det(m);
    CHECK(std::abs(dmic::determinant(m) - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("row permutation flips the sign by parity; det is multiplicative") {
  dmic::Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(5);
    const auto m = oracle::random_matrix(rng, n, n);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);
    int inversions = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) inversions += perm[i] > perm[j];
    const double sign = inversions % 2 ? -1.0 : 1.0;
    const double d = dmic::determinant(m);
    CHECK(dmic::determinant(m.select_rows(perm)) == doctest::Approx(sign * d).epsilon(1e-9));

    const auto other = oracle::random_matrix(rng, n, n);
    const double lhs = dmic::determinant(m * other);
    const double rhs = d * dmic::determinant(other);
    CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("inverse examples and properties") {
  CHECK(dmic::inverse(DenseMatrix::identity(4)) == DenseMatrix::identity(4));
  const auto d = dmic::inverse(DenseMatrix{{2, 0}, {0, 4}});
  CHECK(d(0, 0) == doctest::Approx(0.5));
  CHECK(d(1, 1) == doctest::Approx(0.25));
  CHECK(d(0, 1) == 0.0);
  const DenseMatrix u{{1, 1}, {0, 1}};
  const auto ui = dmic::inverse(u);
  const auto prod = u * ui;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(prod(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));
  CHECK(ui(0, 1) == doctest::Approx(-1.0));
  CHECK(code_of([] { dmic::inverse(DenseMatrix{{1, 2}, {2, 4}}); }) == Errc::Singular);

  dmic::Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.index(6);
    const auto m = oracle::random_invertible(rng, n);
    const auto mi = dmic::inverse(m);
    const auto eye = m * mi;
    const auto back = dmic::inverse(mi);
    const Eigen::MatrixXd ref = to_eigen(m).inverse();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(std::abs(eye(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-9);
        CHECK(std::abs(back(i, j) - m(i, j)) <= 1e-8);
        CHECK(std::abs(mi(i, j) - ref(i, j)) <= 1e-8 * std::max(1.0, std::abs(ref(i, j))));
      }
  }
}

TEST_CASE("numerical rank examples") {
  CHECK(dmic::numerical_rank(DenseMatrix(4, 3)) == 0);
  CHECK(dmic::numerical_rank(dmic::fixtures::affine_7x2().append_ones_column()) == 3);
  DenseMatrix copies(5, 3);
  for (std::size_t i = 0; i < 5; ++i) {
    copies(i, 0) = 1.5;
    copies(i, 1) = -2.0;
    copies(i, 2) = 0.25;
  }
  CHECK(dmic::numerical_rank(copies) == 1);
}

TEST_CASE("numerical rank agrees with a full-pivot LU oracle and is invariant") {
  dmic::Rng rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t r = 2 + rng.index(6), c = 2 + rng.index(5);
    const std::size_t true_rank = 1 + rng.index(std::min(r, c));
    const auto m = oracle::random_matrix(rng, r, true_rank) * oracle::random_matrix(rng, true_rank, c);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(to_eigen(m));
    lu.setThreshold(1e-9);
    const std::size_t rank = dmic::numerical_rank(m);
    CHECK(rank == static_cast<std::size_t>(lu.rank()));
    CHECK(rank == true_rank);

    std::vector<std::size_t> rows(r), cols(c);
    for (std::size_t i = 0; i < r; ++i) rows[i] = i;
    for (std::size_t j = 0; j < c; ++j) cols[j] = j;
    rng.shuffle(rows);
    rng.shuffle(cols);
    CHECK(dmic::numerical_rank(m.select_rows(rows).select_columns(cols)) == rank);
    CHECK(dmic::numerical_rank(oracle::random_invertible(rng, r) * m) == rank);
  }
}

TEST_CASE("pick_independent_columns") {
  // Full-rank A without 1 in its span: everything is picked.
  const auto a = dmic::fixtures::affine_7x2().append_ones_column();
  CHECK(dmic::pick_independent_columns(a, 3) == std::vector<std::size_t>{0, 1, 2});

  // Row-stochastic A: the ones column is the sum of A's columns and is skipped.
  const auto s = dmic::fixtures::dmi_20x3().append_ones_column();
  CHECK(dmic::pick_independent_columns(s, 3) == std::vector<std::size_t>{0, 1, 2});

  // [[1,2,3],[2,4,7]]: column 1 = 2 * column 0, so the greedy pair is {0, 2}
  // (minor 1*7 - 3*2 = 1 is nonzero).
  const DenseMatrix m{{1, 2, 3, 1}, {2, 4, 7, 1}};
  CHECK(dmic::numerical_rank(m) == 2);
  CHECK(dmic::pick_independent_columns(m, 2) == std::vector<std::size_t>{0, 2});
  CHECK(code_of([&] { dmic::pick_independent_columns(m, 3); }) == Errc::RankMismatch);
}

TEST_CASE("idxmax examples and properties") {
  const auto one_hot = dmic::idxmax(DenseMatrix{{.3, .4, .1}, {0, -1, .1}});
  CHECK(one_hot == DenseMatrix{{0, 1, 0}, {0, 0, 1}});
  CHECK(dmic::idxmax(DenseMatrix{{5, 5, 5}}) == DenseMatrix{{1, 0, 0}});
  CHECK(dmic::idxmax(DenseMatrix{{-3}, {2}, {0}}) == DenseMatrix{{1}, {1}, {1}});

  // A reference label wins ties.
  const std::vector<int> ref{2};
  CHECK(dmic::idxmax_labels(DenseMatrix{{5, 5, 5}}, std::span<const int>(ref)) == std::vector<int>{2});

  dmic::Rng rng(15);
  for (int trial = 0; trial < 50; ++trial) {
    auto m = oracle::random_matrix(rng, 6, 4);
    const auto labels = dmic::idxmax_labels(m);
    const auto hot = dmic::idxmax(m);
    for (std::size_t i = 0; i < 6; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < 4; ++j) sum += hot(i, j);
      CHECK(sum == 1.0);
      const double shift = 10.0 * rng.uniform() - 5.0;
      for (std::size_t j = 0; j < 4; ++j) m(i, j) += shift;
    }
    CHECK(dmic::idxmax_labels(m) == labels);
  }
}
