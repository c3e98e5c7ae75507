#include "dmic/single_task.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dmic/random.hpp"

namespace dmic {

void SingleTaskDataset::validate() const {
  if (options == 0) throw Error(Errc::InvalidArgument, "options must be positive");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.signal < 0 || static_cast<std::size_t>(r.signal) >= options) {
      throw Error(Errc::InvalidArgument, "record " + std::to_string(i) + " signal out of range");
    }
    if (r.prediction.size() != options) {
      throw Error(Errc::InvalidArgument, "record " + std::to_string(i) + " prediction has " +
                                             std::to_string(r.prediction.size()) + " entries");
    }
    double sum = 0.0;
    for (double p : r.prediction) {
      if (!std::isfinite(p) || p < 0.0) {
        throw Error(Errc::InvalidArgument, "record " + std::to_string(i) + " prediction entry invalid");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw Error(Errc::InvalidArgument, "record " + std::to_string(i) + " prediction sums to " +
                                             std::to_string(sum));
    }
  }
}

MomentEstimates estimate_moments(const SingleTaskDataset& d, const MomentOptions& options) {
  d.validate();
  const std::size_t c_opts = d.options;
  std::vector<double> counts(c_opts, 0.0);
  DenseMatrix cond(c_opts, c_opts);
  for (const auto& r : d.records) {
    const auto c = static_cast<std::size_t>(r.signal);
    counts[c] += 1.0;
    for (std::size_t j = 0; j < c_opts; ++j) cond(c, j) += r.prediction[j];
  }
  for (std::size_t c = 0; c < c_opts; ++c) {
    if (counts[c] == 0.0) throw Error(Errc::MissingOption, "no agent reported option " + std::to_string(c));
    for (std::size_t j = 0; j < c_opts; ++j) {
      cond(c, j) /= counts[c];
      if (options.smoothing > 0.0) {
        cond(c, j) = (cond(c, j) + options.smoothing) / (1.0 + options.smoothing * static_cast<double>(c_opts));
      }
    }
  }

  MomentEstimates m;
  m.conditional = cond;
  m.answer_shares.resize(c_opts);
  const double total = static_cast<double>(d.records.size());
  for (std::size_t c = 0; c < c_opts; ++c) m.answer_shares[c] = counts[c] / total;

  m.prior.resize(c_opts);
  for (std::size_t c = 0; c < c_opts; ++c) {
    double s = 0.0;
    for (std::size_t j = 0; j < c_opts; ++j) {
      if (cond(j, c) == 0.0) {
        throw Error(Errc::ZeroConditional, "Pr[" + std::to_string(c) + "|" + std::to_string(j) + "] = 0");
      }
      s += cond(c, j) / cond(j, c);
    }
    m.prior[c] = 1.0 / s;
  }
  const double prior_sum = std::accumulate(m.prior.begin(), m.prior.end(), 0.0);
  m.prior_inconsistency = std::abs(prior_sum - 1.0);
  for (double& v : m.prior) v /= prior_sum;

  m.joint = DenseMatrix(c_opts, c_opts);
  m.covariance = DenseMatrix(c_opts, c_opts);
  for (std::size_t c = 0; c < c_opts; ++c)
    for (std::size_t j = 0; j < c_opts; ++j) {
      m.joint(c, j) = cond(c, j) * m.prior[c];
      m.covariance(c, j) = m.joint(c, j) - m.prior[c] * m.prior[j];
    }
  for (std::size_t c = 0; c < c_opts; ++c)
    for (std::size_t j = 0; j < c_opts; ++j)
      m.joint_asymmetry = std::max(m.joint_asymmetry, std::abs(m.joint(c, j) - m.joint(j, c)));
  return m;
}

SpChoice surprisingly_popular_choice(std::span<const double> shares, std::span<const double> prior) {
  if (shares.size() != prior.size() || shares.empty()) {
    throw Error(Errc::ShapeMismatch, "shares and prior differ in length");
  }
  SpChoice out;
  out.ratios.resize(shares.size());
  for (std::size_t c = 0; c < shares.size(); ++c) {
    if (prior[c] > 0.0) {
      out.ratios[c] = shares[c] / prior[c];
    } else if (shares[c] == 0.0) {
      out.ratios[c] = 0.0;
    } else {
      throw Error(Errc::InvalidArgument, "option " + std::to_string(c) + " has zero prior but is reported");
    }
  }
  const auto best = std::max_element(out.ratios.begin(), out.ratios.end());
  out.option = static_cast<std::size_t>(best - out.ratios.begin());
  const double tol = 1e-12 * std::max(1.0, std::abs(*best));
  for (std::size_t c = 0; c < out.ratios.size(); ++c)
    if (c != out.option && *best - out.ratios[c] <= tol) out.tied = true;
  return out;
}

SpSingleResult surprisingly_popular_single(const SingleTaskDataset& d, const MomentOptions& options) {
  SpSingleResult r;
  r.moments = estimate_moments(d, options);
  r.choice = surprisingly_popular_choice(r.moments.answer_shares, r.moments.prior);
  return r;
}

namespace {

double norm(std::span<const double> x) {
  return std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
}

void project_out(std::vector<double>& x, std::span<const double> u) {
  if (u.empty()) return;
  const double dot = std::inner_product(x.begin(), x.end(), u.begin(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] -= dot * u[i];
}

std::vector<double> multiply(const DenseMatrix& m, std::span<const double> x) {
  std::vector<double> y(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) y[i] += m(i, j) * x[j];
  return y;
}

double residual_of(const DenseMatrix& m, std::span<const double> x, double lambda) {
  auto y = multiply(m, x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= lambda * x[i];
  return norm(y);
}

}  // namespace

EigenPair top_eigenpair(const DenseMatrix& sym, const SpectralOptions& options,
                        std::span<const double> deflate) {
  const std::size_t n = sym.rows();
  if (!sym.square() || n == 0) throw Error(Errc::NonSquare, "eigenpair needs a square matrix");
  // Gershgorin bound; adding it makes the spectrum nonnegative so the
  // dominant eigenvalue is the largest algebraic one.
  double shift = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += std::abs(sym(i, j));
    shift = std::max(shift, s);
  }

  Rng rng(options.seed);
  std::vector<double> x(n);
  for (int attempt = 0; attempt < 16; ++attempt) {
    for (auto& v : x) v = rng.normal();
    project_out(x, deflate);
    if (norm(x) > 1e-8) break;
  }
  const double start_norm = norm(x);
  if (start_norm == 0.0) throw Error(Errc::NonConvergence, "no admissible start vector");
  for (auto& v : x) v /= start_norm;

  EigenPair out;
  if (shift == 0.0) {
    out.vector = x;
    return out;
  }
  for (std::size_t it = 1; it <= options.max_iters; ++it) {
    auto y = multiply(sym, x);
    for (std::size_t i = 0; i < n; ++i) y[i] += shift * x[i];
    project_out(y, deflate);
    const double ny = norm(y);
    if (ny == 0.0) {
      out.value = -shift;
      out.vector = x;
      out.iterations = it;
      return out;
    }
    for (auto& v : y) v /= ny;
    const double rayleigh = std::inner_product(y.begin(), y.end(), multiply(sym, y).begin(), 0.0);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(y[i] - x[i]));
    x = std::move(y);
    if (change <= options.tol || residual_of(sym, x, rayleigh) <= options.tol * shift) {
      out.value = rayleigh;
      out.vector = x;
      out.iterations = it;
      return out;
    }
  }
  throw Error(Errc::NonConvergence, "power iteration hit " + std::to_string(options.max_iters) + " iterations");
}

SpectralResult spectral_truth_serum(const SingleTaskDataset& d, const SpectralOptions& options,
                                    const MomentOptions& moment_options) {
  SpectralResult r;
  r.moments = estimate_moments(d, moment_options);
  const std::size_t n = d.options;
  if (n < 2) throw Error(Errc::DegenerateSpectrum, "a single option has no spectrum");

  const DenseMatrix& cov = r.moments.covariance;
  DenseMatrix sym(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      sym(i, j) = 0.5 * (cov(i, j) + cov(j, i));
      r.asymmetry = std::max(r.asymmetry, std::abs(cov(i, j) - cov(j, i)));
    }
  r.asymmetry_flag = r.asymmetry > 1e-6;

  const double scale = sym.max_abs();
  if (scale <= 1e-12 * std::max(r.moments.joint.max_abs(), 1e-300)) {
    throw Error(Errc::DegenerateSpectrum, "covariance vanishes");
  }

  EigenPair first = top_eigenpair(sym, options);
  // Canonical orientation: largest-magnitude entry positive, near-ties to the lowest index.
  std::size_t lead = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(first.vector[i]) > std::abs(first.vector[lead]) * (1.0 + 1e-9)) lead = i;
  if (first.vector[lead] < 0.0)
    for (auto& v : first.vector) v = -v;

  SpectralOptions second_opts = options;
  second_opts.seed = options.seed + 1;
  const EigenPair second = top_eigenpair(sym, second_opts, first.vector);

  r.eigenvalue = first.value;
  r.second_eigenvalue = second.value;
  r.gap = first.value - second.value;
  r.eigenvector = first.vector;
  r.iterations = first.iterations;
  r.residual = residual_of(sym, first.vector, first.value);
  if (r.gap <= options.tol_gap * std::max(std::abs(first.value), scale)) {
    throw Error(Errc::DegenerateSpectrum, "eigenvalue gap " + std::to_string(r.gap) + " below tolerance");
  }

  for (std::size_t i = 0; i < n; ++i)
    r.projection += first.vector[i] * (r.moments.answer_shares[i] - r.moments.prior[i]);
  if (std::abs(r.projection) <= options.tie_tol) {
    r.tie = true;
  } else {
    r.label = r.projection > 0.0 ? 1 : -1;
  }
  return r;
}

}  // namespace dmic
