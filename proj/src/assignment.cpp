#include <algorithm>
#include <numeric>
#include <string>

#include "dmic/clustering.hpp"

namespace dmic {

Assignment::Assignment(std::size_t k, std::vector<int> labels) : k_(k), labels_(std::move(labels)) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0 || static_cast<std::size_t>(labels_[i]) >= k_) {
      throw Error(Errc::InvalidArgument, "row " + std::to_string(i) + " has label " +
                                             std::to_string(labels_[i]) + " outside [0, " +
                                             std::to_string(k_) + ")");
    }
  }
}

Assignment Assignment::from_matrix(const DenseMatrix& one_hot) {
  std::vector<int> labels(one_hot.rows(), -1);
  for (std::size_t r = 0; r < one_hot.rows(); ++r) {
    int ones = 0;
    for (std::size_t c = 0; c < one_hot.cols(); ++c) {
      const double v = one_hot(r, c);
      if (v == 1.0) {
        labels[r] = static_cast<int>(c);
        ++ones;
      } else if (v != 0.0) {
        ones = -1;
        break;
      }
    }
    if (ones != 1) throw Error(Errc::InvalidArgument, "row " + std::to_string(r) + " is not one-hot");
  }
  return Assignment(one_hot.cols(), std::move(labels));
}

std::vector<std::size_t> Assignment::cluster_sizes() const {
  std::vector<std::size_t> sizes(k_, 0);
  for (int l : labels_) ++sizes[static_cast<std::size_t>(l)];
  return sizes;
}

bool Assignment::has_empty_cluster() const {
  const auto sizes = cluster_sizes();
  return std::find(sizes.begin(), sizes.end(), 0U) != sizes.end();
}

DenseMatrix Assignment::to_matrix() const {
  DenseMatrix m(labels_.size(), k_);
  for (std::size_t r = 0; r < labels_.size(); ++r) m(r, static_cast<std::size_t>(labels_[r])) = 1.0;
  return m;
}

Assignment Assignment::restricted(std::span<const std::size_t> rows) const {
  std::vector<int> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(labels_.at(r));
  return Assignment(k_, std::move(out));
}

Assignment Assignment::relabeled(std::span<const int> perm) const {
  if (perm.size() != k_) throw Error(Errc::ShapeMismatch, "permutation length differs from k");
  std::vector<int> out(labels_.size());
  for (std::size_t r = 0; r < labels_.size(); ++r) out[r] = perm[static_cast<std::size_t>(labels_[r])];
  return Assignment(k_, std::move(out));
}

namespace {

// perm[old] = new label under the canonical ordering.
std::vector<int> canonical_permutation(const Assignment& c) {
  const std::size_t k = c.k();
  std::vector<std::size_t> size(k, 0), first(k, c.n());
  for (std::size_t i = 0; i < c.n(); ++i) {
    const auto l = static_cast<std::size_t>(c[i]);
    ++size[l];
    first[l] = std::min(first[l], i);
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (size[a] != size[b]) return size[a] > size[b];
    return first[a] < first[b];
  });
  std::vector<int> perm(k);
  for (std::size_t pos = 0; pos < k; ++pos) perm[order[pos]] = static_cast<int>(pos);
  return perm;
}

}  // namespace

Assignment canonical(const Assignment& c) { return c.relabeled(canonical_permutation(c)); }

ClusteringResult canonicalize(ClusteringResult r) {
  const auto perm = canonical_permutation(r.assignment);
  r.assignment = r.assignment.relabeled(perm);
  if (!r.partition.empty()) {
    // C -> C P moves column j of C to perm[j]; D = (C^T A)^-1 moves alike.
    DenseMatrix d(r.partition.rows(), r.partition.cols());
    for (std::size_t row = 0; row < d.rows(); ++row)
      for (std::size_t j = 0; j < d.cols(); ++j)
        d(row, static_cast<std::size_t>(perm[j])) = r.partition(row, j);
    r.partition = std::move(d);
  }
  return r;
}

bool same_up_to_permutation(const Assignment& a, const Assignment& b) {
  return a.n() == b.n() && canonical(a).labels() == canonical(b).labels();
}

}  // namespace dmic
