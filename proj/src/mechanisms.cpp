#include "dmic/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dmic/random.hpp"

namespace dmic {

std::vector<std::size_t> AgentReports::performed() const {
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < answers.size(); ++t)
    if (answers[t] != kNotPerformed) out.push_back(t);
  return out;
}

DenseMatrix AgentReports::report_matrix(std::size_t options) const {
  DenseMatrix r(answers.size(), options);
  for (std::size_t t = 0; t < answers.size(); ++t)
    if (answers[t] != kNotPerformed) r(t, static_cast<std::size_t>(answers[t])) = 1.0;
  return r;
}

ReportSet::ReportSet(std::size_t n_tasks, std::size_t options, std::vector<AgentReports> agents)
    : n_(n_tasks), options_(options), agents_(std::move(agents)) {
  if (n_ == 0 || options_ == 0) throw Error(Errc::InvalidArgument, "need at least one task and option");
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const auto& a = agents_[i];
    if (a.answers.size() != n_) {
      throw Error(Errc::ShapeMismatch, "agent " + std::to_string(i) + " has " +
                                           std::to_string(a.answers.size()) + " task slots, expected " +
                                           std::to_string(n_));
    }
    for (std::size_t t = 0; t < n_; ++t) {
      const int v = a.answers[t];
      if (v != kNotPerformed && (v < 0 || static_cast<std::size_t>(v) >= options_)) {
        throw Error(Errc::InvalidArgument, "agent " + std::to_string(i) + " task " +
                                               std::to_string(t) + " option " + std::to_string(v) +
                                               " out of range");
      }
    }
  }
}

DenseMatrix ReportSet::answer_counts(std::optional<std::size_t> exclude) const {
  DenseMatrix counts(n_, options_);
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    if (exclude && *exclude == i) continue;
    const auto& answers = agents_[i].answers;
    for (std::size_t t = 0; t < n_; ++t)
      if (answers[t] != kNotPerformed) counts(t, static_cast<std::size_t>(answers[t])) += 1.0;
  }
  return counts;
}

namespace {

double row_sum(const DenseMatrix& m, std::size_t r) {
  const auto row = m.row(r);
  return std::accumulate(row.begin(), row.end(), 0.0);
}

DenseMatrix normalize_rows(const DenseMatrix& counts, std::span<const std::size_t> rows) {
  DenseMatrix out(rows.size(), counts.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double s = row_sum(counts, rows[i]);
    for (std::size_t c = 0; c < counts.cols(); ++c) out(i, c) = counts(rows[i], c) / s;
  }
  return out;
}

// det of the k x options count matrix C^T R restricted to `positions`.
double count_determinant(std::span<const int> clusters, std::span<const int> reports,
                         std::span<const std::size_t> positions, std::size_t k,
                         std::size_t options) {
  DenseMatrix joint(k, options);
  for (std::size_t p : positions)
    joint(static_cast<std::size_t>(clusters[p]), static_cast<std::size_t>(reports[p])) += 1.0;
  KernelOptions opts;
  opts.max_side = std::max(opts.max_side, k);
  return determinant(joint, opts);
}

}  // namespace

DenseMatrix aggregate_answer_matrix(const ReportSet& reports) {
  const DenseMatrix counts = reports.answer_counts();
  std::vector<std::size_t> rows(reports.n_tasks());
  std::iota(rows.begin(), rows.end(), 0);
  for (std::size_t t : rows)
    if (row_sum(counts, t) == 0.0) {
      throw Error(Errc::UnansweredTask, "task " + std::to_string(t) + " has no answers");
    }
  return normalize_rows(counts, rows);
}

ClusteringResult extract_knowledge(const ReportSet& reports, const SolverConfig& config,
                                   InitStrategy init) {
  const DenseMatrix answers = aggregate_answer_matrix(reports);
  SolverConfig local = config;
  if (init == InitStrategy::sp_seed) local.seed_assignment = surprisingly_popular_multitask(answers);
  return dmi_cluster(answers, local);
}

std::string_view to_string(PaymentStatus s) noexcept {
  switch (s) {
    case PaymentStatus::paid: return "paid";
    case PaymentStatus::insufficient_training: return "insufficient_training";
    case PaymentStatus::rank_mismatch: return "rank_mismatch";
    case PaymentStatus::leave_one_out_unanswered: return "leave_one_out_unanswered";
  }
  return "unknown";
}

AgentPayment kdmi_payment(const ReportSet& reports, std::size_t agent, const SolverConfig& config,
                          std::uint64_t seed, const PaymentOptions& options,
                          const ClusteringResult* extraction) {
  const auto& me = reports.agents().at(agent);
  const std::size_t n_options = reports.options();
  AgentPayment out;
  out.id = me.id;

  const auto mine = me.performed();
  if (mine.size() < 2 * n_options) {
    throw Error(Errc::InsufficientTasks, "agent " + std::to_string(agent) + " performed " +
                                             std::to_string(mine.size()) + " tasks, needs " +
                                             std::to_string(2 * n_options));
  }

  const DenseMatrix others = reports.answer_counts(agent);
  for (std::size_t t : mine) {
    if (row_sum(others, t) == 0.0) {
      out.status = PaymentStatus::leave_one_out_unanswered;
      out.note = "task " + std::to_string(t) + " has no answers from other agents";
      return out;
    }
  }

  // Partition learned only from tasks this agent did not perform.
  std::vector<std::size_t> training;
  std::vector<bool> is_mine(reports.n_tasks(), false);
  for (std::size_t t : mine) is_mine[t] = true;
  for (std::size_t t = 0; t < reports.n_tasks(); ++t)
    if (!is_mine[t] && row_sum(others, t) > 0.0) training.push_back(t);
  if (training.size() < n_options) {
    out.status = PaymentStatus::insufficient_training;
    out.note = std::to_string(training.size()) + " training tasks";
    return out;
  }
  ClusteringResult learned;
  try {
    learned = dmi_cluster(normalize_rows(others, training), config);
  } catch (const Error& e) {
    out.status = PaymentStatus::insufficient_training;
    out.note = e.what();
    return out;
  }
  if (learned.k != n_options || learned.partition.empty()) {
    out.status = PaymentStatus::rank_mismatch;
    out.note = "learned " + std::to_string(learned.k) + " clusters for " +
               std::to_string(n_options) + " options";
    return out;
  }

  const DenseMatrix mine_aug = normalize_rows(others, mine).append_ones_column();
  const DenseMatrix projected = mine_aug.select_columns(learned.picked_columns) * learned.partition;
  out.task_clusters = idxmax_labels(projected);

  std::vector<int> my_reports(mine.size());
  for (std::size_t p = 0; p < mine.size(); ++p) my_reports[p] = me.answers[mine[p]];

  if (options.single_part) {
    std::vector<std::size_t> all(mine.size());
    std::iota(all.begin(), all.end(), 0);
    out.first_half = all;
    out.payment = count_determinant(out.task_clusters, my_reports, all, learned.k, n_options);
  } else {
    std::vector<std::size_t> order(mine.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng = Rng(seed).split(agent);
    rng.shuffle(order);
    const std::size_t half = (order.size() + 1) / 2;
    out.first_half.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(half));
    out.second_half.assign(order.begin() + static_cast<std::ptrdiff_t>(half), order.end());
    std::sort(out.first_half.begin(), out.first_half.end());
    std::sort(out.second_half.begin(), out.second_half.end());
    out.payment =
        count_determinant(out.task_clusters, my_reports, out.first_half, learned.k, n_options) *
        count_determinant(out.task_clusters, my_reports, out.second_half, learned.k, n_options);
  }

  if (extraction && extraction->k == learned.k) {
    std::map<std::size_t, int> reference;
    for (std::size_t p = 0; p < mine.size(); ++p) reference[p] = extraction->assignment[mine[p]];
    const auto alignment =
        align_labels(Assignment(learned.k, out.task_clusters), reference, learned.k);
    out.permutation_to_extraction = alignment.permutation;
  }
  return out;
}

MechanismOutcome kdmi_payments(const ReportSet& reports, const SolverConfig& config,
                               std::uint64_t seed, const PaymentOptions& options) {
  MechanismOutcome outcome;
  outcome.extracted = extract_knowledge(reports, config);
  outcome.quality = outcome.extracted.score;
  outcome.payments.reserve(reports.agents().size());
  for (std::size_t i = 0; i < reports.agents().size(); ++i) {
    outcome.payments.push_back(kdmi_payment(reports, i, config, seed, options, &outcome.extracted));
  }
  return outcome;
}

DenseMatrix normalize_columns(const DenseMatrix& a) {
  DenseMatrix out = a;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) s += a(r, c);
    if (s == 0.0) throw Error(Errc::DeadOption, "option " + std::to_string(c) + " is never chosen");
    for (std::size_t r = 0; r < a.rows(); ++r) out(r, c) = a(r, c) / s;
  }
  return out;
}

Assignment surprisingly_popular_multitask(const DenseMatrix& answers) {
  return Assignment(answers.cols(), idxmax_labels(normalize_columns(answers)));
}

Assignment plurality(const DenseMatrix& answers) {
  return Assignment(answers.cols(), idxmax_labels(answers));
}

RotatedSp rotated_sp_check(const DenseMatrix& answers, const SolverConfig& config) {
  const DenseMatrix normalized = normalize_columns(answers);
  const std::size_t rank = numerical_rank(normalized, config.kernel);
  if (rank != normalized.cols()) {
    throw Error(Errc::RankDeficient, "ncol(A) has rank " + std::to_string(rank) + " < " +
                                         std::to_string(normalized.cols()));
  }
  const ClusteringResult r = dmi_cluster(normalized, config);
  if (r.k != normalized.cols() || r.partition.empty()) {
    throw Error(Errc::RankDeficient, "clustering did not keep ncol(A) as its reduced matrix");
  }
  RotatedSp out;
  out.rotation = r.partition;
  out.assignment = r.assignment;
  const auto relabeled = idxmax_labels(normalized * r.partition,
                                       std::span<const int>(r.assignment.labels()), 1e-12);
  out.reproduces = relabeled == r.assignment.labels();
  return out;
}

LabelAlignment align_labels(const Assignment& c, const std::map<std::size_t, int>& gold,
                            std::size_t options) {
  if (gold.empty()) throw Error(Errc::EmptyGold, "no labeled tasks");
  if (c.k() > options) throw Error(Errc::InvalidArgument, "more clusters than options");
  if (options > 8) throw Error(Errc::TooLarge, "alignment enumerates at most 8! permutations");
  for (const auto& [task, option] : gold) {
    if (task >= c.n()) throw Error(Errc::InvalidArgument, "gold task " + std::to_string(task) + " out of range");
    if (option < 0 || static_cast<std::size_t>(option) >= options) {
      throw Error(Errc::InvalidArgument, "gold option " + std::to_string(option) + " out of range");
    }
  }
  std::vector<int> perm(options);
  std::iota(perm.begin(), perm.end(), 0);
  LabelAlignment best;
  best.gold_count = gold.size();
  bool first = true;
  do {
    std::size_t agree = 0;
    for (const auto& [task, option] : gold)
      if (perm[static_cast<std::size_t>(c[task])] == option) ++agree;
    if (first || agree > best.agreement) {
      best.agreement = agree;
      best.permutation.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(c.k()));
      first = false;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace dmic
