#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dmic/clustering.hpp"

namespace dmic {

inline constexpr int kNotPerformed = -1;

/// One agent's answers: answers[t] is the reported option, or kNotPerformed.
struct AgentReports {
  std::string id;
  std::vector<int> answers;

  std::vector<std::size_t> performed() const;
  /// The 0-1 report matrix R_i (n x options); unperformed rows are zero.
  DenseMatrix report_matrix(std::size_t options) const;
};

/// Reports of every agent over n tasks with `options` choices each.
class ReportSet {
 public:
  ReportSet(std::size_t n_tasks, std::size_t options, std::vector<AgentReports> agents);

  std::size_t n_tasks() const noexcept { return n_; }
  std::size_t options() const noexcept { return options_; }
  const std::vector<AgentReports>& agents() const noexcept { return agents_; }

  /// Per-task answer counts, optionally leaving one agent out.
  DenseMatrix answer_counts(std::optional<std::size_t> exclude = std::nullopt) const;

 private:
  std::size_t n_;
  std::size_t options_;
  std::vector<AgentReports> agents_;
};

/// Row-normalized sum of report matrices. Throws Errc::UnansweredTask.
DenseMatrix aggregate_answer_matrix(const ReportSet& reports);

/// dmi_cluster on the aggregate answer matrix, optionally seeded from the
/// surprisingly-popular answer.
ClusteringResult extract_knowledge(const ReportSet& reports, const SolverConfig& config = {},
                                   InitStrategy init = InitStrategy::mean_split);

enum class PaymentStatus { paid, insufficient_training, rank_mismatch, leave_one_out_unanswered };
std::string_view to_string(PaymentStatus s) noexcept;

struct AgentPayment {
  std::string id;
  double payment = 0.0;
  PaymentStatus status = PaymentStatus::paid;
  std::string note;
  /// Labels C*_i assigns to the agent's tasks (in performed() order).
  std::vector<int> task_clusters;
  /// Maps the agent's cluster labels onto the extraction's labels (audit only).
  std::vector<int> permutation_to_extraction;
  std::vector<std::size_t> first_half, second_half;
};

struct PaymentOptions {
  /// Pay det(C*_i^T R_i) over all performed tasks instead of the split product.
  bool single_part = false;
};

struct MechanismOutcome {
  ClusteringResult extracted;
  std::vector<AgentPayment> payments;
  /// max_C |det(C^T A)| of the extraction.
  double quality = 0.0;
};

/// Payment for one agent: learn the partition on tasks the agent skipped
/// (from everyone else's answers), classify the agent's tasks with it, split
/// them into two seeded halves and pay the product of the two determinants.
/// Throws Errc::InsufficientTasks when the agent did fewer than 2 * options
/// tasks.
AgentPayment kdmi_payment(const ReportSet& reports, std::size_t agent, const SolverConfig& config,
                          std::uint64_t seed, const PaymentOptions& options = {},
                          const ClusteringResult* extraction = nullptr);

/// Knowledge extraction plus every agent's payment.
MechanismOutcome kdmi_payments(const ReportSet& reports, const SolverConfig& config,
                               std::uint64_t seed, const PaymentOptions& options = {});

/// Per task argmax_c a_tc / mean_c, i.e. idxmax(ncol(A)). Throws Errc::DeadOption.
Assignment surprisingly_popular_multitask(const DenseMatrix& answers);

/// Per task argmax_c a_tc.
Assignment plurality(const DenseMatrix& answers);

/// Each column divided by its sum.
DenseMatrix normalize_columns(const DenseMatrix& a);

struct RotatedSp {
  /// C x C matrix with idxmax(ncol(A) D) equal to the DMI assignment.
  DenseMatrix rotation;
  Assignment assignment;
  bool reproduces = false;
};

/// The D of the rotated surprisingly-popular form of DMI-clustering.
/// Throws Errc::RankDeficient when ncol(A) has rank below its width.
RotatedSp rotated_sp_check(const DenseMatrix& answers, const SolverConfig& config = {});

struct LabelAlignment {
  /// perm[cluster] = option.
  std::vector<int> permutation;
  std::size_t agreement = 0;
  std::size_t gold_count = 0;
};

/// Cluster-to-option map with the most agreements on `gold` (task -> option);
/// ties go to the lexicographically smallest permutation.
LabelAlignment align_labels(const Assignment& c, const std::map<std::size_t, int>& gold,
                            std::size_t options);

}  // namespace dmic
