#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dmic/mechanisms.hpp"
#include "dmic/single_task.hpp"

namespace dmic {

/// Row-stochastic C x C matrix: entry (c, c') is the probability of
/// reporting c' after receiving signal c.
class StrategyMatrix {
 public:
  explicit StrategyMatrix(DenseMatrix entries);
  static StrategyMatrix identity(std::size_t options);

  const DenseMatrix& matrix() const noexcept { return m_; }
  std::size_t options() const noexcept { return m_.rows(); }

 private:
  DenseMatrix m_;
};

/// Entrywise mean of several strategies.
StrategyMatrix mean_strategy(const std::vector<StrategyMatrix>& strategies);

struct WorldModel {
  std::size_t options = 0;
  std::size_t n_tasks = 0;
  std::size_t m_agents = 0;
  /// Finite source: candidate task states (simplex rows) and mixing weights.
  std::vector<std::vector<double>> states;
  std::vector<double> weights;
  /// Optional fixed state index per task, overriding the weighted draw.
  std::vector<std::size_t> task_states;
  /// Sampler source (used when `states` is empty): Dirichlet concentrations.
  std::vector<double> dirichlet_alpha;
  /// Independent Bernoulli(p) task assignment, rejected until |T_i| >= 2C...
  double assignment_prob = 1.0;
  /// ...unless a fixed per-agent task-set size is given.
  std::optional<std::size_t> task_set_size;

  bool finite() const noexcept { return !states.empty(); }
  /// Throws InvalidArgument or InfeasibleAssignment.
  void validate() const;
};

struct GeneratedReports {
  ReportSet reports;
  /// Generating state index (finite source) or argmax of a_t (sampler).
  std::vector<int> truth;
  bool soft_truth = false;
  /// a_t per task (n x C).
  DenseMatrix task_distributions;
};

/// Draws task states, per-agent task sets, signals and reports. Agent i
/// uses its own sub-stream, so results do not depend on generation order.
GeneratedReports generate_reports(const WorldModel& w, const std::vector<StrategyMatrix>& strategies,
                                  std::uint64_t seed);

/// Same strategy for every agent.
GeneratedReports generate_reports(const WorldModel& w, const StrategyMatrix& strategy,
                                  std::uint64_t seed);

/// One row per candidate state: a_s * S. Finite source only.
DenseMatrix expected_answer_matrix(const WorldModel& w, const StrategyMatrix& mean);
/// One row per task: a_t * S.
DenseMatrix expected_answer_matrix(const DenseMatrix& task_distributions, const StrategyMatrix& mean);

/// Worlds for the single-task setting: per-world signal distributions and
/// prior weights. Agents predict with their Bayesian posterior-predictive,
/// optionally mixed with a Dirichlet(1) draw of weight `prediction_noise`.
struct SingleTaskWorld {
  std::vector<std::vector<double>> signal_dists;
  std::vector<double> weights;
  double prediction_noise = 0.0;

  std::size_t options() const noexcept { return signal_dists.empty() ? 0 : signal_dists[0].size(); }
  void validate() const;
  /// Posterior-predictive distribution of a consistent agent with signal c.
  std::vector<double> predictive(std::size_t c) const;
};

struct GeneratedSingleTask {
  SingleTaskDataset dataset;
  std::size_t world = 0;
};

GeneratedSingleTask generate_single_task(const SingleTaskWorld& world, std::size_t m,
                                         std::uint64_t seed);

/// World (0 = plus, 1 = minus) implied by a spectral label in a two-world
/// model; the eigenvector sign is bound through <e*, mu_0 - mu_1>. Empty on
/// a tie or when e* is orthogonal to the world difference.
std::optional<std::size_t> spectral_world(const SpectralResult& r, const SingleTaskWorld& w);
/// World whose signal distribution makes `option` most likely.
std::size_t sp_world(std::size_t option, const SingleTaskWorld& w);

/// Named scenario: either a multi-task world with a shared strategy (and an
/// alternative strategy for invariance checks) or a single-task world.
struct Scenario {
  enum class Kind { multi_task, single_task };
  std::string name;
  Kind kind = Kind::multi_task;
  WorldModel world;
  StrategyMatrix strategy = StrategyMatrix::identity(1);
  std::optional<StrategyMatrix> alternative;
  SingleTaskWorld single;
  std::size_t single_agents = 0;
};

std::vector<std::string> preset_names();
/// Throws InvalidArgument for unknown names.
Scenario preset(std::string_view name);

/// The three-option example strategy; its rows are the example answer rows.
StrategyMatrix example2_strategy();

/// Share of tasks whose cluster matches `truth` after the best relabeling.
double accuracy_up_to_permutation(const Assignment& c, std::span<const int> truth, std::size_t options);

}  // namespace dmic
