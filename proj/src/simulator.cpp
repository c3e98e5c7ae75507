#include "dmic/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dmic/fixtures.hpp"
#include "dmic/random.hpp"

namespace dmic {

namespace {

void check_simplex(std::span<const double> p, double tol, const std::string& what) {
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) throw Error(Errc::InvalidArgument, what + " has a negative entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol) {
    throw Error(Errc::InvalidArgument, what + " sums to " + std::to_string(sum));
  }
}

}  // namespace

StrategyMatrix::StrategyMatrix(DenseMatrix entries) : m_(std::move(entries)) {
  if (!m_.square() || m_.rows() == 0) throw Error(Errc::NonSquare, "strategy must be square");
  for (std::size_t r = 0; r < m_.rows(); ++r)
    check_simplex(m_.row(r), 1e-12, "strategy row " + std::to_string(r));
}

StrategyMatrix StrategyMatrix::identity(std::size_t options) {
  return StrategyMatrix(DenseMatrix::identity(options));
}

StrategyMatrix mean_strategy(const std::vector<StrategyMatrix>& strategies) {
  if (strategies.empty()) throw Error(Errc::InvalidArgument, "no strategies to average");
  DenseMatrix sum(strategies[0].options(), strategies[0].options());
  for (const auto& s : strategies) {
    if (s.options() != sum.rows()) throw Error(Errc::ShapeMismatch, "strategies differ in size");
    sum = sum + s.matrix();
  }
  return StrategyMatrix((1.0 / static_cast<double>(strategies.size())) * sum);
}

StrategyMatrix example2_strategy() { return StrategyMatrix(fixtures::example2_strategy()); }

void WorldModel::validate() const {
  if (options == 0 || n_tasks == 0 || m_agents == 0) {
    throw Error(Errc::InvalidArgument, "options, n_tasks and m_agents must be positive");
  }
  if (finite()) {
    if (weights.size() != states.size()) throw Error(Errc::InvalidArgument, "one weight per state required");
    for (std::size_t s = 0; s < states.size(); ++s) {
      if (states[s].size() != options) throw Error(Errc::ShapeMismatch, "state " + std::to_string(s) + " width");
      check_simplex(states[s], 1e-12, "state " + std::to_string(s));
    }
    if (std::any_of(weights.begin(), weights.end(), [](double w) { return !(w >= 0.0); }) ||
        std::accumulate(weights.begin(), weights.end(), 0.0) <= 0.0) {
      throw Error(Errc::InvalidArgument, "state weights must be nonnegative with a positive sum");
    }
    if (!task_states.empty()) {
      if (task_states.size() != n_tasks) throw Error(Errc::ShapeMismatch, "task_states length");
      for (auto s : task_states)
        if (s >= states.size()) throw Error(Errc::InvalidArgument, "task state index out of range");
    }
  } else {
    if (dirichlet_alpha.size() != options ||
        std::any_of(dirichlet_alpha.begin(), dirichlet_alpha.end(), [](double a) { return !(a > 0.0); })) {
      throw Error(Errc::InvalidArgument, "need positive Dirichlet concentrations, one per option");
    }
  }
  if (n_tasks < 2 * options) {
    throw Error(Errc::InfeasibleAssignment, "fewer than 2C tasks; no agent can reach the size floor");
  }
  if (task_set_size) {
    if (*task_set_size < 2 * options || *task_set_size > n_tasks) {
      throw Error(Errc::InfeasibleAssignment, "task set size must lie in [2C, n]");
    }
  } else if (!(assignment_prob > 0.0 && assignment_prob <= 1.0)) {
    throw Error(Errc::InvalidArgument, "assignment probability must lie in (0, 1]");
  }
}

GeneratedReports generate_reports(const WorldModel& w, const std::vector<StrategyMatrix>& strategies,
                                  std::uint64_t seed) {
  w.validate();
  if (strategies.size() != w.m_agents) {
    throw Error(Errc::ShapeMismatch, "need one strategy per agent");
  }
  for (const auto& s : strategies)
    if (s.options() != w.options) throw Error(Errc::ShapeMismatch, "strategy size differs from options");

  const Rng root(seed);
  Rng task_rng = root.split(0);
  DenseMatrix dist(w.n_tasks, w.options);
  std::vector<int> truth(w.n_tasks);
  for (std::size_t t = 0; t < w.n_tasks; ++t) {
    std::vector<double> a;
    if (w.finite()) {
      const std::size_t s = w.task_states.empty() ? task_rng.categorical(w.weights) : w.task_states[t];
      a = w.states[s];
      truth[t] = static_cast<int>(s);
    } else {
      a = task_rng.dirichlet(w.dirichlet_alpha);
      truth[t] = static_cast<int>(std::max_element(a.begin(), a.end()) - a.begin());
    }
    std::copy(a.begin(), a.end(), dist.row(t).begin());
  }

  const std::size_t floor = 2 * w.options;
  std::vector<AgentReports> agents(w.m_agents);
  for (std::size_t i = 0; i < w.m_agents; ++i) {
    Rng rng = root.split(i + 1);
    std::vector<std::size_t> tasks;
    if (w.task_set_size) {
      std::vector<std::size_t> all(w.n_tasks);
      std::iota(all.begin(), all.end(), 0);
      for (std::size_t j = 0; j < *w.task_set_size; ++j)
        std::swap(all[j], all[j + rng.index(w.n_tasks - j)]);
      tasks.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(*w.task_set_size));
      std::sort(tasks.begin(), tasks.end());
    } else {
      for (int attempt = 0; attempt < 1000 && tasks.size() < floor; ++attempt) {
        tasks.clear();
        for (std::size_t t = 0; t < w.n_tasks; ++t)
          if (rng.uniform() < w.assignment_prob) tasks.push_back(t);
      }
      if (tasks.size() < floor) {
        throw Error(Errc::InfeasibleAssignment, "agent " + std::to_string(i) +
                                                    " never drew 2C tasks in 1000 attempts");
      }
    }
    agents[i].id = "agent" + std::to_string(i);
    agents[i].answers.assign(w.n_tasks, kNotPerformed);
    const DenseMatrix& s = strategies[i].matrix();
    for (std::size_t t : tasks) {
      const std::size_t signal = rng.categorical(dist.row(t));
      agents[i].answers[t] = static_cast<int>(rng.categorical(s.row(signal)));
    }
  }
  return GeneratedReports{ReportSet(w.n_tasks, w.options, std::move(agents)), std::move(truth),
                          !w.finite(), std::move(dist)};
}

GeneratedReports generate_reports(const WorldModel& w, const StrategyMatrix& strategy,
                                  std::uint64_t seed) {
  return generate_reports(w, std::vector<StrategyMatrix>(w.m_agents, strategy), seed);
}

DenseMatrix expected_answer_matrix(const WorldModel& w, const StrategyMatrix& mean) {
  if (!w.finite()) throw Error(Errc::InvalidArgument, "expected matrix needs a finite state source");
  DenseMatrix states(w.states.size(), w.options);
  for (std::size_t s = 0; s < w.states.size(); ++s)
    std::copy(w.states[s].begin(), w.states[s].end(), states.row(s).begin());
  return expected_answer_matrix(states, mean);
}

DenseMatrix expected_answer_matrix(const DenseMatrix& task_distributions, const StrategyMatrix& mean) {
  if (task_distributions.cols() != mean.options()) {
    throw Error(Errc::ShapeMismatch, "distribution width differs from strategy size");
  }
  return task_distributions * mean.matrix();
}

void SingleTaskWorld::validate() const {
  if (signal_dists.empty()) throw Error(Errc::InvalidArgument, "no worlds");
  if (weights.size() != signal_dists.size()) throw Error(Errc::InvalidArgument, "one weight per world required");
  for (std::size_t w = 0; w < signal_dists.size(); ++w) {
    if (signal_dists[w].size() != options()) throw Error(Errc::ShapeMismatch, "world widths differ");
    check_simplex(signal_dists[w], 1e-12, "world " + std::to_string(w));
  }
  check_simplex(weights, 1e-12, "world weights");
  if (!(prediction_noise >= 0.0 && prediction_noise <= 1.0)) {
    throw Error(Errc::InvalidArgument, "prediction noise must lie in [0, 1]");
  }
}

std::vector<double> SingleTaskWorld::predictive(std::size_t c) const {
  std::vector<double> posterior(signal_dists.size());
  for (std::size_t w = 0; w < signal_dists.size(); ++w) posterior[w] = weights[w] * signal_dists[w][c];
  const double z = std::accumulate(posterior.begin(), posterior.end(), 0.0);
  std::vector<double> out(options(), 0.0);
  if (z == 0.0) return out;
  for (std::size_t w = 0; w < signal_dists.size(); ++w)
    for (std::size_t j = 0; j < options(); ++j) out[j] += posterior[w] / z * signal_dists[w][j];
  return out;
}

GeneratedSingleTask generate_single_task(const SingleTaskWorld& world, std::size_t m,
                                         std::uint64_t seed) {
  world.validate();
  const Rng root(seed);
  Rng world_rng = root.split(0);
  GeneratedSingleTask out;
  out.world = world_rng.categorical(world.weights);
  out.dataset.options = world.options();

  std::vector<std::vector<double>> predictive(world.options());
  for (std::size_t c = 0; c < world.options(); ++c) predictive[c] = world.predictive(c);
  const std::vector<double> flat(world.options(), 1.0);

  out.dataset.records.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    Rng rng = root.split(i + 1);
    SingleTaskRecord r;
    const std::size_t c = rng.categorical(world.signal_dists[out.world]);
    r.signal = static_cast<int>(c);
    r.prediction = predictive[c];
    if (world.prediction_noise > 0.0) {
      const auto noise = rng.dirichlet(flat);
      for (std::size_t j = 0; j < r.prediction.size(); ++j) {
        r.prediction[j] = (1.0 - world.prediction_noise) * r.prediction[j] + world.prediction_noise * noise[j];
      }
    }
    out.dataset.records.push_back(std::move(r));
  }
  return out;
}

std::optional<std::size_t> spectral_world(const SpectralResult& r, const SingleTaskWorld& w) {
  if (w.signal_dists.size() != 2) throw Error(Errc::InvalidArgument, "spectral binding needs two worlds");
  if (!r.label || r.eigenvector.size() != w.options()) return std::nullopt;
  double bind = 0.0;
  for (std::size_t c = 0; c < w.options(); ++c) bind += r.eigenvector[c] * (w.signal_dists[0][c] - w.signal_dists[1][c]);
  if (bind == 0.0) return std::nullopt;
  return (*r.label > 0) == (bind > 0.0) ? 0 : 1;
}

std::size_t sp_world(std::size_t option, const SingleTaskWorld& w) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < w.signal_dists.size(); ++k)
    if (w.signal_dists[k][option] > w.signal_dists[best][option]) best = k;
  return best;
}

std::vector<std::string> preset_names() {
  return {"example12", "legal_pure", "affine_fixture", "two_world_spectral"};
}

namespace {

std::vector<std::vector<double>> pure_states(std::size_t options) {
  std::vector<std::vector<double>> s(options, std::vector<double>(options, 0.0));
  for (std::size_t c = 0; c < options; ++c) s[c][c] = 1.0;
  return s;
}

}  // namespace

Scenario preset(std::string_view name) {
  Scenario sc;
  sc.name = std::string(name);
  if (name == "example12") {
    sc.world.options = 3;
    sc.world.n_tasks = 60;
    sc.world.m_agents = 10000;
    sc.world.states = pure_states(3);
    sc.world.weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    sc.world.task_set_size = 20;
    sc.strategy = StrategyMatrix::identity(3);
    sc.alternative = example2_strategy();
  } else if (name == "legal_pure") {
    sc.world.options = 3;
    sc.world.n_tasks = 60;
    sc.world.m_agents = 1000;
    sc.world.states = pure_states(3);
    sc.world.weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    sc.world.task_set_size = 12;
    sc.strategy = StrategyMatrix::identity(3);
  } else if (name == "affine_fixture") {
    // Every task carries one 20x3 reference row; rows renormalized onto the simplex.
    const DenseMatrix a = fixtures::dmi_20x3();
    sc.world.options = 3;
    sc.world.n_tasks = a.rows();
    sc.world.m_agents = 2000;
    for (std::size_t r = 0; r < a.rows(); ++r) {
      std::vector<double> row(a.row(r).begin(), a.row(r).end());
      const double s = std::accumulate(row.begin(), row.end(), 0.0);
      for (double& v : row) v /= s;
      sc.world.states.push_back(std::move(row));
      sc.world.task_states.push_back(r);
    }
    sc.world.weights.assign(a.rows(), 1.0 / static_cast<double>(a.rows()));
    sc.world.task_set_size = 10;
    sc.strategy = StrategyMatrix::identity(3);
    sc.alternative = example2_strategy();
  } else if (name == "two_world_spectral") {
    sc.kind = Scenario::Kind::single_task;
    sc.single.signal_dists = {{0.4, 0.3, 0.2, 0.1}, {0.1, 0.2, 0.3, 0.4}};
    sc.single.weights = {0.5, 0.5};
    sc.single_agents = 500;
  } else {
    throw Error(Errc::InvalidArgument, "unknown preset '" + std::string(name) + "'");
  }
  return sc;
}

double accuracy_up_to_permutation(const Assignment& c, std::span<const int> truth, std::size_t options) {
  if (truth.size() != c.n()) throw Error(Errc::ShapeMismatch, "truth length differs from assignment");
  std::map<std::size_t, int> gold;
  for (std::size_t t = 0; t < truth.size(); ++t) gold[t] = truth[t];
  const auto alignment = align_labels(c, gold, std::max(options, c.k()));
  return static_cast<double>(alignment.agreement) / static_cast<double>(truth.size());
}

}  // namespace dmic
