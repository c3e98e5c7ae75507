#include <doctest.h>

#include <cmath>
#include <numeric>

#include "dmic/random.hpp"
#include "dmic/simulator.hpp"
#include "oracles.hpp"

using dmic::DenseMatrix;
using dmic::Errc;
using dmic::StrategyMatrix;
using dmic::WorldModel;

namespace {

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const dmic::Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::InvalidArgument;
}

WorldModel three_state_world(std::size_t n, std::size_t m) {
  WorldModel w;
  w.options = 3;
  w.n_tasks = n;
  w.m_agents = m;
  w.states = {{0.7, 0.2, 0.1}, {0.1, 0.7, 0.2}, {0.2, 0.1, 0.7}};
  w.weights = {0.5, 0.3, 0.2};
  return w;
}

// Pearson statistic of observed counts against expected probabilities.
double chi_square(const std::vector<double>& counts, const std::vector<double>& probs) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  double stat = 0.0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const double e = total * probs[c];
    stat += (counts[c] - e) * (counts[c] - e) / e;
  }
  return stat;
}

// 0.999 quantile of chi-square with 2 degrees of freedom.
constexpr double kChi2Df2 = 13.816;

// Answer counts on tasks in a given state, summed over agents.
std::vector<double> state_counts(const dmic::GeneratedReports& g, int state) {
  std::vector<double> counts(g.reports.options(), 0.0);
  for (const auto& a : g.reports.agents())
    for (std::size_t t = 0; t < a.answers.size(); ++t)
      if (g.truth[t] == state && a.answers[t] >= 0) counts[static_cast<std::size_t>(a.answers[t])] += 1.0;
  return counts;
}

}  // namespace

TEST_CASE("strategy matrices must be row-stochastic") {
  CHECK(code_of([] { StrategyMatrix(DenseMatrix{{0.5, 0.6}, {0.0, 1.0}}); }) == Errc::InvalidArgument);
  CHECK(code_of([] { StrategyMatrix(DenseMatrix{{1.5, -0.5}, {0.0, 1.0}}); }) == Errc::InvalidArgument);
  CHECK_THROWS(StrategyMatrix(DenseMatrix(2, 3)));
  const auto mean = dmic::mean_strategy({StrategyMatrix::identity(2), StrategyMatrix(DenseMatrix{{0, 1}, {1, 0}})});
  CHECK(mean.matrix() == DenseMatrix{{0.5, 0.5}, {0.5, 0.5}});
}

TEST_CASE("world validation") {
  auto w = three_state_world(5, 4);
  CHECK(code_of([&] { w.validate(); }) == Errc::InfeasibleAssignment);
  w = three_state_world(10, 4);
  w.task_set_size = 5;
  CHECK(code_of([&] { w.validate(); }) == Errc::InfeasibleAssignment);
  w.task_set_size = 11;
  CHECK(code_of([&] { w.validate(); }) == Errc::InfeasibleAssignment);
  w.task_set_size = 6;
  CHECK_NOTHROW(w.validate());

  auto sparse = three_state_world(40, 3);
  sparse.assignment_prob = 1e-4;
  CHECK(code_of([&] { dmic::generate_reports(sparse, StrategyMatrix::identity(3), 1); }) ==
        Errc::InfeasibleAssignment);
}

TEST_CASE("generation is deterministic in the seed") {
  auto w = three_state_world(30, 20);
  w.assignment_prob = 0.6;
  const auto s = dmic::example2_strategy();
  const auto a = dmic::generate_reports(w, s, 7);
  const auto b = dmic::generate_reports(w, s, 7);
  const auto c = dmic::generate_reports(w, s, 8);
  CHECK(a.truth == b.truth);
  bool differs = false;
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(a.reports.agents()[i].answers == b.reports.agents()[i].answers);
    differs |= a.reports.agents()[i].answers != c.reports.agents()[i].answers;
  }
  CHECK(differs);

  // Agents draw from their own streams: adding agents leaves earlier ones alone.
  auto more = w;
  more.m_agents = 25;
  const auto d = dmic::generate_reports(more, s, 7);
  CHECK(d.truth == a.truth);
  for (std::size_t i = 0; i < 20; ++i) CHECK(d.reports.agents()[i].answers == a.reports.agents()[i].answers);
}

TEST_CASE("assignment modes") {
  SUBCASE("p = 1 assigns every task") {
    const auto g = dmic::generate_reports(three_state_world(12, 5), StrategyMatrix::identity(3), 1);
    for (const auto& a : g.reports.agents()) CHECK(a.performed().size() == 12);
  }
  SUBCASE("fixed-size task sets") {
    auto w = three_state_world(30, 50);
    w.task_set_size = 8;
    const auto g = dmic::generate_reports(w, StrategyMatrix::identity(3), 2);
    for (const auto& a : g.reports.agents()) CHECK(a.performed().size() == 8);
  }
  SUBCASE("Bernoulli sets respect the 2C floor") {
    auto w = three_state_world(30, 200);
    w.assignment_prob = 0.2;
    const auto g = dmic::generate_reports(w, StrategyMatrix::identity(3), 3);
    for (const auto& a : g.reports.agents()) CHECK(a.performed().size() >= 6);
  }
}

TEST_CASE("pure states with honest agents copy the state") {
  WorldModel w;
  w.options = 3;
  w.n_tasks = 9;
  w.m_agents = 4;
  w.states = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  w.weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  const auto g = dmic::generate_reports(w, StrategyMatrix::identity(3), 4);
  for (const auto& a : g.reports.agents())
    for (std::size_t t = 0; t < 9; ++t) CHECK(a.answers[t] == g.truth[t]);
}

TEST_CASE("expected answer matrices") {
  const auto w = three_state_world(10, 2);
  const auto s = dmic::example2_strategy();
  const auto e = dmic::expected_answer_matrix(w, s);
  REQUIRE(e.rows() == 3);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t j = 0; j < 3; ++j) {
      double ref = 0.0;
      for (std::size_t c = 0; c < 3; ++c) ref += w.states[r][c] * s.matrix()(c, j);
      CHECK(e(r, j) == doctest::Approx(ref).epsilon(1e-14));
    }
  CHECK(dmic::expected_answer_matrix(w, StrategyMatrix::identity(3)) ==
        DenseMatrix{{0.7, 0.2, 0.1}, {0.1, 0.7, 0.2}, {0.2, 0.1, 0.7}});
  CHECK(code_of([&] { dmic::expected_answer_matrix(w, StrategyMatrix::identity(2)); }) == Errc::ShapeMismatch);
}

TEST_CASE("empirical answer frequencies match a_s S") {
  auto w = three_state_world(60, 400);
  w.task_set_size = 30;
  const auto s = dmic::example2_strategy();
  const auto g = dmic::generate_reports(w, s, 5);
  const auto e = dmic::expected_answer_matrix(w, s);
  for (int state = 0; state < 3; ++state) {
    const auto counts = state_counts(g, state);
    if (std::accumulate(counts.begin(), counts.end(), 0.0) < 100) continue;
    const std::vector<double> probs(e.row(static_cast<std::size_t>(state)).begin(),
                                    e.row(static_cast<std::size_t>(state)).end());
    CHECK(chi_square(counts, probs) < kChi2Df2);
  }
}

TEST_CASE("a single composed strategy reproduces two strategies applied in sequence") {
  const auto s1 = dmic::example2_strategy();
  const StrategyMatrix s2(DenseMatrix{{0.8, 0.1, 0.1}, {0.0, 0.5, 0.5}, {0.3, 0.3, 0.4}});
  const StrategyMatrix composed(s1.matrix() * s2.matrix());
  auto w = three_state_world(60, 400);
  const auto g = dmic::generate_reports(w, composed, 6);

  // Independent oracle: push a_s through S1 then S2 by hand.
  for (int state = 0; state < 3; ++state) {
    std::vector<double> mid(3, 0.0), out(3, 0.0);
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t j = 0; j < 3; ++j) mid[j] += w.states[static_cast<std::size_t>(state)][c] * s1.matrix()(c, j);
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t j = 0; j < 3; ++j) out[j] += mid[c] * s2.matrix()(c, j);
    const auto counts = state_counts(g, state);
    if (std::accumulate(counts.begin(), counts.end(), 0.0) < 100) continue;
    CHECK(chi_square(counts, out) < kChi2Df2);
  }
}

TEST_CASE("Dirichlet sampler source") {
  WorldModel w;
  w.options = 3;
  w.n_tasks = 50;
  w.m_agents = 3;
  w.dirichlet_alpha = {1.0, 1.0, 1.0};
  const auto g = dmic::generate_reports(w, StrategyMatrix::identity(3), 9);
  CHECK(g.soft_truth);
  for (std::size_t t = 0; t < 50; ++t) {
    const auto row = g.task_distributions.row(t);
    CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0));
    CHECK(g.truth[t] == static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
  }
}

TEST_CASE("single-task worlds") {
  dmic::SingleTaskWorld w;
  w.signal_dists = {{0.6, 0.3, 0.1}, {0.1, 0.3, 0.6}};
  w.weights = {0.7, 0.3};

  // Posterior-predictive against a hand computation for signal 0.
  const double z = 0.7 * 0.6 + 0.3 * 0.1;
  const double p0 = 0.7 * 0.6 / z, p1 = 0.3 * 0.1 / z;
  const auto pred = w.predictive(0);
  CHECK(pred[0] == doctest::Approx(p0 * 0.6 + p1 * 0.1));
  CHECK(pred[2] == doctest::Approx(p0 * 0.1 + p1 * 0.6));

  const auto a = dmic::generate_single_task(w, 50, 3);
  const auto b = dmic::generate_single_task(w, 50, 3);
  CHECK(a.world == b.world);
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(a.dataset.records[i].signal == b.dataset.records[i].signal);
    CHECK(a.dataset.records[i].prediction == w.predictive(static_cast<std::size_t>(a.dataset.records[i].signal)));
  }

  w.prediction_noise = 0.3;
  const auto noisy = dmic::generate_single_task(w, 50, 3);
  CHECK_NOTHROW(noisy.dataset.validate());
  w.prediction_noise = 1.5;
  CHECK(code_of([&] { w.validate(); }) == Errc::InvalidArgument);

  // One agent cannot cover every signal.
  w.prediction_noise = 0.0;
  const auto lone = dmic::generate_single_task(w, 1, 3);
  CHECK(code_of([&] { dmic::estimate_moments(lone.dataset); }) == Errc::MissingOption);
}

TEST_CASE("presets") {
  for (const auto& name : dmic::preset_names()) {
    const auto s = dmic::preset(name);
    CHECK(s.name == name);
    if (s.kind == dmic::Scenario::Kind::multi_task) {
      CHECK_NOTHROW(s.world.validate());
      CHECK(s.strategy.options() == s.world.options);
    } else {
      CHECK_NOTHROW(s.single.validate());
      CHECK(s.single_agents > 0);
    }
  }
  CHECK(code_of([] { dmic::preset("nope"); }) == Errc::InvalidArgument);
}

TEST_CASE("accuracy up to permutation") {
  dmic::Assignment c(3, {1, 1, 0, 2, 2, 0});
  const std::vector<int> truth{0, 0, 1, 2, 2, 2};
  CHECK(dmic::accuracy_up_to_permutation(c, truth, 3) == doctest::Approx(5.0 / 6.0));
}
