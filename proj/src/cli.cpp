#include "dmic/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "dmic/fixtures.hpp"
#include "dmic/io.hpp"
#include "dmic/random.hpp"

namespace dmic {

namespace {

using io::json;

struct SolverFlags {
  std::uint64_t seed = 0;
  std::string solver = "auto";
  std::size_t restarts = 16;
  double tol = KernelOptions{}.rank_tol_relative;
  std::size_t max_iters = 500;

  void attach(CLI::App* app) {
    app->add_option("--seed", seed, "Seed for restarts and payment splits");
    app->add_option("--solver", solver, "auto, exact, kcofactors or brute")
        ->check(CLI::IsMember({"auto", "exact", "kcofactors", "brute"}));
    app->add_option("--restarts", restarts, "k-cofactors restarts")->check(CLI::PositiveNumber);
    app->add_option("--tol", tol, "Rank tolerance relative to max |entry|")->check(CLI::PositiveNumber);
    app->add_option("--max-iters", max_iters, "k-cofactors iteration cap")->check(CLI::PositiveNumber);
  }

  SolverConfig config() const {
    SolverConfig c;
    c.mode = parse_solver_mode(solver);
    c.restarts = restarts;
    c.seed = seed;
    c.max_iters = max_iters;
    c.kernel.rank_tol_relative = tol;
    return c;
  }
};

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    io::write_atomic(path, text);
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

bool is_usage_error(Errc code) {
  switch (code) {
    case Errc::InvalidArgument:
    case Errc::NonFinite:
    case Errc::ShapeMismatch:
    case Errc::ParseError:
    case Errc::SchemaViolation:
    case Errc::UnknownFixture:
    case Errc::UnansweredTask:
    case Errc::InsufficientTasks:
    case Errc::MissingOption:
    case Errc::InfeasibleAssignment:
      return true;
    default:
      return false;
  }
}

json payment_json(const AgentPayment& p) {
  return {{"id", p.id},
          {"payment", p.payment},
          {"status", std::string(to_string(p.status))},
          {"note", p.note},
          {"task_clusters", p.task_clusters},
          {"permutation_to_extraction", p.permutation_to_extraction}};
}

json payment_summary(const std::vector<AgentPayment>& payments) {
  json by_status = json::object();
  double sum = 0.0;
  std::size_t paid = 0;
  std::optional<double> lo, hi;
  for (const auto& p : payments) {
    auto& slot = by_status[std::string(to_string(p.status))];
    slot = slot.is_null() ? 1 : slot.get<int>() + 1;
    if (p.status != PaymentStatus::paid) continue;
    ++paid;
    sum += p.payment;
    lo = lo ? std::min(*lo, p.payment) : p.payment;
    hi = hi ? std::max(*hi, p.payment) : p.payment;
  }
  json s = {{"agents", payments.size()}, {"by_status", by_status}};
  s["mean"] = paid ? json(sum / static_cast<double>(paid)) : json(nullptr);
  s["min"] = lo ? json(*lo) : json(nullptr);
  s["max"] = hi ? json(*hi) : json(nullptr);
  return s;
}

json spectral_json(const SpectralResult& r) {
  return {{"eigenvalue", r.eigenvalue},
          {"second_eigenvalue", r.second_eigenvalue},
          {"gap", r.gap},
          {"eigenvector", r.eigenvector},
          {"projection", r.projection},
          {"residual", r.residual},
          {"iterations", r.iterations},
          {"asymmetry", r.asymmetry},
          {"asymmetry_flag", r.asymmetry_flag},
          {"tie", r.tie}};
}

json moments_json(const MomentEstimates& m) {
  return {{"answer_shares", m.answer_shares},
          {"prior", m.prior},
          {"conditional", io::matrix_to_json(m.conditional)},
          {"covariance", io::matrix_to_json(m.covariance)},
          {"prior_inconsistency", m.prior_inconsistency},
          {"joint_asymmetry", m.joint_asymmetry}};
}

int cmd_cluster(const std::string& input, const std::string& out_path, const std::string& svg_path,
                const SolverFlags& flags, std::ostream& out) {
  const auto table = io::parse_csv(io::read_text(input));
  const ClusteringResult r = dmi_cluster(table.matrix, flags.config());
  json j = io::clustering_to_json(r);
  j["n"] = table.matrix.rows();
  j["d"] = table.matrix.cols();
  if (!svg_path.empty()) {
    if (table.matrix.cols() != 2) throw Error(Errc::InvalidArgument, "--svg needs 2-column input");
    io::write_atomic(svg_path, io::render_svg(table.matrix, r));
  }
  emit(out_path, dump(j), out);
  return 0;
}

int cmd_aggregate(const std::string& input, const std::string& out_path, const std::string& gold_path,
                  const SolverFlags& flags, bool single_part, const std::string& init, std::ostream& out) {
  json doc;
  try {
    doc = json::parse(io::read_text(input));
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError, e.what());
  }
  const ReportSet reports = io::reports_from_json(doc);
  std::optional<std::map<std::size_t, int>> gold;
  if (!gold_path.empty()) gold = io::parse_gold_csv(io::read_text(gold_path));

  const SolverConfig config = flags.config();
  const DenseMatrix answers = aggregate_answer_matrix(reports);
  MechanismOutcome outcome;
  outcome.extracted =
      extract_knowledge(reports, config, init == "sp_seed" ? InitStrategy::sp_seed : InitStrategy::mean_split);
  outcome.quality = outcome.extracted.score;
  PaymentOptions popts;
  popts.single_part = single_part;
  for (std::size_t i = 0; i < reports.agents().size(); ++i) {
    outcome.payments.push_back(kdmi_payment(reports, i, config, flags.seed, popts, &outcome.extracted));
  }

  json j;
  j["extraction"] = io::clustering_to_json(outcome.extracted);
  j["quality"] = outcome.quality;
  j["payments"] = json::array();
  for (const auto& p : outcome.payments) j["payments"].push_back(payment_json(p));
  j["payment_summary"] = payment_summary(outcome.payments);
  try {
    j["surprisingly_popular"] = surprisingly_popular_multitask(answers).labels();
  } catch (const Error& e) {
    if (e.code() != Errc::DeadOption) throw;
    j["surprisingly_popular"] = nullptr;
    j["surprisingly_popular_error"] = e.what();
  }
  j["plurality"] = plurality(answers).labels();
  if (gold) {
    const auto a = align_labels(outcome.extracted.assignment, *gold, reports.options());
    std::vector<int> aligned;
    for (int c : outcome.extracted.assignment.labels()) aligned.push_back(a.permutation[static_cast<std::size_t>(c)]);
    j["alignment"] = {{"permutation", a.permutation},
                      {"agreement", a.agreement},
                      {"gold_count", a.gold_count},
                      {"answers", aligned}};
  }
  emit(out_path, dump(j), out);
  return 0;
}

int cmd_single(const std::string& input, const std::string& out_path, double smoothing, std::uint64_t seed,
               double tol_gap, std::ostream& out) {
  json doc;
  try {
    doc = json::parse(io::read_text(input));
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError, e.what());
  }
  const SingleTaskDataset d = io::dataset_from_json(doc);
  MomentOptions mopts;
  mopts.smoothing = smoothing;
  const auto sp = surprisingly_popular_single(d, mopts);

  json j;
  j["sp_answer"] = sp.choice.option;
  j["sp_tied"] = sp.choice.tied;
  j["sp_ratios"] = sp.choice.ratios;
  j["moments"] = moments_json(sp.moments);
  SpectralOptions sopts;
  sopts.seed = seed;
  sopts.tol_gap = tol_gap;
  try {
    const auto sts = spectral_truth_serum(d, sopts, mopts);
    j["sts_label"] = sts.label ? json(*sts.label > 0 ? "plus" : "minus") : json(nullptr);
    j["sts_degenerate"] = false;
    j["diagnostics"] = spectral_json(sts);
  } catch (const Error& e) {
    if (e.code() != Errc::DegenerateSpectrum && e.code() != Errc::NonConvergence) throw;
    j["sts_label"] = nullptr;
    j["sts_degenerate"] = true;
    j["diagnostics"] = {{"error", e.what()}};
  }
  emit(out_path, dump(j), out);
  return 0;
}

struct SimulateFlags {
  std::string preset;
  std::string config;
  bool expected = false;
  bool payments = false;
  std::size_t agents = 0;
  std::size_t trials = 1;
  std::string reports_path;
};

json simulate_multi(const Scenario& sc, const SimulateFlags& sf, const SolverFlags& flags) {
  const SolverConfig config = flags.config();
  const WorldModel& w = sc.world;
  json m;
  m["strategy_det"] = determinant(sc.strategy.matrix());

  if (sf.expected) {
    const StrategyMatrix honest = StrategyMatrix::identity(w.options);
    const StrategyMatrix& strategic = sc.alternative ? *sc.alternative : sc.strategy;
    // Expected rows per task; the task states come from the seeded draw.
    Rng rng = Rng(flags.seed).split(0);
    DenseMatrix dist(w.n_tasks, w.options);
    for (std::size_t t = 0; t < w.n_tasks; ++t) {
      const std::size_t s = w.task_states.empty() ? rng.categorical(w.weights) : w.task_states[t];
      std::copy(w.states[s].begin(), w.states[s].end(), dist.row(t).begin());
    }
    const auto a = dmi_cluster(expected_answer_matrix(dist, honest), config);
    const auto b = dmi_cluster(expected_answer_matrix(dist, strategic), config);
    const double det_s = determinant(strategic.matrix());
    m["expected_invariance"] = {{"identical", same_up_to_permutation(a.assignment, b.assignment)},
                                {"quality_honest", a.score},
                                {"quality_strategic", b.score},
                                {"strategy_abs_det", std::abs(det_s)},
                                {"quality_ratio", a.score > 0.0 ? json(b.score / a.score) : json(nullptr)}};
    return m;
  }

  const auto gen = generate_reports(w, sc.strategy, flags.seed);
  const auto extraction = extract_knowledge(gen.reports, config);
  m["k"] = extraction.k;
  m["solver_tag"] = std::string(to_string(extraction.solver));
  m["quality"] = extraction.score;
  m["soft_truth"] = gen.soft_truth;
  const int labels = *std::max_element(gen.truth.begin(), gen.truth.end()) + 1;
  if (static_cast<std::size_t>(labels) <= 8 && extraction.k <= 8) {
    m["accuracy"] = accuracy_up_to_permutation(extraction.assignment, gen.truth,
                                               std::max<std::size_t>(static_cast<std::size_t>(labels), w.options));
  } else {
    m["accuracy"] = nullptr;
  }
  if (sc.alternative) {
    const auto alt = generate_reports(w, *sc.alternative, flags.seed);
    const auto alt_extraction = extract_knowledge(alt.reports, config);
    m["sampled_invariance"] = {{"identical", same_up_to_permutation(extraction.assignment, alt_extraction.assignment)},
                               {"alternative_quality", alt_extraction.score}};
  }
  if (sf.payments) {
    const auto outcome = kdmi_payments(gen.reports, config, flags.seed);
    std::vector<AgentPayment> p = outcome.payments;
    m["payments"] = payment_summary(p);
  }
  if (!sf.reports_path.empty()) {
    io::write_atomic(sf.reports_path, dump(io::reports_to_json(gen.reports)));
  }
  return m;
}

json simulate_single(const Scenario& sc, const SimulateFlags& sf, const SolverFlags& flags) {
  const SingleTaskWorld& w = sc.single;
  const std::size_t m_agents = sc.single_agents;
  std::size_t sts_ok = 0, sp_ok = 0, degenerate = 0, ties = 0;
  double worst_residual = 0.0;
  std::optional<SingleTaskDataset> first;
  for (std::size_t t = 0; t < sf.trials; ++t) {
    const auto gen = generate_single_task(w, m_agents, flags.seed + t);
    if (!first) first = gen.dataset;
    const auto sp = surprisingly_popular_single(gen.dataset);
    if (w.signal_dists.size() == 2 && sp_world(sp.choice.option, w) == gen.world) ++sp_ok;
    try {
      SpectralOptions so;
      so.seed = flags.seed + t;
      const auto sts = spectral_truth_serum(gen.dataset, so);
      if (sts.tie) ++ties;
      worst_residual = std::max(worst_residual, sts.residual / std::max(std::abs(sts.eigenvalue), 1e-300));
      if (w.signal_dists.size() == 2 && spectral_world(sts, w) == gen.world) ++sts_ok;
    } catch (const Error& e) {
      if (e.code() != Errc::DegenerateSpectrum && e.code() != Errc::NonConvergence) throw;
      ++degenerate;
    }
  }
  // Spread of the answer-share vector within one world.
  double within = 0.0;
  for (const auto& mu : w.signal_dists) {
    double v = 0.0;
    for (double p : mu) v += p * (1.0 - p);
    within = std::max(within, std::sqrt(v / static_cast<double>(m_agents)));
  }
  json j;
  j["trials"] = sf.trials;
  j["agents"] = m_agents;
  if (w.signal_dists.size() == 2) {
    double sep = 0.0;
    for (std::size_t c = 0; c < w.options(); ++c) {
      const double d = w.signal_dists[0][c] - w.signal_dists[1][c];
      sep += d * d;
    }
    j["separation_ratio"] = within > 0.0 ? json(std::sqrt(sep) / within) : json(nullptr);
    j["sts_accuracy"] = static_cast<double>(sts_ok) / static_cast<double>(sf.trials);
    j["sp_accuracy"] = static_cast<double>(sp_ok) / static_cast<double>(sf.trials);
  }
  j["degenerate"] = degenerate;
  j["ties"] = ties;
  j["max_relative_residual"] = worst_residual;
  if (!sf.reports_path.empty() && first) io::write_atomic(sf.reports_path, dump(io::dataset_to_json(*first)));
  return j;
}

int cmd_simulate(const SimulateFlags& sf, const SolverFlags& flags, const std::string& out_path, std::ostream& out) {
  if (sf.preset.empty() == sf.config.empty()) {
    throw Error(Errc::InvalidArgument, "give exactly one of --preset and --config");
  }
  Scenario sc;
  if (!sf.preset.empty()) {
    sc = preset(sf.preset);
  } else {
    json doc;
    try {
      doc = json::parse(io::read_text(sf.config));
    } catch (const json::parse_error& e) {
      throw Error(Errc::ParseError, e.what());
    }
    sc = io::scenario_from_json(doc);
  }
  if (sf.agents > 0) {
    sc.world.m_agents = sf.agents;
    sc.single_agents = sf.agents;
  }
  json j;
  j["scenario"] = sc.name;
  j["seed"] = flags.seed;
  j["metrics"] = sc.kind == Scenario::Kind::single_task ? simulate_single(sc, sf, flags) : simulate_multi(sc, sf, flags);
  emit(out_path, dump(j), out);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Determinant-maximization clustering and peer-prediction tools", "dmic"};
  app.require_subcommand(1);

  SolverFlags flags;
  std::string input, out_path, svg_path, gold_path, init = "mean_split", fixture;
  bool single_part = false;
  double smoothing = 0.0, tol_gap = SpectralOptions{}.tol_gap;
  std::uint64_t seed = 0;
  SimulateFlags sf;

  auto* cluster = app.add_subcommand("cluster", "Cluster the rows of a CSV matrix");
  cluster->add_option("input", input, "CSV file")->required();
  cluster->add_option("--out", out_path, "Output JSON path (default stdout)");
  cluster->add_option("--svg", svg_path, "Write an SVG plot (2-column input)");
  flags.attach(cluster);

  auto* aggregate = app.add_subcommand("aggregate", "Knowledge extraction and payments from reports JSON");
  aggregate->add_option("input", input, "Reports JSON file")->required();
  aggregate->add_option("--out", out_path, "Output JSON path (default stdout)");
  aggregate->add_option("--gold", gold_path, "CSV of task_index,option_index labels");
  aggregate->add_flag("--single-part", single_part, "Pay one determinant over all performed tasks");
  aggregate->add_option("--init", init, "mean_split or sp_seed")->check(CLI::IsMember({"mean_split", "sp_seed"}));
  flags.attach(aggregate);

  auto* single = app.add_subcommand("single", "Single-task aggregation from signals and predictions");
  single->add_option("input", input, "Dataset JSON file")->required();
  single->add_option("--out", out_path, "Output JSON path (default stdout)");
  single->add_option("--smoothing", smoothing, "Additive smoothing of the conditionals")->check(CLI::NonNegativeNumber);
  single->add_option("--seed", seed, "Power-iteration start seed");
  single->add_option("--tol", tol_gap, "Relative eigenvalue-gap tolerance")->check(CLI::PositiveNumber);

  auto* simulate = app.add_subcommand("simulate", "Run a preset or configured scenario");
  simulate->add_option("--preset", sf.preset, "example12, legal_pure, affine_fixture or two_world_spectral");
  simulate->add_option("--config", sf.config, "Scenario JSON file");
  simulate->add_flag("--expected", sf.expected, "Use expected answer matrices instead of sampling");
  simulate->add_flag("--payments", sf.payments, "Compute every agent's payment");
  simulate->add_option("--agents", sf.agents, "Override the number of agents");
  simulate->add_option("--trials", sf.trials, "Single-task trials")->check(CLI::PositiveNumber);
  simulate->add_option("--reports", sf.reports_path, "Also write the generated reports JSON");
  simulate->add_option("--out", out_path, "Output JSON path (default stdout)");
  flags.attach(simulate);

  auto* fixtures_cmd = app.add_subcommand("fixtures", "Print a reference matrix as CSV");
  fixtures_cmd->add_option("name", fixture, "affine_7x2, transform_T_b, kcofactors_30x2 or dmi_20x3")->required();
  fixtures_cmd->add_option("--out", out_path, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*cluster) return cmd_cluster(input, out_path, svg_path, flags, out);
    if (*aggregate) return cmd_aggregate(input, out_path, gold_path, flags, single_part, init, out);
    if (*single) return cmd_single(input, out_path, smoothing, seed, tol_gap, out);
    if (*simulate) return cmd_simulate(sf, flags, out_path, out);
    if (*fixtures_cmd) {
      emit(out_path, fixtures::fixture_csv(fixture), out);
      return 0;
    }
  } catch (const Error& e) {
    err << "dmic: " << e.what() << "\n";
    return is_usage_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    err << "dmic: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace dmic
