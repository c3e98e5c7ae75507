#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dmic/clustering.hpp"
#include "dmic/fixtures.hpp"
#include "dmic/mechanisms.hpp"
#include "dmic/simulator.hpp"
#include "dmic/single_task.hpp"

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

dmic::DenseMatrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw dmic::Error(dmic::Errc::ShapeMismatch, "expected a 2-d array");
  const auto r = static_cast<std::size_t>(a.shape(0)), c = static_cast<std::size_t>(a.shape(1));
  return dmic::DenseMatrix(r, c, std::vector<double>(a.data(), a.data() + r * c));
}

Array to_array(const dmic::DenseMatrix& m) {
  Array out({m.rows(), m.cols()});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) v(i, j) = m(i, j);
  return out;
}

dmic::SolverConfig solver_config(const std::string& solver, std::uint64_t seed, std::size_t restarts) {
  dmic::SolverConfig cfg;
  cfg.mode = dmic::parse_solver_mode(solver);
  cfg.seed = seed;
  cfg.restarts = restarts;
  return cfg;
}

py::dict clustering_dict(const dmic::ClusteringResult& r) {
  py::dict d;
  d["k"] = r.k;
  d["labels"] = r.assignment.labels();
  d["picked_columns"] = r.picked_columns;
  d["partition"] = to_array(r.partition);
  d["score"] = r.score;
  d["solver"] = std::string(dmic::to_string(r.solver));
  d["termination"] = std::string(dmic::to_string(r.termination));
  d["iterations"] = r.iterations;
  return d;
}

// Answers as an m x n integer array, -1 where the agent skipped the task.
dmic::ReportSet to_reports(const IntArray& answers, std::size_t options) {
  if (answers.ndim() != 2) throw dmic::Error(dmic::Errc::ShapeMismatch, "answers must be agents x tasks");
  const auto m = static_cast<std::size_t>(answers.shape(0)), n = static_cast<std::size_t>(answers.shape(1));
  std::vector<dmic::AgentReports> agents(m);
  for (std::size_t i = 0; i < m; ++i) {
    agents[i].id = "agent" + std::to_string(i);
    agents[i].answers.assign(answers.data() + i * n, answers.data() + (i + 1) * n);
  }
  return dmic::ReportSet(n, options, std::move(agents));
}

IntArray answers_array(const dmic::ReportSet& r) {
  IntArray out({r.agents().size(), r.n_tasks()});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < r.agents().size(); ++i)
    for (std::size_t t = 0; t < r.n_tasks(); ++t) v(i, t) = r.agents()[i].answers[t];
  return out;
}

dmic::SingleTaskDataset to_dataset(const std::vector<int>& signals, const Array& predictions) {
  const auto p = to_matrix(predictions);
  if (p.rows() != signals.size()) throw dmic::Error(dmic::Errc::ShapeMismatch, "one prediction row per signal");
  dmic::SingleTaskDataset d{p.cols(), {}};
  for (std::size_t i = 0; i < p.rows(); ++i) d.records.push_back({signals[i], {p.row(i).begin(), p.row(i).end()}});
  d.validate();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Determinant-maximization clustering and peer-prediction mechanisms";

  static py::exception<dmic::Error> error(m, "DmicError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const dmic::Error& e) {
      py::object inst = py::handle(error.ptr())(py::str(e.what()));
      inst.attr("code") = std::string(dmic::to_string(e.code()));
      PyErr_SetObject(error.ptr(), inst.ptr());
    }
  });

  m.def(
      "dmi_cluster",
      [](const Array& a, const std::string& solver, std::uint64_t seed, std::size_t restarts) {
        return clustering_dict(dmic::dmi_cluster(to_matrix(a), solver_config(solver, seed, restarts)));
      },
      py::arg("a"), py::arg("solver") = "auto", py::arg("seed") = 0, py::arg("restarts") = 16);

  m.def(
      "dmi_score",
      [](const std::vector<int>& labels, const Array& a) {
        const auto aug = dmic::augment_and_pick(to_matrix(a));
        return dmic::dmi_score(dmic::Assignment(aug.k, labels), aug.reduced);
      },
      py::arg("labels"), py::arg("a"), "|det(C^T A~)| with A~ the picked columns of [A 1].");

  m.def(
      "extract_knowledge",
      [](const IntArray& answers, std::size_t options, std::uint64_t seed) {
        dmic::SolverConfig cfg;
        cfg.seed = seed;
        return clustering_dict(dmic::extract_knowledge(to_reports(answers, options), cfg));
      },
      py::arg("answers"), py::arg("options"), py::arg("seed") = 0);

  m.def(
      "kdmi_payments",
      [](const IntArray& answers, std::size_t options, std::uint64_t seed, bool single_part) {
        dmic::PaymentOptions po;
        po.single_part = single_part;
        const auto out = dmic::kdmi_payments(to_reports(answers, options), {}, seed, po);
        py::list pays;
        for (const auto& p : out.payments) {
          py::dict d;
          d["payment"] = p.payment;
          d["status"] = std::string(dmic::to_string(p.status));
          d["task_clusters"] = p.task_clusters;
          pays.append(d);
        }
        py::dict d;
        d["extraction"] = clustering_dict(out.extracted);
        d["quality"] = out.quality;
        d["payments"] = pays;
        return d;
      },
      py::arg("answers"), py::arg("options"), py::arg("seed") = 0, py::arg("single_part") = false);

  m.def(
      "surprisingly_popular_choice",
      [](const std::vector<double>& shares, const std::vector<double>& prior) {
        const auto c = dmic::surprisingly_popular_choice(shares, prior);
        return py::make_tuple(c.option, c.tied, c.ratios);
      },
      py::arg("shares"), py::arg("prior"), "Returns (option, tied, ratios).");

  m.def(
      "surprisingly_popular_multitask",
      [](const Array& a) { return dmic::surprisingly_popular_multitask(to_matrix(a)).labels(); }, py::arg("a"));

  m.def(
      "spectral_truth_serum",
      [](const std::vector<int>& signals, const Array& predictions, std::uint64_t seed) {
        dmic::SpectralOptions so;
        so.seed = seed;
        const auto r = dmic::spectral_truth_serum(to_dataset(signals, predictions), so);
        py::dict d;
        d["label"] = r.label ? py::object(py::int_(*r.label)) : py::object(py::none());
        d["tie"] = r.tie;
        d["eigenvalue"] = r.eigenvalue;
        d["gap"] = r.gap;
        d["eigenvector"] = r.eigenvector;
        d["projection"] = r.projection;
        d["residual"] = r.residual;
        d["prior"] = r.moments.prior;
        d["answer_shares"] = r.moments.answer_shares;
        return d;
      },
      py::arg("signals"), py::arg("predictions"), py::arg("seed") = 0);

  m.def("fixture", [](const std::string& name) { return to_array(dmic::fixtures::fixture_matrix(name)); },
        py::arg("name"));
  m.def("fixture_names", [] {
    std::vector<std::string> out;
    for (auto n : dmic::fixtures::names()) out.emplace_back(n);
    return out;
  });
  m.def("preset_names", &dmic::preset_names);

  m.def(
      "simulate_reports",
      [](const std::string& preset, std::uint64_t seed, std::size_t agents, bool alternative) {
        auto sc = dmic::preset(preset);
        if (sc.kind != dmic::Scenario::Kind::multi_task) {
          throw dmic::Error(dmic::Errc::InvalidArgument, "preset is not a multi-task scenario");
        }
        if (agents > 0) sc.world.m_agents = agents;
        if (alternative && !sc.alternative) throw dmic::Error(dmic::Errc::InvalidArgument, "preset has no alternative");
        const auto g = dmic::generate_reports(sc.world, alternative ? *sc.alternative : sc.strategy, seed);
        return py::make_tuple(answers_array(g.reports), g.truth);
      },
      py::arg("preset"), py::arg("seed") = 0, py::arg("agents") = 0, py::arg("alternative") = false,
      "Returns (answers, truth); answers is agents x tasks with -1 for skipped tasks.");
}
