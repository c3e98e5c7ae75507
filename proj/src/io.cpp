#include "dmic/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dmic::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

bool parse_double(std::string_view cell, double& out) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return false;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size() && std::isfinite(out);
}

std::vector<std::string_view> lines_of(std::string_view text) {
  auto lines = split(text, '\n');
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

[[noreturn]] void schema(const std::string& pointer, const std::string& what) {
  throw Error(Errc::SchemaViolation, (pointer.empty() ? std::string("/") : pointer) + ": " + what);
}

const json& member(const json& obj, const std::string& ptr, const char* key) {
  if (!obj.is_object()) schema(ptr, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) schema(ptr + "/" + key, "missing");
  return *it;
}

std::size_t as_count(const json& v, const std::string& ptr) {
  if (!v.is_number_integer() || v.get<long long>() < 0) schema(ptr, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

double as_real(const json& v, const std::string& ptr) {
  if (!v.is_number()) schema(ptr, "expected a number");
  return v.get<double>();
}

std::vector<double> as_reals(const json& v, const std::string& ptr) {
  if (!v.is_array()) schema(ptr, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_real(v[i], ptr + "/" + std::to_string(i)));
  return out;
}

DenseMatrix as_matrix(const json& v, const std::string& ptr) {
  if (!v.is_array() || v.empty()) schema(ptr, "expected a nonempty array of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < v.size(); ++i) {
    rows.push_back(as_reals(v[i], ptr + "/" + std::to_string(i)));
    if (rows.back().size() != rows.front().size()) schema(ptr + "/" + std::to_string(i), "ragged row");
  }
  return DenseMatrix::from_rows(rows);
}

// Library validation failures inside a config become schema errors at `ptr`.
template <class F>
auto at_pointer(const std::string& ptr, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == Errc::SchemaViolation) throw;
    schema(ptr, e.what());
  }
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  const auto lines = lines_of(text);
  std::vector<double> values;
  std::size_t width = 0;
  std::size_t rows = 0;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const auto cells = split(lines[li], ',');
    std::vector<double> row;
    bool numeric = true;
    std::size_t bad = 0;
    for (std::size_t ci = 0; ci < cells.size() && numeric; ++ci) {
      double v = 0.0;
      if (parse_double(cells[ci], v)) {
        row.push_back(v);
      } else {
        numeric = false;
        bad = ci;
      }
    }
    if (!numeric) {
      if (li == 0) {
        for (auto c : cells) table.header.emplace_back(trim(c));
        width = cells.size();
        continue;
      }
      throw Error(Errc::ParseError, "line " + std::to_string(li + 1) + " column " + std::to_string(bad + 1) +
                                        ": not a finite number '" + std::string(trim(cells[bad])) + "'");
    }
    if (width == 0) width = row.size();
    if (row.size() != width) {
      throw Error(Errc::ParseError, "line " + std::to_string(li + 1) + " column " +
                                        std::to_string(std::min(row.size(), width) + 1) + ": expected " +
                                        std::to_string(width) + " fields, found " + std::to_string(row.size()));
    }
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw Error(Errc::ParseError, "line 1 column 1: no data rows");
  table.matrix = DenseMatrix(rows, width, std::move(values));
  return table;
}

std::map<std::size_t, int> parse_gold_csv(std::string_view text) {
  const CsvTable t = parse_csv(text);
  if (t.matrix.cols() != 2) throw Error(Errc::ParseError, "line 1 column 3: gold needs task_index,option_index");
  std::map<std::size_t, int> gold;
  const std::size_t offset = t.header.empty() ? 1 : 2;
  for (std::size_t r = 0; r < t.matrix.rows(); ++r) {
    for (std::size_t c = 0; c < 2; ++c) {
      const double v = t.matrix(r, c);
      if (v < 0.0 || v != std::floor(v)) {
        throw Error(Errc::ParseError, "line " + std::to_string(r + offset) + " column " + std::to_string(c + 1) +
                                          ": expected a nonnegative integer");
      }
    }
    gold[static_cast<std::size_t>(t.matrix(r, 0))] = static_cast<int>(t.matrix(r, 1));
  }
  return gold;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::InvalidArgument, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::InvalidArgument, "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(Errc::InvalidArgument, "write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(Errc::InvalidArgument, "cannot rename onto '" + path.string() + "': " + ec.message());
  }
}

ReportSet reports_from_json(const json& j) {
  const std::size_t n = as_count(member(j, "", "n"), "/n");
  const std::size_t options = as_count(member(j, "", "options"), "/options");
  if (n == 0) schema("/n", "must be positive");
  if (options == 0) schema("/options", "must be positive");
  const json& agents = member(j, "", "agents");
  if (!agents.is_array()) schema("/agents", "expected an array");
  std::vector<AgentReports> out;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string ptr = "/agents/" + std::to_string(i);
    AgentReports a;
    const json& id = member(agents[i], ptr, "id");
    if (id.is_string()) {
      a.id = id.get<std::string>();
    } else if (id.is_number_integer()) {
      a.id = std::to_string(id.get<long long>());
    } else {
      schema(ptr + "/id", "expected a string");
    }
    a.answers.assign(n, kNotPerformed);
    const json& answers = member(agents[i], ptr, "answers");
    if (!answers.is_object()) schema(ptr + "/answers", "expected an object");
    for (const auto& [key, value] : answers.items()) {
      const std::string vptr = ptr + "/answers/" + key;
      std::size_t task = 0;
      const auto [p, ec] = std::from_chars(key.data(), key.data() + key.size(), task);
      if (ec != std::errc() || p != key.data() + key.size()) schema(vptr, "key is not a task index");
      if (task >= n) schema(vptr, "task index out of range");
      const std::size_t option = as_count(value, vptr);
      if (option >= options) schema(vptr, "option index out of range");
      a.answers[task] = static_cast<int>(option);
    }
    out.push_back(std::move(a));
  }
  return ReportSet(n, options, std::move(out));
}

json reports_to_json(const ReportSet& r) {
  json agents = json::array();
  for (const auto& a : r.agents()) {
    json answers = json::object();
    for (std::size_t t = 0; t < a.answers.size(); ++t)
      if (a.answers[t] != kNotPerformed) answers[std::to_string(t)] = a.answers[t];
    agents.push_back({{"id", a.id}, {"answers", std::move(answers)}});
  }
  return {{"n", r.n_tasks()}, {"options", r.options()}, {"agents", std::move(agents)}};
}

SingleTaskDataset dataset_from_json(const json& j) {
  SingleTaskDataset d;
  d.options = as_count(member(j, "", "options"), "/options");
  if (d.options == 0) schema("/options", "must be positive");
  const json& records = member(j, "", "records");
  if (!records.is_array()) schema("/records", "expected an array");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string ptr = "/records/" + std::to_string(i);
    SingleTaskRecord r;
    const std::size_t signal = as_count(member(records[i], ptr, "signal"), ptr + "/signal");
    if (signal >= d.options) schema(ptr + "/signal", "option index out of range");
    r.signal = static_cast<int>(signal);
    r.prediction = as_reals(member(records[i], ptr, "prediction"), ptr + "/prediction");
    if (r.prediction.size() != d.options) schema(ptr + "/prediction", "expected one entry per option");
    double sum = 0.0;
    for (std::size_t c = 0; c < r.prediction.size(); ++c) {
      if (r.prediction[c] < 0.0) schema(ptr + "/prediction/" + std::to_string(c), "negative probability");
      sum += r.prediction[c];
    }
    if (std::abs(sum - 1.0) > 1e-9) schema(ptr + "/prediction", "does not sum to 1");
    d.records.push_back(std::move(r));
  }
  return d;
}

json dataset_to_json(const SingleTaskDataset& d) {
  json records = json::array();
  for (const auto& r : d.records) records.push_back({{"signal", r.signal}, {"prediction", r.prediction}});
  return {{"options", d.options}, {"records", std::move(records)}};
}

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) schema("", "expected an object");
  Scenario sc;
  if (j.contains("preset")) {
    const json& p = j["preset"];
    if (!p.is_string()) schema("/preset", "expected a string");
    sc = at_pointer("/preset", [&] { return preset(p.get<std::string>()); });
  }
  if (j.contains("name")) {
    if (!j["name"].is_string()) schema("/name", "expected a string");
    sc.name = j["name"].get<std::string>();
  } else if (sc.name.empty()) {
    sc.name = "custom";
  }
  std::string kind = sc.kind == Scenario::Kind::single_task ? "single_task" : "multi_task";
  if (j.contains("kind")) {
    if (!j["kind"].is_string()) schema("/kind", "expected a string");
    kind = j["kind"].get<std::string>();
    if (kind != "multi_task" && kind != "single_task") schema("/kind", "expected multi_task or single_task");
  }

  if (kind == "single_task") {
    sc.kind = Scenario::Kind::single_task;
    if (j.contains("worlds")) {
      sc.single.signal_dists.clear();
      const json& w = j["worlds"];
      if (!w.is_array()) schema("/worlds", "expected an array");
      for (std::size_t i = 0; i < w.size(); ++i) sc.single.signal_dists.push_back(as_reals(w[i], "/worlds/" + std::to_string(i)));
    }
    if (j.contains("weights")) sc.single.weights = as_reals(j["weights"], "/weights");
    if (j.contains("prediction_noise")) sc.single.prediction_noise = as_real(j["prediction_noise"], "/prediction_noise");
    if (j.contains("agents")) sc.single_agents = as_count(j["agents"], "/agents");
    if (sc.single.weights.empty() && !sc.single.signal_dists.empty()) {
      sc.single.weights.assign(sc.single.signal_dists.size(), 1.0 / static_cast<double>(sc.single.signal_dists.size()));
    }
    at_pointer("/worlds", [&] { sc.single.validate(); return 0; });
    if (sc.single_agents == 0) schema("/agents", "must be positive");
    return sc;
  }

  sc.kind = Scenario::Kind::multi_task;
  WorldModel& w = sc.world;
  if (j.contains("options")) w.options = as_count(j["options"], "/options");
  if (j.contains("n_tasks")) w.n_tasks = as_count(j["n_tasks"], "/n_tasks");
  if (j.contains("m_agents")) w.m_agents = as_count(j["m_agents"], "/m_agents");
  if (j.contains("states")) {
    w.states.clear();
    const json& s = j["states"];
    if (!s.is_array()) schema("/states", "expected an array");
    for (std::size_t i = 0; i < s.size(); ++i) w.states.push_back(as_reals(s[i], "/states/" + std::to_string(i)));
    if (!j.contains("weights")) w.weights.assign(w.states.size(), 1.0 / static_cast<double>(w.states.size()));
  }
  if (j.contains("weights")) w.weights = as_reals(j["weights"], "/weights");
  if (j.contains("task_states")) {
    w.task_states.clear();
    const json& t = j["task_states"];
    if (!t.is_array()) schema("/task_states", "expected an array");
    for (std::size_t i = 0; i < t.size(); ++i) w.task_states.push_back(as_count(t[i], "/task_states/" + std::to_string(i)));
  }
  if (j.contains("dirichlet_alpha")) w.dirichlet_alpha = as_reals(j["dirichlet_alpha"], "/dirichlet_alpha");
  if (j.contains("assignment_prob")) {
    w.assignment_prob = as_real(j["assignment_prob"], "/assignment_prob");
    w.task_set_size.reset();
  }
  if (j.contains("task_set_size")) w.task_set_size = as_count(j["task_set_size"], "/task_set_size");
  at_pointer("", [&] { w.validate(); return 0; });

  auto strategy_at = [&](const char* key) -> StrategyMatrix {
    const std::string ptr = std::string("/") + key;
    const json& s = j[key];
    if (s.is_string()) {
      const auto name = s.get<std::string>();
      if (name == "honest") return StrategyMatrix::identity(w.options);
      if (name == "example2") return example2_strategy();
      schema(ptr, "unknown strategy name '" + name + "'");
    }
    const DenseMatrix m = as_matrix(s, ptr);
    if (m.rows() != w.options) schema(ptr, "strategy size differs from options");
    return at_pointer(ptr, [&] { return StrategyMatrix(m); });
  };
  if (j.contains("strategy")) {
    sc.strategy = strategy_at("strategy");
  } else if (sc.strategy.options() != w.options) {
    sc.strategy = StrategyMatrix::identity(w.options);
  }
  if (j.contains("alternative")) {
    if (j["alternative"].is_null()) {
      sc.alternative.reset();
    } else {
      sc.alternative = strategy_at("alternative");
    }
  }
  if (sc.strategy.options() != w.options) schema("/strategy", "strategy size differs from options");
  if (sc.alternative && sc.alternative->options() != w.options) schema("/alternative", "strategy size differs from options");
  return sc;
}

json matrix_to_json(const DenseMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  return rows;
}

json clustering_to_json(const ClusteringResult& r) {
  return {{"k", r.k},
          {"L", r.picked_columns},
          {"assignment", r.assignment.labels()},
          {"partition", matrix_to_json(r.partition)},
          {"score", r.score},
          {"solver_tag", std::string(to_string(r.solver))},
          {"termination", std::string(to_string(r.termination))},
          {"iterations", r.iterations},
          {"restarts_run", r.restarts_run}};
}

std::string render_svg(const DenseMatrix& points, const ClusteringResult& r) {
  if (points.cols() != 2) throw Error(Errc::InvalidArgument, "SVG rendering needs 2d points");
  if (points.rows() != r.assignment.n()) throw Error(Errc::ShapeMismatch, "points and assignment differ");
  static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  constexpr double size = 800.0;
  constexpr double pad = 60.0;

  double xmin = points(0, 0), xmax = xmin, ymin = points(0, 1), ymax = ymin;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    xmin = std::min(xmin, points(i, 0));
    xmax = std::max(xmax, points(i, 0));
    ymin = std::min(ymin, points(i, 1));
    ymax = std::max(ymax, points(i, 1));
  }
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
  const double scale = (size - 2 * pad) / span;
  auto sx = [&](double x) { return pad + (x - xmin) * scale; };
  auto sy = [&](double y) { return size - pad - (y - ymin) * scale; };

  const std::size_t k = r.assignment.k();
  std::vector<double> mx(k, 0.0), my(k, 0.0);
  std::vector<std::size_t> count(k, 0);
  double gx = 0.0, gy = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const auto c = static_cast<std::size_t>(r.assignment[i]);
    mx[c] += points(i, 0);
    my[c] += points(i, 1);
    ++count[c];
    gx += points(i, 0);
    gy += points(i, 1);
  }
  gx /= static_cast<double>(points.rows());
  gy /= static_cast<double>(points.rows());

  std::ostringstream svg;
  svg.precision(6);
  svg << std::fixed;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"0 0 800 800\">\n";
  svg << "<rect width=\"800\" height=\"800\" fill=\"white\"/>\n";
  svg << "<clipPath id=\"frame\"><rect x=\"0\" y=\"0\" width=\"800\" height=\"800\"/></clipPath>\n";

  // Rays: each cluster mean through the global mean, extended past it.
  svg << "<g clip-path=\"url(#frame)\" stroke=\"#444\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\">\n";
  for (std::size_t c = 0; c < k && k > 1; ++c) {
    if (count[c] == 0) continue;
    const double cx = mx[c] / static_cast<double>(count[c]);
    const double cy = my[c] / static_cast<double>(count[c]);
    const double dx = gx - cx, dy = gy - cy;
    const double len = std::hypot(dx, dy);
    if (len == 0.0) continue;
    const double reach = 4.0 * span / len;
    svg << "<line x1=\"" << sx(cx) << "\" y1=\"" << sy(cy) << "\" x2=\"" << sx(gx + dx * reach) << "\" y2=\""
        << sy(gy + dy * reach) << "\"/>\n";
  }
  svg << "</g>\n";

  for (std::size_t i = 0; i < points.rows(); ++i) {
    svg << "<circle cx=\"" << sx(points(i, 0)) << "\" cy=\"" << sy(points(i, 1)) << "\" r=\"5\" fill=\""
        << palette[static_cast<std::size_t>(r.assignment[i]) % 10] << "\"/>\n";
  }

  auto star = [&](double x, double y, double radius, const char* fill) {
    svg << "<polygon fill=\"" << fill << "\" stroke=\"black\" stroke-width=\"1\" points=\"";
    for (int p = 0; p < 10; ++p) {
      const double angle = -M_PI / 2 + p * M_PI / 5;
      const double rr = p % 2 == 0 ? radius : radius * 0.45;
      svg << (p ? " " : "") << sx(x) + rr * std::cos(angle) << "," << sy(y) + rr * std::sin(angle);
    }
    svg << "\"/>\n";
  };
  for (std::size_t c = 0; c < k; ++c)
    if (count[c] > 0) {
      star(mx[c] / static_cast<double>(count[c]), my[c] / static_cast<double>(count[c]), 12.0, palette[c % 10]);
    }
  svg << "<circle cx=\"" << sx(gx) << "\" cy=\"" << sy(gy) << "\" r=\"7\" fill=\"black\"/>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace dmic::io
