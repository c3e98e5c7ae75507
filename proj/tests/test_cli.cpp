#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unistd.h>

#include "dmic/cli.hpp"
#include "dmic/fixtures.hpp"
#include "dmic/io.hpp"
#include "dmic/simulator.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "dmic");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = dmic::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("dmic_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name, const std::string& content = {}) const {
    const auto p = path_ / name;
    if (!content.empty()) std::ofstream(p) << content;
    return p.string();
  }

 private:
  fs::path path_;
};

dmic::GeneratedReports small_reports(std::uint64_t seed) {
  auto w = dmic::preset("legal_pure").world;
  w.m_agents = 60;
  return dmic::generate_reports(w, dmic::StrategyMatrix::identity(3), seed);
}

}  // namespace

TEST_CASE("cli: usage errors exit 2, help exits 0") {
  CHECK(run({}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"cluster"}).code == 2);
  CHECK(run({"aggregate", "x.json", "--init", "nope"}).code == 2);
}

TEST_CASE("cli: fixtures") {
  for (auto name : dmic::fixtures::names()) {
    const auto r = run({"fixtures", std::string(name)});
    CHECK(r.code == 0);
    CHECK_FALSE(r.out.empty());
  }
  const auto affine = run({"fixtures", "affine_7x2"});
  CHECK(dmic::io::parse_csv(affine.out).matrix == dmic::fixtures::affine_7x2());
  const auto bad = run({"fixtures", "missing"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("missing") != std::string::npos);
}

TEST_CASE("cli: cluster") {
  TempDir dir;
  const auto csv = dir.file("m.csv", run({"fixtures", "dmi_20x3"}).out);
  const auto a = run({"cluster", csv, "--seed", "5"});
  const auto b = run({"cluster", csv, "--seed", "5"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto j = json::parse(a.out);
  CHECK(j["n"] == 20);
  CHECK(j["d"] == 3);
  CHECK(j["k"] == 3);
  const auto labels = j["assignment"].get<std::vector<int>>();
  const double ref = oracle::score(labels, dmic::fixtures::dmi_20x3(), 3);
  CHECK(j["score"].get<double>() == doctest::Approx(ref).epsilon(1e-12));

  SUBCASE("svg and --out") {
    const auto csv2 = dir.file("p.csv", run({"fixtures", "kcofactors_30x2"}).out);
    const auto svg = dir.file("p.svg");
    const auto out = dir.file("p.json");
    const auto r = run({"cluster", csv2, "--svg", svg, "--out", out});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    const auto text = dmic::io::read_text(svg);
    CHECK(text.find("<svg") != std::string::npos);
    std::size_t circles = 0;
    for (std::size_t p = text.find("<circle"); p != std::string::npos; p = text.find("<circle", p + 1)) ++circles;
    CHECK(circles >= 30);
    CHECK(json::parse(dmic::io::read_text(out))["n"] == 30);
  }

  SUBCASE("malformed input") {
    const auto bad = dir.file("bad.csv", "x,y\n1,2\n3,oops\n");
    const auto r = run({"cluster", bad});
    CHECK(r.code == 2);
    CHECK(r.err.find("line 3") != std::string::npos);
    const auto ragged = dir.file("ragged.csv", "1,2\n3\n");
    CHECK(run({"cluster", ragged}).code == 2);
    const auto nan = dir.file("nan.csv", "1,2\nnan,4\n");
    CHECK(run({"cluster", nan}).code == 2);
  }
}

TEST_CASE("cli: aggregate") {
  TempDir dir;
  const auto g = small_reports(3);
  const auto reports = dir.file("r.json", dmic::io::reports_to_json(g.reports).dump());
  std::string gold = "task,option\n";
  for (std::size_t t = 0; t < g.truth.size(); ++t) gold += std::to_string(t) + "," + std::to_string(g.truth[t]) + "\n";
  const auto gold_path = dir.file("gold.csv", gold);

  const auto r = run({"aggregate", reports, "--gold", gold_path, "--seed", "2"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["alignment"]["agreement"] == j["alignment"]["gold_count"]);
  CHECK(j["alignment"]["gold_count"] == 60);
  CHECK(j["payments"].size() == 60);
  CHECK(j["extraction"]["k"] == 3);
  CHECK(run({"aggregate", reports, "--gold", gold_path, "--seed", "2"}).out == r.out);
  CHECK(run({"aggregate", reports, "--single-part"}).code == 0);
  CHECK(run({"aggregate", reports, "--init", "sp_seed"}).code == 0);

  SUBCASE("round trip") {
    const auto back = dmic::io::reports_from_json(json::parse(dmic::io::read_text(reports)));
    REQUIRE(back.agents().size() == g.reports.agents().size());
    for (std::size_t i = 0; i < back.agents().size(); ++i) {
      CHECK(back.agents()[i].id == g.reports.agents()[i].id);
      CHECK(back.agents()[i].answers == g.reports.agents()[i].answers);
    }
  }

  SUBCASE("schema and precondition errors exit 2") {
    const auto bad = dir.file("bad.json", R"({"n": 2, "options": 2, "agents": [{"id": "a", "answers": {"1": 5}}]})");
    const auto b = run({"aggregate", bad});
    CHECK(b.code == 2);
    CHECK(b.err.find("/agents/0/answers/1") != std::string::npos);
    CHECK(run({"aggregate", dir.file("junk.json", "{not json")}).code == 2);

    // Two tasks each cannot support a 2C = 4 split.
    json few = {{"n", 4}, {"options", 2}, {"agents", json::array()}};
    for (int i = 0; i < 3; ++i) few["agents"].push_back({{"id", i}, {"answers", {{"0", 0}, {"1", 1}}}});
    few["agents"].push_back({{"id", 9}, {"answers", {{"2", 0}, {"3", 1}}}});
    CHECK(run({"aggregate", dir.file("few.json", few.dump())}).code == 2);
  }
}

TEST_CASE("cli: single") {
  TempDir dir;
  const auto scenario = dmic::preset("two_world_spectral");
  const auto gen = dmic::generate_single_task(scenario.single, 300, 4);
  const auto data = dir.file("d.json", dmic::io::dataset_to_json(gen.dataset).dump());
  const auto r = run({"single", data});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  const auto sp = dmic::surprisingly_popular_single(gen.dataset);
  CHECK(j["sp_answer"] == sp.choice.option);
  CHECK(j["sp_tied"] == false);
  CHECK(j["sts_degenerate"] == false);
  CHECK(j["sts_label"].is_string());

  // Identical predictions for every signal leave no covariance.
  json tie = {{"options", 2}, {"records", json::array()}};
  tie["records"].push_back({{"signal", 0}, {"prediction", {0.7, 0.3}}});
  tie["records"].push_back({{"signal", 1}, {"prediction", {0.7, 0.3}}});
  const auto t = run({"single", dir.file("tie.json", tie.dump())});
  REQUIRE(t.code == 0);
  CHECK(json::parse(t.out)["sts_label"].is_null());
  CHECK(json::parse(t.out)["sts_degenerate"] == true);

  json missing = {{"options", 3}, {"records", json::array()}};
  missing["records"].push_back({{"signal", 0}, {"prediction", {0.5, 0.3, 0.2}}});
  CHECK(run({"single", dir.file("m.json", missing.dump())}).code == 2);
}

TEST_CASE("cli: simulate") {
  TempDir dir;
  const auto e = run({"simulate", "--preset", "example12", "--expected"});
  REQUIRE(e.code == 0);
  CHECK(json::parse(e.out)["metrics"]["expected_invariance"]["identical"] == true);

  const auto s = run({"simulate", "--preset", "legal_pure", "--agents", "80", "--payments", "--seed", "1"});
  REQUIRE(s.code == 0);
  const auto sj = json::parse(s.out);
  CHECK(sj["scenario"] == "legal_pure");
  CHECK(sj["metrics"]["accuracy"].get<double>() == doctest::Approx(1.0));

  const auto reports = dir.file("gen.json");
  CHECK(run({"simulate", "--preset", "affine_fixture", "--agents", "300", "--reports", reports}).code == 0);
  CHECK(dmic::io::reports_from_json(json::parse(dmic::io::read_text(reports))).agents().size() == 300);

  const auto st = run({"simulate", "--preset", "two_world_spectral", "--trials", "20"});
  REQUIRE(st.code == 0);
  CHECK(json::parse(st.out)["metrics"]["trials"] == 20);

  const auto cfg = dir.file("c.json", R"({"preset": "legal_pure", "name": "custom", "m_agents": 50})");
  const auto c = run({"simulate", "--config", cfg});
  REQUIRE(c.code == 0);
  CHECK(json::parse(c.out)["scenario"] == "custom");

  CHECK(run({"simulate"}).code == 2);
  CHECK(run({"simulate", "--preset", "nope"}).code == 2);
  const auto infeasible = dir.file("i.json", R"({"preset": "legal_pure", "n_tasks": 4, "task_set_size": 4})");
  CHECK(run({"simulate", "--config", infeasible}).code == 2);
}
