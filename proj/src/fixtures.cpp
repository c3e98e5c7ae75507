#include "dmic/fixtures.hpp"

#include <array>
#include <sstream>

namespace dmic::fixtures {

namespace {

using Rows = std::vector<std::vector<std::string_view>>;

const Rows& affine_rows() {
  static const Rows rows = {
      {"0.96536243", "0.83582504"}, {"0.02223537", "0.97962069"}, {"0.18576474", "0.09306992"},
      {"0.60073919", "0.06909198"}, {"0.21115965", "0.04303247"}, {"0.24518684", "0.46305449"},
      {"0.0045001", "0.73335878"},
  };
  return rows;
}

// T occupies the first two rows; the offset b is the third.
const Rows& transform_rows() {
  static const Rows rows = {
      {"0.7384872", "0.39051911"},
      {"0.75115812", "0.90684574"},
      {".05", ".02"},
  };
  return rows;
}

const Rows& kcofactors_rows() {
  static const Rows rows = {
      {"0.32786192", "0.75198752"}, {"0.24789876", "0.40110656"}, {"0.64860833", "0.05877561"},
      {"0.13688932", "0.89837639"}, {"0.51958647", "0.69553312"}, {"0.57106034", "0.39534018"},
      {"0.25602628", "0.5299542"},  {"0.66521762", "0.25370157"}, {"0.49647253", "0.51707767"},
      {"0.00649304", "0.78141629"}, {"0.93642378", "0.00550147"}, {"0.08014735", "0.94850578"},
      {"0.54978178", "0.66296321"}, {"0.57201864", "0.7952191"},  {"0.11499522", "0.59186407"},
      {"0.11681198", "0.90701099"}, {"0.01623413", "0.59313684"}, {"0.31841007", "0.43924738"},
      {"0.60377183", "0.96489354"}, {"0.48738826", "0.17097179"}, {"0.49460288", "0.81759015"},
      {"0.27831212", "0.76869342"}, {"0.22953897", "0.43809347"}, {"0.03654411", "0.6203217"},
      {"0.90628651", "0.45924219"}, {"0.92525839", "0.69213278"}, {"0.17723574", "0.12487727"},
      {"0.21277346", "0.34931579"}, {"0.84758762", "0.05452689"}, {"0.65204294", "0.82808225"},
  };
  return rows;
}

const Rows& dmi_rows() {
  static const Rows rows = {
      {"0.20727033", "0.56209307", "0.2306366"},  {"0.55235357", "0.26311054", "0.18453589"},
      {"0.06826729", "0.51504916", "0.41668355"}, {"0.40863481", "0.45383908", "0.13752611"},
      {"0.30463115", "0.19875226", "0.49661659"}, {"0.40387463", "0.1261351", "0.46999028"},
      {"0.30097293", "0.32668147", "0.3723456"},  {"0.0530016", "0.41863456", "0.52836383"},
      {"0.53632014", "0.08514494", "0.37853491"}, {"0.34180366", "0.57497414", "0.08322221"},
      {"0.20603456", "0.67360041", "0.12036503"}, {"0.35331477", "0.28461216", "0.36207308"},
      {"0.23868633", "0.38453375", "0.37677992"}, {"0.098419", "0.67327932", "0.22830168"},
      {"0.33219443", "0.0159078", "0.65189777"},  {"0.40376774", "0.39908311", "0.19714915"},
      {"0.08966334", "0.40876422", "0.50157244"}, {"0.51224362", "0.01623191", "0.47152447"},
      {"0.04907822", "0.30059226", "0.65032952"}, {"0.50445751", "0.20957023", "0.28597227"},
  };
  return rows;
}

struct Entry {
  std::string_view name;
  const Rows& (*rows)();
};

const std::array<Entry, 4>& registry() {
  static const std::array<Entry, 4> entries = {{
      {"affine_7x2", &affine_rows},
      {"transform_T_b", &transform_rows},
      {"kcofactors_30x2", &kcofactors_rows},
      {"dmi_20x3", &dmi_rows},
  }};
  return entries;
}

const Rows& lookup(std::string_view name) {
  for (const auto& e : registry())
    if (e.name == name) return e.rows();
  throw Error(Errc::UnknownFixture, "no fixture named '" + std::string(name) + "'");
}

DenseMatrix parse(const Rows& rows) {
  std::vector<std::vector<double>> values;
  for (const auto& r : rows) {
    auto& out = values.emplace_back();
    for (auto cell : r) out.push_back(std::stod(std::string(cell)));
  }
  return DenseMatrix::from_rows(values);
}

}  // namespace

std::vector<std::string_view> names() {
  std::vector<std::string_view> out;
  for (const auto& e : registry()) out.push_back(e.name);
  return out;
}

std::string fixture_csv(std::string_view name) {
  std::ostringstream os;
  for (const auto& row : lookup(name)) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
    os << '\n';
  }
  return os.str();
}

DenseMatrix fixture_matrix(std::string_view name) { return parse(lookup(name)); }

DenseMatrix affine_7x2() { return parse(affine_rows()); }

DenseMatrix transform_T() {
  const auto& rows = transform_rows();
  return parse(Rows(rows.begin(), rows.begin() + 2));
}

std::vector<double> transform_b() {
  const auto offset = parse(Rows(transform_rows().begin() + 2, transform_rows().end()));
  return {offset.row(0).begin(), offset.row(0).end()};
}

DenseMatrix kcofactors_30x2() { return parse(kcofactors_rows()); }

DenseMatrix dmi_20x3() { return parse(dmi_rows()); }

DenseMatrix example2_strategy() {
  return DenseMatrix{{0.56, 0.40, 0.04}, {0.56, 0.34, 0.10}, {0.46, 0.44, 0.10}};
}

}  // namespace dmic::fixtures
