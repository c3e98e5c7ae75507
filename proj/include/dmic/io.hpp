#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dmic/mechanisms.hpp"
#include "dmic/simulator.hpp"
#include "dmic/single_task.hpp"

namespace dmic::io {

using json = nlohmann::json;

struct CsvTable {
  DenseMatrix matrix;
  std::vector<std::string> header;  // empty when the first line is numeric
};

/// Comma-separated decimals with an optional header line. Throws ParseError
/// naming the 1-based line and column of the first bad cell.
CsvTable parse_csv(std::string_view text);

/// `task_index,option_index` lines, optional header.
std::map<std::size_t, int> parse_gold_csv(std::string_view text);

std::string read_text(const std::filesystem::path& path);
/// Writes to a sibling temp file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// {n, options, agents: [{id, answers: {task_index: option_index}}]}.
/// Throws SchemaViolation with a JSON pointer to the offending value.
ReportSet reports_from_json(const json& j);
json reports_to_json(const ReportSet& r);

/// {options, records: [{signal, prediction: [...]}]}.
SingleTaskDataset dataset_from_json(const json& j);
json dataset_to_json(const SingleTaskDataset& d);

/// Scenario config mirroring WorldModel plus strategies; see README.
Scenario scenario_from_json(const json& j);

json matrix_to_json(const DenseMatrix& m);
json clustering_to_json(const ClusteringResult& r);

/// 800x800 scatter of 2d points colored by cluster, with cluster-mean
/// stars, the global mean and the partition rays through it.
std::string render_svg(const DenseMatrix& points, const ClusteringResult& r);

}  // namespace dmic::io
