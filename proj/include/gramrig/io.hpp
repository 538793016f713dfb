#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "gramrig/global.hpp"
#include "gramrig/local.hpp"
#include "gramrig/model.hpp"
#include "gramrig/rank.hpp"

// JSON and CSV encodings. Pair indices in files are 1-based.
namespace gramrig::io {

using json = nlohmann::json;

json to_json(const ProblemShape& shape);
json to_json(const OmegaMask& mask);
json to_json(const Configuration& config);
json to_json(const GramKnowledge& knowledge);
json to_json(const RankReport& report);
json to_json(const LocalVerdict& verdict);
json to_json(const GlobalVerdict& verdict);

OmegaMask mask_from_json(const json& j);
Configuration configuration_from_json(const json& j);
GramKnowledge knowledge_from_json(const json& j);
RankReport rank_report_from_json(const json& j);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Plain comma-separated, row-major, no header.
Matrix read_csv_matrix(const std::filesystem::path& path);
std::string format_csv_matrix(const Matrix& m);
void write_csv_matrix(const std::filesystem::path& path, const Matrix& m);

}  // namespace gramrig::io
