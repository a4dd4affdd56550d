#pragma once

// Internal JSON helpers shared by the io and config translation units.

#include "gprlpv/plant.hpp"

#include <json.hpp>

#include <string>
#include <utility>

namespace gprlpv::detail {

using nlohmann::json;

constexpr int kFormatVersion = 1;

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

std::pair<long, long> line_column_at(const std::string& text, std::size_t byte);
json parse_json_text(const std::string& text, const std::string& origin);
json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const json& j);

void require_version(const json& j, const std::string& expected_format,
                     const std::string& origin);

json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const json& j, const std::string& context);
json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const json& j, const std::string& context);
json box_to_json(const OperatingBox& box);
OperatingBox box_from_json(const json& j, const std::string& context);

SyntheticLpvPlant plant_from_json(const json& j, const std::string& origin);

}  // namespace gprlpv::detail
