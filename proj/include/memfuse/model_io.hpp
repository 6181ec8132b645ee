#pragma once

#include <filesystem>
#include <string_view>

#include <json.hpp>

#include "memfuse/regressors.hpp"

namespace memfuse {

using json = nlohmann::json;

// Every serialized model carries {"kind": ..., "format_version": N}; loading
// rejects unknown kinds and newer versions with InputError.
inline constexpr int kModelFormatVersion = 1;

json scaler_to_json(const Scaler& s);
Scaler scaler_from_json(const json& j);

json svr_to_json(const SvrModel& m);
SvrModel svr_from_json(const json& j);

json forest_to_json(const ForestModel& m);
ForestModel forest_from_json(const json& j);

json ridge_to_json(const RidgeModel& m);
RidgeModel ridge_from_json(const json& j);

json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j);
json matrix_to_json(const Matrix& m);  // array of rows
Matrix matrix_from_json(const json& j, Eigen::Index cols);

void check_header(const json& j, std::string_view kind);

json load_json_file(const std::filesystem::path& path);
void save_json_file(const std::filesystem::path& path, const json& j);

}  // namespace memfuse
