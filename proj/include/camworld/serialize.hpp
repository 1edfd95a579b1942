#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "camworld/body_model.hpp"
#include "camworld/camera.hpp"
#include "camworld/datagen.hpp"
#include "camworld/fitting.hpp"
#include "camworld/losses.hpp"

namespace camworld {

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::json;

// nlohmann ADL hooks. from_json validates shapes and throws SchemaError with
// the offending field name.
void to_json(Json& j, const BodyParams& p);
void from_json(const Json& j, BodyParams& p);

void to_json(Json& j, const Intrinsics& intr);
void from_json(const Json& j, Intrinsics& intr);

void to_json(Json& j, const Extrinsics& ext);
void from_json(const Json& j, Extrinsics& ext);

void to_json(Json& j, const BBox& b);
void from_json(const Json& j, BBox& b);

void to_json(Json& j, const BBoxEncoding& e);
void from_json(const Json& j, BBoxEncoding& e);

void to_json(Json& j, const LossWeights& w);
void from_json(const Json& j, LossWeights& w);

void to_json(Json& j, const FitConfig& cfg);
void from_json(const Json& j, FitConfig& cfg);  // missing keys keep defaults

void to_json(Json& j, const FitReport& r);  // scalars only, no trace

void to_json(Json& j, const SceneRecord& rec);
void from_json(const Json& j, SceneRecord& rec);

Json points3_to_json(const Points3& p);
Points3 points3_from_json(const Json& j, const char* field);
Json points2_to_json(const Points2& p);
Points2 points2_from_json(const Json& j, const char* field);

// {"schema":1, "params":[...]} on disk; shared by pose files, transform
// inputs/outputs and fit initializers.
std::vector<BodyParams> read_params_file(const std::string& path);
void write_params_file(const std::vector<BodyParams>& params, const std::string& path);

FitConfig read_fit_config(const std::string& path);

/// Parses a JSON file, mapping stream and parse failures onto IoError /
/// SchemaError.
Json load_json_file(const std::string& path);
void save_json_file(const Json& j, const std::string& path);

}  // namespace camworld
