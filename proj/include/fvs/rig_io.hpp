// JSON persistence for cameras and stereo rigs. Field names are listed in
// schema/rig.schema.json.
#pragma once

#include "fvs/camera.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace fvs {

nlohmann::json to_json(const CameraModel& model);
CameraModel camera_from_json(const nlohmann::json& j);

nlohmann::json to_json(const StereoRig& rig);
/// Accepts either a rig object or a dataset manifest carrying one under "rig".
StereoRig rig_from_json(const nlohmann::json& j);

StereoRig load_rig(const std::filesystem::path& path);
void save_rig(const std::filesystem::path& path, const StereoRig& rig);

/// Reference rig used by tests and the default dataset: unified model,
/// xi = 0.9, f = 200 px, 400 x 400, 180 degree mask, camera 1 placed 0.1 m
/// to the right of camera 0 with no rotation.
StereoRig default_fisheye_rig();

}  // namespace fvs
