// Command-line front end and the dataset layout it reads and writes.
//
// Dataset directory (written by `fvs render`):
//   left.pgm, right.pgm      16-bit images from camera 0 / camera 1
//   gt_depth.pfm             distance along camera-0 rays, m
//   gt_flow.pfm              x1 - x0 in px, third channel = covisible
//   gt_covisible.pfm         1 where the point is seen by both cameras
//   manifest.json            rig, scene and file names
#pragma once

#include "fvs/camera.hpp"
#include "fvs/solver.hpp"
#include "fvs/synth.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace fvs {

nlohmann::json to_json(const SolverParams& params);
/// Overrides fields of `base` present in `j`; unknown keys throw.
SolverParams solver_params_from_json(const nlohmann::json& j, SolverParams base = {});

struct Dataset {
  ScalarField left;
  ScalarField right;
  StereoRig rig;
  GroundTruth truth;
};

void write_dataset(const std::filesystem::path& dir, const Scene& scene, const StereoRig& rig);
Dataset read_dataset(const std::filesystem::path& dir);

/// Entry point of the `fvs` executable. Returns the process exit code.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace fvs
