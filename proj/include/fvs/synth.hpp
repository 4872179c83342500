// Ray-cast synthetic scenes with exact ground truth.
//
// World coordinates coincide with the camera-0 frame. Surfaces carry
// procedural, view-independent albedo so brightness constancy holds
// exactly up to sampling.
#pragma once

#include "fvs/camera.hpp"
#include "fvs/image.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace fvs {

enum class TextureKind { Checker, ValueNoise, Sine };

struct Texture {
  TextureKind kind = TextureKind::ValueNoise;
  double cell = 0.1;  // feature size, m
  std::uint64_t seed = 1;
  int octaves = 4;
  double albedo_lo = 0.1;
  double albedo_hi = 0.9;
  Vec3 grating{1.0, 0.0, 0.0};  // Sine: wave direction

  double albedo(const Vec3& p) const;
};

struct Plane {
  Vec3 point;
  Vec3 normal;
  Texture texture;
};
struct Sphere {
  Vec3 center;
  double radius;
  Texture texture;
};
struct Box {
  Vec3 lo;
  Vec3 hi;
  Texture texture;
};
using Primitive = std::variant<Plane, Sphere, Box>;

struct Scene {
  std::vector<Primitive> primitives;
  /// Sub-pixel rays per axis when rendering (n x n per pixel).
  int samples_per_axis = 4;
  /// Additive Gaussian noise, intensity units; 0 disables.
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 7;
};

/// Fronto-parallel textured plane at 3 m plus a textured sphere in front.
Scene default_scene(std::uint64_t seed = 1);

nlohmann::json to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& j);

struct Hit {
  double distance;
  double albedo;
};
/// Nearest intersection along a unit direction, ignoring hits closer than 1e-9.
std::optional<Hit> cast_ray(const Scene& scene, const Vec3& origin, const Vec3& direction);

/// Intensity image in [0, 1] seen by `model` placed at `pose` (world -> camera).
/// Pixels outside the field of view are 0.
ScalarField render(const Scene& scene, const CameraModel& model, const RelativePose& pose);

struct GroundTruth {
  ScalarField depth0;          // distance along the camera-0 ray, m
  VectorField2 correspondence; // x1 - x0, px
  Mask covisible;
};

GroundTruth make_ground_truth(const Scene& scene, const StereoRig& rig);

}  // namespace fvs
