// Camera projection models, rigid poses and stereo rigs.
//
// Frame convention: z forward, x right, y down. Pixel centres at integer
// coordinates. A RelativePose maps camera-0 coordinates into camera-1
// coordinates: X1 = R * X0 + t. Camera 1's centre in the camera-0 frame is
// therefore -R^T t.
#pragma once

#include "fvs/image.hpp"

#include <array>
#include <optional>
#include <stdexcept>
#include <string>

namespace fvs {

enum class CameraKind { Pinhole, Unified, Polynomial };

std::string to_string(CameraKind kind);
CameraKind camera_kind_from_string(const std::string& name);

/// Intrinsics for one of three lens models.
///
///   Pinhole     x = fx * X / Z + cx
///   Unified     x = fx * X / (Z + xi * |X|) + cx           (xi >= 0)
///   Polynomial  r = k1 t + k2 t^3 + k3 t^5 + k4 t^7, t = polar angle,
///               x = fx * r * X / sqrt(X^2 + Y^2) + cx     (k1 = 1, rest 0: equidistant)
///
/// `max_fov` is the full cone angle accepted by project/unproject.
struct CameraModel {
  CameraKind kind = CameraKind::Pinhole;
  int width = 0;
  int height = 0;
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  double xi = 0.0;
  std::array<double, 4> k{1.0, 0.0, 0.0, 0.0};
  double max_fov = 3.14159265358979323846;

  static CameraModel pinhole(int width, int height, double f, double cx, double cy,
                             double max_fov_deg = 179.0);
  static CameraModel unified(int width, int height, double f, double cx, double cy, double xi,
                             double max_fov_deg = 180.0);
  static CameraModel polynomial(int width, int height, double f, double cx, double cy,
                                const std::array<double, 4>& k, double max_fov_deg = 180.0);

  /// Intrinsics of the same lens imaged at `factor` times the resolution
  /// (factor < 1 for coarser pyramid levels), pixel-centre aligned.
  CameraModel rescaled(double factor, int new_width, int new_height) const;

  /// Throws std::invalid_argument if parameters are unusable.
  void validate() const;

  bool operator==(const CameraModel&) const = default;
};

/// Pixel of a 3D point, or nullopt when outside the field of view or
/// otherwise not imageable.
std::optional<Vec2> project(const CameraModel& model, const Vec3& point);

/// Unit ray through a pixel, or nullopt when the pixel is outside the field
/// of view. Polynomial lenses use damped Newton on the radial polynomial.
std::optional<Vec3> unproject(const CameraModel& model, const Vec2& pixel);

/// Pixels whose ray lies inside the camera's field of view.
Mask fov_mask(const CameraModel& model);

class RelativePose {
 public:
  RelativePose() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  /// Throws if `rotation` is not orthonormal with det +1 (tolerance 1e-9).
  RelativePose(const Mat3& rotation, const Vec3& translation);

  static RelativePose identity() { return {}; }
  /// Rotation by `angle` radians about a unit axis (Rodrigues).
  static Mat3 axis_angle(const Vec3& axis, double angle);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 transform(const Vec3& point) const { return rotation_ * point + translation_; }
  /// Camera-1 centre expressed in camera-0 coordinates.
  Vec3 second_center() const { return -rotation_.transpose() * translation_; }
  bool is_pure_translation(double tol = 1e-9) const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

inline Vec3 transform(const RelativePose& pose, const Vec3& point) { return pose.transform(point); }

struct StereoRig {
  CameraModel cam0;
  CameraModel cam1;
  RelativePose pose;
};

/// Depth along the camera-0 ray of the midpoint of the shortest segment
/// between the two back-projected rays. nullopt when either pixel is out of
/// view, the rays are within 1e-6 rad of parallel, or the point lies behind
/// camera 0.
std::optional<double> triangulate_midpoint(const StereoRig& rig, const Vec2& x0, const Vec2& x1);

}  // namespace fvs
