// Calibration and trajectory fields.
//
// The calibration field removes rotation and intrinsic differences between
// the two cameras so the remaining rig is a pure translation. The trajectory
// field stores, per pixel, the unit tangent of the epipolar curve through
// that pixel, obtained from the optical flow of a vanishingly small
// translation.
#pragma once

#include "fvs/camera.hpp"
#include "fvs/image.hpp"

#include <vector>

namespace fvs {

struct CalibrationField {
  VectorField2 offset;  // px, camera-0 pixel -> camera-1 pixel minus itself
  Mask valid;
};

struct TrajectoryField {
  VectorField2 direction;  // unit vectors inside `valid`
  Mask valid;
};

/// Rotation-only flow between the cameras (translation ignored). Depth
/// independent, so a unit-depth surface is used.
CalibrationField generate_calibration_field(const StereoRig& rig);

/// The translation-only rig seen after warping image 1 by the calibration
/// field: both cameras use camera 0's intrinsics, the rotation is identity
/// and the translation is R^T t.
StereoRig pre_rotated_rig(const StereoRig& rig);

/// Trajectory field of a pure-translation rig.
///
/// Directions are w / |w| where w is the flow of a surface at `depth`
/// under the rig translation rescaled so the largest in-mask |w| equals
/// `epsilon_scale` pixels. Positive motion along a direction corresponds to
/// nearer scene points. Pixels with |w| < 1e-12 px and a one pixel disc
/// around them are invalid. Throws if the rig rotates by more than 1e-9 or
/// has zero translation.
TrajectoryField generate_trajectory_field(const StereoRig& rig, double epsilon_scale = 0.1,
                                          double depth = 1.0);

/// Euler integration of the direction field from `start`. Produces
/// ceil(length / step) segments of length `step` (the last one shorter),
/// stopping early when the next vertex leaves the valid region.
std::vector<Vec2> trace_epipolar_curve(const TrajectoryField& field, const Vec2& start,
                                       double length, double step);

}  // namespace fvs
