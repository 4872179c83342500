// Warping loop and coarse-to-fine driver.
//
// Per pyramid level, every warp iteration resamples image 1 at x + w(x),
// differentiates it along the epipolar direction, runs a fixed number of
// primal-dual cycles on the linearised energy, clips the disparity
// increment and advances the warp along the trajectory field:
//
//   u <- u + du,   w <- w + du * dir(x + w)
#pragma once

#include "fvs/camera.hpp"
#include "fvs/fields.hpp"
#include "fvs/image.hpp"
#include "fvs/solver.hpp"

#include <vector>

namespace fvs {

/// Scalar raster paired with the pixels where it is defined.
struct MaskedScalar {
  ScalarField values;
  Mask valid;
};

/// out(x) = I1(x + w(x)) by masked bicubic sampling, for x in `domain`.
MaskedScalar warp_image(const ScalarField& i1, const VectorField2& w, const Mask& i1_mask,
                        const Mask& domain);

/// I_u(x) = I1w(x + dir(x)) - I1w(x), defined where both samples are.
MaskedScalar image_derivative_along(const VectorField2& direction, const MaskedScalar& warped);

struct LevelProblem {
  ScalarField i0;
  ScalarField i1;  // already warped by the calibration field
  Mask i1_valid;
  TrajectoryField trajectory;
  Mask mask;  // solver domain
};

struct WarpState {
  ScalarField u;   // disparity, px of arc length
  VectorField2 w;  // accumulated warp, px
  int omega = 0;

  static WarpState zeros(int width, int height) {
    return {ScalarField(width, height), VectorField2(width, height), 0};
  }
};

struct WarpIteration {
  int level;
  int omega;
  const ScalarField& delta_u;      // applied (clipped) increment
  const VectorField2& direction;   // direction the increment was applied along
  const WarpState& state;          // after the update
  const Mask& mask;
};

/// Hooks for inspection; default implementations do nothing.
class SolverObserver {
 public:
  virtual ~SolverObserver() = default;
  virtual void on_primal_dual(int /*level*/, int /*omega*/, int /*k*/, const SolverState& /*state*/,
                              const Mask& /*mask*/) {}
  virtual void on_warp(const WarpIteration& /*info*/) {}
};

/// Runs params.warp_iters warp iterations on one level.
WarpState solve_level(const LevelProblem& problem, const SolverParams& params, const WarpState& init,
                      int level_index = 0, SolverObserver* observer = nullptr);

struct StereoResult {
  ScalarField disparity;  // px of arc length at the finest level
  VectorField2 warp;      // correspondence into the calibrated image 1
  VectorField2 flow;      // correspondence into the original image 1
  Mask valid;             // solver domain
  Mask flow_valid;
};

/// Pyramid of level problems, coarsest first. Image 1 is warped once by the
/// calibration field; trajectory fields are generated per level from the
/// pre-rotated rig with intrinsics rescaled to the level size.
std::vector<LevelProblem> prepare_levels(const ScalarField& i0, const ScalarField& i1,
                                         const StereoRig& rig, const SolverParams& params);

/// Coarse-to-fine solve over prepared levels. `flow` is set equal to `warp`.
StereoResult solve_levels(const std::vector<LevelProblem>& levels, const SolverParams& params,
                          SolverObserver* observer = nullptr);

/// Sets `flow` / `flow_valid` by chaining the warp through the calibration
/// field of `rig`.
void compose_flow(StereoResult& result, const StereoRig& rig);

StereoResult solve_pyramid(const ScalarField& i0, const ScalarField& i1, const StereoRig& rig,
                           const SolverParams& params, SolverObserver* observer = nullptr);

/// Depth along the camera-0 ray for every pixel with a flow, by midpoint
/// triangulation. Undefined pixels are 0 and cleared in `valid`.
MaskedScalar depth_from_flow(const StereoRig& rig, const VectorField2& flow, const Mask& flow_valid);

}  // namespace fvs
