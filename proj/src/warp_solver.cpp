#include "fvs/stereo.hpp"

#include "fvs/pyramid.hpp"

#include <algorithm>
#include <cmath>

namespace fvs {

MaskedScalar warp_image(const ScalarField& i1, const VectorField2& w, const Mask& i1_mask,
                        const Mask& domain) {
  require_same_shape(i1, w, "warp_image");
  require_same_shape(i1, domain, "warp_image");
  MaskedScalar out{ScalarField(i1.width(), i1.height()), Mask(i1.width(), i1.height(), 0)};
  for (int y = 0; y < i1.height(); ++y) {
    for (int x = 0; x < i1.width(); ++x) {
      if (!domain(x, y)) continue;
      if (const auto s = sample_bicubic(i1, Vec2(x, y) + w(x, y), i1_mask)) {
        out.values(x, y) = *s;
        out.valid(x, y) = 1;
      }
    }
  }
  return out;
}

MaskedScalar image_derivative_along(const VectorField2& direction, const MaskedScalar& warped) {
  require_same_shape(direction, warped.values, "image_derivative_along");
  const int w = direction.width();
  const int h = direction.height();
  MaskedScalar out{ScalarField(w, h), Mask(w, h, 0)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!warped.valid(x, y)) continue;
      const auto ahead = sample_bicubic(warped.values, Vec2(x, y) + direction(x, y), warped.valid);
      if (!ahead) continue;
      out.values(x, y) = *ahead - warped.values(x, y);
      out.valid(x, y) = 1;
    }
  }
  return out;
}

WarpState solve_level(const LevelProblem& pb, const SolverParams& params, const WarpState& init,
                      int level_index, SolverObserver* observer) {
  const int w = pb.i0.width();
  const int h = pb.i0.height();
  const Mask& mask = pb.mask;

  const ScalarField smoothed = gaussian_blur(pb.i0, mask, params.tensor_sigma);
  const SymTensorField tensor = compute_tensor(smoothed, params.beta, params.eta, mask);
  const StepSizes steps = compute_step_sizes(tensor, mask, params.alpha0, params.alpha1);

  WarpState ws = init;
  SolverState st = SolverState::from_disparity(ws.u);
  VectorField2 direction(w, h);
  ScalarField delta(w, h);
  Mask has_direction(w, h, 0);

  for (int omega = 0; omega < params.warp_iters; ++omega) {
    // Epipolar direction at the current correspondence.
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        direction(x, y) = Vec2::Zero();
        has_direction(x, y) = 0;
        if (!mask(x, y)) continue;
        auto d = sample_bicubic(pb.trajectory.direction, Vec2(x, y) + ws.w(x, y), pb.trajectory.valid);
        if ((!d || !(d->norm() > 0.0)) && pb.trajectory.valid(x, y)) d = pb.trajectory.direction(x, y);
        if (d && d->norm() > 0.0) {
          direction(x, y) = d->normalized();
          has_direction(x, y) = 1;
        }
      }
    }

    const MaskedScalar warped = warp_image(pb.i1, ws.w, pb.i1_valid, mask);
    const MaskedScalar i_u = image_derivative_along(direction, warped);
    LinearizedData data{i_u.values, ScalarField(w, h), ws.u, Mask(w, h, 0)};
    for (std::size_t i = 0; i < data.valid.size(); ++i) {
      if (!mask[i] || !i_u.valid[i] || !has_direction[i]) continue;
      data.rho0[i] = warped.values[i] - pb.i0[i];
      data.valid[i] = 1;
    }

    for (int k = 0; k < params.pd_iters; ++k) {
      primal_dual_iterate(st, tensor, data, steps, params, mask);
      if (observer) observer->on_primal_dual(level_index, omega, k, st, mask);
    }

    for (std::size_t i = 0; i < delta.size(); ++i) {
      if (!mask[i]) {
        delta[i] = 0.0;
        continue;
      }
      const double du = std::clamp(st.u[i] - ws.u[i], -params.du_max, params.du_max);
      delta[i] = du;
      ws.u[i] += du;
      ws.w[i] += du * direction[i];
      st.u[i] = ws.u[i];
      st.u_bar[i] = ws.u[i];
    }
    ws.omega += 1;
    if (observer) observer->on_warp({level_index, omega, delta, direction, ws, mask});
  }
  return ws;
}

std::vector<LevelProblem> prepare_levels(const ScalarField& i0, const ScalarField& i1,
                                         const StereoRig& rig, const SolverParams& params) {
  params.validate();
  require_same_shape(i0, i1, "prepare_levels");
  if (i0.width() != rig.cam0.width || i0.height() != rig.cam0.height) {
    throw std::invalid_argument("prepare_levels: image size does not match camera 0");
  }
  const Mask mask0 = fov_mask(rig.cam0);
  const Mask mask1 = fov_mask(rig.cam1);
  const CalibrationField calib = generate_calibration_field(rig);
  const MaskedScalar i1c = warp_image(i1, calib.offset, mask1, calib.valid);

  const Pyramid pyr0 = build_pyramid(i0, mask0, params.levels, params.scale, params.min_width);
  const Pyramid pyr1 = build_pyramid(i1c.values, i1c.valid, params.levels, params.scale,
                                     params.min_width);
  const StereoRig translated = pre_rotated_rig(rig);

  std::vector<LevelProblem> levels;
  for (std::size_t l = 0; l < pyr0.levels.size(); ++l) {
    const auto& L0 = pyr0.levels[l];
    const auto& L1 = pyr1.levels[l];
    const int lw = L0.image.width();
    const int lh = L0.image.height();
    const double factor = static_cast<double>(lw) / i0.width();
    StereoRig level_rig = translated;
    level_rig.cam0 = translated.cam0.rescaled(factor, lw, lh);
    level_rig.cam1 = translated.cam1.rescaled(factor, lw, lh);
    LevelProblem pb;
    pb.i0 = L0.image;
    pb.i1 = L1.image;
    pb.i1_valid = L1.mask;
    pb.mask = L0.mask;
    pb.trajectory = generate_trajectory_field(level_rig, params.epsilon_scale);
    levels.push_back(std::move(pb));
  }
  return levels;
}

StereoResult solve_levels(const std::vector<LevelProblem>& levels, const SolverParams& params,
                          SolverObserver* observer) {
  params.validate();
  if (levels.empty()) throw std::invalid_argument("solve_levels: no levels");
  WarpState ws = WarpState::zeros(levels.front().i0.width(), levels.front().i0.height());
  for (std::size_t l = 0; l < levels.size(); ++l) {
    if (l > 0) {
      const auto& coarse = levels[l - 1];
      const auto& fine = levels[l];
      const double ratio = static_cast<double>(fine.i0.width()) / coarse.i0.width();
      auto up = upsample_state(ws.u, ws.w, coarse.mask, fine.mask, ratio);
      ws = {std::move(up.disparity), std::move(up.warp), 0};
    }
    ws = solve_level(levels[l], params, ws, static_cast<int>(l), observer);
  }
  const auto& finest = levels.back();
  StereoResult res;
  res.disparity = ws.u;
  res.warp = ws.w;
  res.flow = ws.w;
  res.valid = finest.mask;
  res.flow_valid = finest.mask;
  return res;
}

StereoResult solve_pyramid(const ScalarField& i0, const ScalarField& i1, const StereoRig& rig,
                           const SolverParams& params, SolverObserver* observer) {
  const auto levels = prepare_levels(i0, i1, rig, params);
  StereoResult res = solve_levels(levels, params, observer);

  compose_flow(res, rig);
  return res;
}

void compose_flow(StereoResult& res, const StereoRig& rig) {
  // The warp lives in the calibrated image; chain through the calibration
  // field to reach original image-1 pixels.
  const CalibrationField calib = generate_calibration_field(rig);
  require_same_shape(res.warp, calib.offset, "compose_flow");
  const int w = res.warp.width();
  const int h = res.warp.height();
  res.flow = res.warp;
  res.flow_valid = Mask(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!res.valid(x, y)) continue;
      const Vec2 target = Vec2(x, y) + res.warp(x, y);
      if (const auto c = sample_bicubic(calib.offset, target, calib.valid)) {
        res.flow(x, y) = res.warp(x, y) + *c;
        res.flow_valid(x, y) = 1;
      }
    }
  }
}

MaskedScalar depth_from_flow(const StereoRig& rig, const VectorField2& flow, const Mask& flow_valid) {
  MaskedScalar out{ScalarField(flow.width(), flow.height()), Mask(flow.width(), flow.height(), 0)};
  for (int y = 0; y < flow.height(); ++y) {
    for (int x = 0; x < flow.width(); ++x) {
      if (!flow_valid(x, y)) continue;
      const Vec2 x0(x, y);
      if (const auto d = triangulate_midpoint(rig, x0, x0 + flow(x, y))) {
        out.values(x, y) = *d;
        out.valid(x, y) = 1;
      }
    }
  }
  return out;
}

}  // namespace fvs
