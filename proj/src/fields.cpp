#include "fvs/fields.hpp"

#include <cmath>
#include <stdexcept>

namespace fvs {

CalibrationField generate_calibration_field(const StereoRig& rig) {
  const auto& cam0 = rig.cam0;
  CalibrationField out{VectorField2(cam0.width, cam0.height), Mask(cam0.width, cam0.height, 0)};
  // Identical cameras without rotation: the field is exactly zero, and
  // warping by it must not resample image 1 through unproject/project noise.
  const bool trivial = rig.cam1 == cam0 && rig.pose.rotation() == Mat3::Identity();
  if (trivial) {
    out.valid = fov_mask(cam0);
    return out;
  }
  for (int y = 0; y < cam0.height; ++y) {
    for (int x = 0; x < cam0.width; ++x) {
      const Vec2 x0(x, y);
      const auto ray = unproject(cam0, x0);
      if (!ray) continue;
      const auto x1 = project(rig.cam1, rig.pose.rotation() * *ray);
      if (!x1) continue;
      out.offset(x, y) = *x1 - x0;
      out.valid(x, y) = 1;
    }
  }
  return out;
}

StereoRig pre_rotated_rig(const StereoRig& rig) {
  StereoRig out;
  out.cam0 = rig.cam0;
  out.cam1 = rig.cam0;
  out.pose = RelativePose(Mat3::Identity(), rig.pose.rotation().transpose() * rig.pose.translation());
  return out;
}

TrajectoryField generate_trajectory_field(const StereoRig& rig, double epsilon_scale, double depth) {
  if (!rig.pose.is_pure_translation(1e-9)) {
    throw std::invalid_argument("trajectory field: rig must be pre-rotated (rotation = identity)");
  }
  const double tnorm = rig.pose.translation().norm();
  if (!(tnorm > 0.0)) throw std::invalid_argument("trajectory field: translation must be non-zero");
  if (!(epsilon_scale > 0.0) || !(depth > 0.0)) {
    throw std::invalid_argument("trajectory field: epsilon_scale and depth must be > 0");
  }
  const Vec3 dir_t = rig.pose.translation() / tnorm;
  const auto& cam0 = rig.cam0;
  const int w = cam0.width;
  const int h = cam0.height;

  Field<Vec3> points(w, h, Vec3::Zero());
  VectorField2 base(w, h);
  Mask usable(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto ray = unproject(cam0, Vec2(x, y));
      if (!ray) continue;
      const Vec3 p = *ray * depth;
      const auto b = project(rig.cam1, p);
      if (!b) continue;
      points(x, y) = p;
      base(x, y) = *b;
      usable(x, y) = 1;
    }
  }

  // Flow is linear in the translation for small steps; probe once, then
  // rescale so the largest displacement is epsilon_scale.
  auto flow_at = [&](int x, int y, double s) -> std::optional<Vec2> {
    const auto moved = project(rig.cam1, points(x, y) + s * dir_t);
    if (!moved) return std::nullopt;
    return Vec2(*moved - base(x, y));
  };
  const double probe = 1e-6 * depth;
  double max_flow = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!usable(x, y)) continue;
      if (const auto f = flow_at(x, y, probe)) max_flow = std::max(max_flow, f->norm());
    }
  }
  if (!(max_flow > 0.0)) throw std::invalid_argument("trajectory field: translation induces no flow");
  const double s = probe * epsilon_scale / max_flow;

  TrajectoryField out{VectorField2(w, h), Mask(w, h, 0)};
  Mask degenerate(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!usable(x, y)) continue;
      const auto f = flow_at(x, y, s);
      if (!f || !(f->norm() >= 1e-12)) {
        degenerate(x, y) = 1;
        continue;
      }
      out.direction(x, y) = *f / f->norm();
      out.valid(x, y) = 1;
    }
  }
  // Tangent direction is undefined at the epipole; drop its neighbours too.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!degenerate(x, y)) continue;
      const int nb[5][2] = {{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}};
      for (const auto& d : nb) {
        const int xx = x + d[0];
        const int yy = y + d[1];
        if (out.valid.in_bounds(xx, yy)) {
          out.valid(xx, yy) = 0;
          out.direction(xx, yy) = Vec2::Zero();
        }
      }
    }
  }
  return out;
}

std::vector<Vec2> trace_epipolar_curve(const TrajectoryField& field, const Vec2& start,
                                       double length, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("trace_epipolar_curve: step must be > 0");
  std::vector<Vec2> poly{start};
  auto inside = [&](const Vec2& p) {
    const int x = static_cast<int>(std::lround(p.x()));
    const int y = static_cast<int>(std::lround(p.y()));
    return field.valid.in_bounds(x, y) && field.valid(x, y) != 0;
  };
  if (!inside(start)) return poly;
  const auto segments = static_cast<long>(std::ceil(length / step - 1e-12));
  Vec2 p = start;
  for (long i = 0; i < segments; ++i) {
    const double ds = std::min(step, length - i * step);
    const auto d = sample_bicubic(field.direction, p, field.valid);
    if (!d || !(d->norm() > 0.0)) break;
    const Vec2 next = p + ds * d->normalized();
    if (!inside(next)) break;
    poly.push_back(next);
    p = next;
  }
  return poly;
}

}  // namespace fvs
