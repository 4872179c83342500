#include "fvs/camera.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

namespace fvs {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kAngleSlack = 1e-12;

double poly_radius(const std::array<double, 4>& k, double theta) {
  const double t2 = theta * theta;
  return theta * (k[0] + t2 * (k[1] + t2 * (k[2] + t2 * k[3])));
}

double poly_radius_derivative(const std::array<double, 4>& k, double theta) {
  const double t2 = theta * theta;
  return k[0] + t2 * (3.0 * k[1] + t2 * (5.0 * k[2] + t2 * 7.0 * k[3]));
}

// Damped Newton on r(theta) = target, 1e-10 rad tolerance, at most 50 steps.
std::optional<double> invert_radius(const std::array<double, 4>& k, double target,
                                    double theta_max) {
  double theta = std::min(target / std::max(k[0], 1e-12), theta_max);
  double residual = poly_radius(k, theta) - target;
  for (int it = 0; it < 50; ++it) {
    const double slope = poly_radius_derivative(k, theta);
    if (!(slope > 0.0)) return std::nullopt;
    double step = residual / slope;
    double next = theta - step;
    double next_residual = poly_radius(k, next) - target;
    int halvings = 0;
    while (std::abs(next_residual) > std::abs(residual) && halvings < 30) {
      step *= 0.5;
      next = theta - step;
      next_residual = poly_radius(k, next) - target;
      ++halvings;
    }
    theta = next;
    residual = next_residual;
    if (std::abs(step) < 1e-10) break;
  }
  if (std::abs(residual) > 1e-8) return std::nullopt;
  return theta;
}

}  // namespace

std::string to_string(CameraKind kind) {
  switch (kind) {
    case CameraKind::Pinhole:
      return "pinhole";
    case CameraKind::Unified:
      return "unified";
    case CameraKind::Polynomial:
      return "polynomial";
  }
  return "unknown";
}

CameraKind camera_kind_from_string(const std::string& name) {
  if (name == "pinhole") return CameraKind::Pinhole;
  if (name == "unified") return CameraKind::Unified;
  if (name == "polynomial") return CameraKind::Polynomial;
  throw std::invalid_argument("unknown camera type '" + name + "'");
}

CameraModel CameraModel::pinhole(int width, int height, double f, double cx, double cy,
                                 double max_fov_deg) {
  CameraModel m;
  m.kind = CameraKind::Pinhole;
  m.width = width;
  m.height = height;
  m.fx = m.fy = f;
  m.cx = cx;
  m.cy = cy;
  m.max_fov = max_fov_deg * kDeg;
  return m;
}

CameraModel CameraModel::unified(int width, int height, double f, double cx, double cy, double xi,
                                 double max_fov_deg) {
  CameraModel m = pinhole(width, height, f, cx, cy, max_fov_deg);
  m.kind = CameraKind::Unified;
  m.xi = xi;
  m.validate();
  return m;
}

CameraModel CameraModel::polynomial(int width, int height, double f, double cx, double cy,
                                    const std::array<double, 4>& k, double max_fov_deg) {
  CameraModel m = pinhole(width, height, f, cx, cy, max_fov_deg);
  m.kind = CameraKind::Polynomial;
  m.k = k;
  m.validate();
  return m;
}

CameraModel CameraModel::rescaled(double factor, int new_width, int new_height) const {
  CameraModel m = *this;
  m.width = new_width;
  m.height = new_height;
  m.fx = fx * factor;
  m.fy = fy * factor;
  m.cx = (cx + 0.5) * factor - 0.5;
  m.cy = (cy + 0.5) * factor - 0.5;
  return m;
}

void CameraModel::validate() const {
  if (width <= 0 || height <= 0) throw std::invalid_argument("camera: image size must be positive");
  if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("camera: focal lengths must be > 0");
  if (!(max_fov > 0.0) || max_fov > 2.0 * std::numbers::pi) {
    throw std::invalid_argument("camera: max_fov out of range");
  }
  if (kind == CameraKind::Pinhole && max_fov >= std::numbers::pi) {
    throw std::invalid_argument("camera: pinhole field of view must be below 180 degrees");
  }
  if (kind == CameraKind::Unified && xi < 0.0) throw std::invalid_argument("camera: xi must be >= 0");
  if (kind == CameraKind::Polynomial && !(k[0] > 0.0)) {
    throw std::invalid_argument("camera: polynomial k1 must be > 0");
  }
}

std::optional<Vec2> project(const CameraModel& m, const Vec3& p) {
  const double rho = std::hypot(p.x(), p.y());
  const double norm = p.norm();
  if (!(norm > 0.0)) return std::nullopt;
  const double theta = std::atan2(rho, p.z());
  if (theta > 0.5 * m.max_fov + kAngleSlack) return std::nullopt;

  switch (m.kind) {
    case CameraKind::Pinhole: {
      if (p.z() <= 0.0) return std::nullopt;
      return Vec2(m.fx * p.x() / p.z() + m.cx, m.fy * p.y() / p.z() + m.cy);
    }
    case CameraKind::Unified: {
      const double denom = p.z() + m.xi * norm;
      if (denom <= 0.0) return std::nullopt;
      return Vec2(m.fx * p.x() / denom + m.cx, m.fy * p.y() / denom + m.cy);
    }
    case CameraKind::Polynomial: {
      if (rho == 0.0) return Vec2(m.cx, m.cy);
      const double r = poly_radius(m.k, theta);
      return Vec2(m.fx * r * p.x() / rho + m.cx, m.fy * r * p.y() / rho + m.cy);
    }
  }
  return std::nullopt;
}

std::optional<Vec3> unproject(const CameraModel& m, const Vec2& px) {
  const double mx = (px.x() - m.cx) / m.fx;
  const double my = (px.y() - m.cy) / m.fy;
  const double r2 = mx * mx + my * my;
  const double half_fov = 0.5 * m.max_fov;
  Vec3 ray = Vec3::UnitZ();

  switch (m.kind) {
    case CameraKind::Pinhole:
      ray = Vec3(mx, my, 1.0).normalized();
      break;
    case CameraKind::Unified: {
      const double disc = 1.0 + (1.0 - m.xi * m.xi) * r2;
      if (disc < 0.0) return std::nullopt;
      const double factor = (m.xi + std::sqrt(disc)) / (r2 + 1.0);
      ray = Vec3(factor * mx, factor * my, factor - m.xi).normalized();
      break;
    }
    case CameraKind::Polynomial: {
      const double rd = std::sqrt(r2);
      if (rd == 0.0) {
        ray = Vec3(0.0, 0.0, 1.0);
        break;
      }
      const auto theta = invert_radius(m.k, rd, std::numbers::pi);
      if (!theta) return std::nullopt;
      const double s = std::sin(*theta) / rd;
      ray = Vec3(s * mx, s * my, std::cos(*theta));
      break;
    }
  }
  const double theta = std::atan2(std::hypot(ray.x(), ray.y()), ray.z());
  if (theta > half_fov + kAngleSlack) return std::nullopt;
  return ray;
}

Mask fov_mask(const CameraModel& model) {
  Mask mask(model.width, model.height, 0);
  for (int y = 0; y < model.height; ++y) {
    for (int x = 0; x < model.width; ++x) {
      mask(x, y) = unproject(model, Vec2(x, y)).has_value() ? 1 : 0;
    }
  }
  return mask;
}

RelativePose::RelativePose(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (!(ortho < 1e-9) || std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw std::invalid_argument("pose: rotation is not a proper orthonormal matrix");
  }
}

Mat3 RelativePose::axis_angle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

bool RelativePose::is_pure_translation(double tol) const {
  return (rotation_ - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol;
}

std::optional<double> triangulate_midpoint(const StereoRig& rig, const Vec2& x0, const Vec2& x1) {
  const auto r0 = unproject(rig.cam0, x0);
  const auto r1 = unproject(rig.cam1, x1);
  if (!r0 || !r1) return std::nullopt;
  const Vec3 d0 = *r0;
  const Vec3 d1 = rig.pose.rotation().transpose() * *r1;
  const Vec3 o1 = rig.pose.second_center();

  if (d0.cross(d1).norm() < std::sin(1e-6)) return std::nullopt;
  // Closest points o0 + s d0 and o1 + t d1 with o0 = 0.
  const Vec3 w0 = -o1;
  const double b = d0.dot(d1);
  const double d = d0.dot(w0);
  const double e = d1.dot(w0);
  const double denom = 1.0 - b * b;
  const double s = (b * e - d) / denom;
  const double t = (e - b * d) / denom;
  const Vec3 mid = 0.5 * (s * d0 + o1 + t * d1);
  const double depth = mid.dot(d0);
  if (!(depth > 0.0) || !std::isfinite(depth)) return std::nullopt;
  return depth;
}

}  // namespace fvs
