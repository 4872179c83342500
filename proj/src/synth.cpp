#include "fvs/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace fvs {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double lattice(std::int64_t x, std::int64_t y, std::int64_t z, std::uint64_t seed) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(x));
  h = splitmix64(h ^ static_cast<std::uint64_t>(y));
  h = splitmix64(h ^ static_cast<std::uint64_t>(z));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

double value_noise(const Vec3& p, std::uint64_t seed) {
  const double fx = std::floor(p.x()), fy = std::floor(p.y()), fz = std::floor(p.z());
  const auto ix = static_cast<std::int64_t>(fx);
  const auto iy = static_cast<std::int64_t>(fy);
  const auto iz = static_cast<std::int64_t>(fz);
  const double tx = fade(p.x() - fx), ty = fade(p.y() - fy), tz = fade(p.z() - fz);
  double acc = 0.0;
  for (int dz = 0; dz <= 1; ++dz) {
    for (int dy = 0; dy <= 1; ++dy) {
      for (int dx = 0; dx <= 1; ++dx) {
        const double w = (dx ? tx : 1 - tx) * (dy ? ty : 1 - ty) * (dz ? tz : 1 - tz);
        acc += w * lattice(ix + dx, iy + dy, iz + dz, seed);
      }
    }
  }
  return acc;
}

std::optional<double> hit_plane(const Plane& pl, const Vec3& o, const Vec3& d) {
  const double denom = pl.normal.dot(d);
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const double t = pl.normal.dot(pl.point - o) / denom;
  return t > 1e-9 ? std::optional<double>(t) : std::nullopt;
}

std::optional<double> hit_sphere(const Sphere& s, const Vec3& o, const Vec3& d) {
  const Vec3 oc = o - s.center;
  const double b = oc.dot(d);
  const double c = oc.squaredNorm() - s.radius * s.radius;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  // Numerically stable pair of roots.
  const double q = -b - std::copysign(root, b);
  double t0 = q;
  double t1 = q != 0.0 ? c / q : -b;
  if (t0 > t1) std::swap(t0, t1);
  if (t0 > 1e-9) return t0;
  if (t1 > 1e-9) return t1;
  return std::nullopt;
}

std::optional<double> hit_box(const Box& bx, const Vec3& o, const Vec3& d) {
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-15) {
      if (o[a] < bx.lo[a] || o[a] > bx.hi[a]) return std::nullopt;
      continue;
    }
    double t0 = (bx.lo[a] - o[a]) / d[a];
    double t1 = (bx.hi[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
  }
  if (tmax < tmin) return std::nullopt;
  if (tmin > 1e-9) return tmin;
  if (tmax > 1e-9) return tmax;
  return std::nullopt;
}

const Texture& texture_of(const Primitive& p) {
  return std::visit([](const auto& prim) -> const Texture& { return prim.texture; }, p);
}

std::optional<double> hit_distance(const Primitive& p, const Vec3& o, const Vec3& d) {
  if (const auto* pl = std::get_if<Plane>(&p)) return hit_plane(*pl, o, d);
  if (const auto* sp = std::get_if<Sphere>(&p)) return hit_sphere(*sp, o, d);
  return hit_box(std::get<Box>(p), o, d);
}

nlohmann::json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
Vec3 json_vec(const nlohmann::json& j) {
  const auto a = j.get<std::array<double, 3>>();
  return {a[0], a[1], a[2]};
}

std::string texture_name(TextureKind k) {
  switch (k) {
    case TextureKind::Checker:
      return "checker";
    case TextureKind::ValueNoise:
      return "noise";
    case TextureKind::Sine:
      return "sine";
  }
  return "noise";
}

nlohmann::json texture_json(const Texture& t) {
  return {{"kind", texture_name(t.kind)}, {"cell", t.cell},           {"seed", t.seed},
          {"octaves", t.octaves},          {"albedo_lo", t.albedo_lo}, {"albedo_hi", t.albedo_hi},
          {"grating", vec_json(t.grating)}};
}

Texture texture_from(const nlohmann::json& j) {
  Texture t;
  const auto kind = j.value("kind", std::string("noise"));
  if (kind == "checker") {
    t.kind = TextureKind::Checker;
  } else if (kind == "sine") {
    t.kind = TextureKind::Sine;
  } else if (kind == "noise") {
    t.kind = TextureKind::ValueNoise;
  } else {
    throw std::invalid_argument("unknown texture kind '" + kind + "'");
  }
  t.cell = j.value("cell", t.cell);
  t.seed = j.value("seed", t.seed);
  t.octaves = j.value("octaves", t.octaves);
  t.albedo_lo = j.value("albedo_lo", t.albedo_lo);
  t.albedo_hi = j.value("albedo_hi", t.albedo_hi);
  if (j.contains("grating")) t.grating = json_vec(j.at("grating"));
  if (!(t.cell > 0.0)) throw std::invalid_argument("texture cell must be > 0");
  return t;
}

}  // namespace

double Texture::albedo(const Vec3& p) const {
  double v = 0.0;
  switch (kind) {
    case TextureKind::Checker: {
      const auto s = static_cast<std::int64_t>(std::floor(p.x() / cell) + std::floor(p.y() / cell) +
                                               std::floor(p.z() / cell));
      v = (s & 1) ? 1.0 : 0.0;
      break;
    }
    case TextureKind::Sine:
      v = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * p.dot(grating.normalized()) / cell);
      break;
    case TextureKind::ValueNoise: {
      double amp = 1.0, total = 0.0, freq = 1.0 / cell;
      for (int o = 0; o < std::max(1, octaves); ++o) {
        v += amp * value_noise(p * freq, seed + 1000003ULL * static_cast<std::uint64_t>(o));
        total += amp;
        amp *= 0.5;
        freq *= 2.0;
      }
      v /= total;
      // Spread the mid-heavy octave sum back over [0, 1].
      v = std::clamp(0.5 + 1.8 * (v - 0.5), 0.0, 1.0);
      break;
    }
  }
  return albedo_lo + (albedo_hi - albedo_lo) * v;
}

Scene default_scene(std::uint64_t seed) {
  Scene s;
  Texture wall;
  wall.kind = TextureKind::ValueNoise;
  wall.cell = 0.5;
  wall.seed = seed;
  wall.octaves = 3;
  Texture ball = wall;
  ball.cell = 0.15;
  ball.seed = seed + 17;
  ball.albedo_lo = 0.15;
  ball.albedo_hi = 0.95;
  s.primitives.push_back(Plane{Vec3(0.0, 0.0, 3.0), Vec3(0.0, 0.0, -1.0), wall});
  s.primitives.push_back(Sphere{Vec3(-0.2, 0.1, 1.5), 0.45, ball});
  return s;
}

nlohmann::json to_json(const Scene& scene) {
  nlohmann::json prims = nlohmann::json::array();
  for (const auto& p : scene.primitives) {
    if (const auto* pl = std::get_if<Plane>(&p)) {
      prims.push_back({{"type", "plane"},
                       {"point", vec_json(pl->point)},
                       {"normal", vec_json(pl->normal)},
                       {"texture", texture_json(pl->texture)}});
    } else if (const auto* sp = std::get_if<Sphere>(&p)) {
      prims.push_back({{"type", "sphere"},
                       {"center", vec_json(sp->center)},
                       {"radius", sp->radius},
                       {"texture", texture_json(sp->texture)}});
    } else {
      const auto& bx = std::get<Box>(p);
      prims.push_back({{"type", "box"},
                       {"lo", vec_json(bx.lo)},
                       {"hi", vec_json(bx.hi)},
                       {"texture", texture_json(bx.texture)}});
    }
  }
  return {{"primitives", prims},
          {"samples_per_axis", scene.samples_per_axis},
          {"noise_sigma", scene.noise_sigma},
          {"noise_seed", scene.noise_seed}};
}

Scene scene_from_json(const nlohmann::json& j) {
  Scene s;
  for (const auto& p : j.at("primitives")) {
    const auto type = p.at("type").get<std::string>();
    const Texture tex = p.contains("texture") ? texture_from(p.at("texture")) : Texture{};
    if (type == "plane") {
      const Vec3 n = json_vec(p.at("normal"));
      if (!(n.norm() > 0.0)) throw std::invalid_argument("plane normal must be non-zero");
      s.primitives.push_back(Plane{json_vec(p.at("point")), n.normalized(), tex});
    } else if (type == "sphere") {
      const double r = p.at("radius").get<double>();
      if (!(r > 0.0)) throw std::invalid_argument("sphere radius must be > 0");
      s.primitives.push_back(Sphere{json_vec(p.at("center")), r, tex});
    } else if (type == "box") {
      s.primitives.push_back(Box{json_vec(p.at("lo")), json_vec(p.at("hi")), tex});
    } else {
      throw std::invalid_argument("unknown primitive type '" + type + "'");
    }
  }
  s.samples_per_axis = j.value("samples_per_axis", s.samples_per_axis);
  s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
  s.noise_seed = j.value("noise_seed", s.noise_seed);
  if (s.samples_per_axis < 1) throw std::invalid_argument("samples_per_axis must be >= 1");
  return s;
}

std::optional<Hit> cast_ray(const Scene& scene, const Vec3& origin, const Vec3& direction) {
  std::optional<Hit> best;
  const Primitive* best_prim = nullptr;
  for (const auto& p : scene.primitives) {
    const auto t = hit_distance(p, origin, direction);
    if (t && (!best || *t < best->distance)) {
      best = Hit{*t, 0.0};
      best_prim = &p;
    }
  }
  if (best) best->albedo = texture_of(*best_prim).albedo(origin + best->distance * direction);
  return best;
}

ScalarField render(const Scene& scene, const CameraModel& model, const RelativePose& pose) {
  const Mat3 rt = pose.rotation().transpose();
  const Vec3 center = pose.second_center();
  const int n = std::max(1, scene.samples_per_axis);
  ScalarField img(model.width, model.height);
  for (int y = 0; y < model.height; ++y) {
    for (int x = 0; x < model.width; ++x) {
      double sum = 0.0;
      int count = 0;
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          const Vec2 px(x + (i + 0.5) / n - 0.5, y + (j + 0.5) / n - 0.5);
          const auto ray = unproject(model, px);
          if (!ray) continue;
          if (const auto hit = cast_ray(scene, center, rt * *ray)) {
            sum += hit->albedo;
            ++count;
          }
        }
      }
      // Pixels whose centre is outside the FOV stay black.
      if (count > 0 && unproject(model, Vec2(x, y))) img(x, y) = sum / count;
    }
  }
  if (scene.noise_sigma > 0.0) {
    std::mt19937_64 rng(scene.noise_seed);
    std::normal_distribution<double> noise(0.0, scene.noise_sigma);
    for (std::size_t i = 0; i < img.size(); ++i) img[i] = std::clamp(img[i] + noise(rng), 0.0, 1.0);
  }
  return img;
}

GroundTruth make_ground_truth(const Scene& scene, const StereoRig& rig) {
  const auto& cam0 = rig.cam0;
  GroundTruth gt{ScalarField(cam0.width, cam0.height), VectorField2(cam0.width, cam0.height),
                 Mask(cam0.width, cam0.height, 0)};
  const Vec3 c1 = rig.pose.second_center();
  for (int y = 0; y < cam0.height; ++y) {
    for (int x = 0; x < cam0.width; ++x) {
      const Vec2 x0(x, y);
      const auto ray = unproject(cam0, x0);
      if (!ray) continue;
      const auto hit = cast_ray(scene, Vec3::Zero(), *ray);
      if (!hit) continue;
      const Vec3 X = hit->distance * *ray;
      gt.depth0(x, y) = hit->distance;
      const auto x1 = project(rig.cam1, rig.pose.transform(X));
      if (!x1) continue;
      gt.correspondence(x, y) = *x1 - x0;
      const bool in_image = x1->x() >= -0.5 && x1->y() >= -0.5 && x1->x() < rig.cam1.width - 0.5 &&
                            x1->y() < rig.cam1.height - 0.5;
      if (!in_image) continue;
      const Vec3 to_point = X - c1;
      const double dist = to_point.norm();
      const auto seen = cast_ray(scene, c1, to_point / dist);
      if (seen && std::abs(seen->distance - dist) <= 1e-6 * std::max(1.0, dist)) gt.covisible(x, y) = 1;
    }
  }
  return gt;
}

}  // namespace fvs
