#include "fvs/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace fvs {
namespace {

CameraModel small_fisheye() { return CameraModel::unified(64, 64, 32.0, 31.5, 31.5, 0.9); }

Scene checker_wall(double z) {
  Texture t;
  t.kind = TextureKind::Checker;
  t.cell = 0.25;
  Scene s;
  s.primitives.push_back(Plane{Vec3(0, 0, z), Vec3(0, 0, -1), t});
  s.samples_per_axis = 2;
  return s;
}

TEST(Render, IsDeterministic) {
  Scene s = default_scene(4);
  s.samples_per_axis = 2;
  EXPECT_EQ(render(s, small_fisheye(), RelativePose()), render(s, small_fisheye(), RelativePose()));
  s.noise_sigma = 0.01;
  const ScalarField a = render(s, small_fisheye(), RelativePose());
  EXPECT_EQ(a, render(s, small_fisheye(), RelativePose()));
  s.noise_seed += 1;
  EXPECT_NE(a, render(s, small_fisheye(), RelativePose()));
}

TEST(Render, SeedChangesTheTexture) {
  Scene a = default_scene(1), b = default_scene(2);
  a.samples_per_axis = b.samples_per_axis = 1;
  EXPECT_NE(render(a, small_fisheye(), RelativePose()), render(b, small_fisheye(), RelativePose()));
}

TEST(Render, CheckerWallIsPointSymmetric) {
  const auto cam = CameraModel::pinhole(48, 48, 40.0, 23.5, 23.5);
  const ScalarField img = render(checker_wall(2.0), cam, RelativePose());
  std::size_t same = 0;
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 48; ++x) same += std::abs(img(x, y) - img(47 - x, 47 - y)) < 1e-9;
  }
  EXPECT_GE(same, static_cast<std::size_t>(0.99 * 48 * 48));
}

TEST(Render, OutsideTheFieldOfViewIsBlack) {
  const auto cam = small_fisheye();
  const ScalarField img = render(default_scene(), cam, RelativePose());
  const Mask fov = fov_mask(cam);
  EXPECT_EQ(img(0, 0), 0.0);
  EXPECT_FALSE(fov(0, 0));
  EXPECT_GT(img(31, 31), 0.0);
}

TEST(CastRay, EveryForwardRayHitsTheDefaultScene) {
  const auto cam = small_fisheye();
  const Scene s = default_scene();
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      const auto ray = unproject(cam, Vec2(x, y));
      if (!ray || ray->z() <= 1e-9) continue;
      EXPECT_TRUE(cast_ray(s, Vec3::Zero(), *ray).has_value()) << x << "," << y;
    }
  }
}

TEST(CastRay, NearestPrimitiveWins) {
  const Scene s = default_scene();
  const auto hit = cast_ray(s, Vec3::Zero(), Vec3(-0.2, 0.1, 1.5).normalized());
  ASSERT_TRUE(hit);
  EXPECT_NEAR(hit->distance, Vec3(-0.2, 0.1, 1.5).norm() - 0.45, 1e-12);
  Box box{Vec3(-1, -1, 1), Vec3(1, 1, 2), {}};
  Scene b;
  b.primitives.push_back(box);
  EXPECT_NEAR(cast_ray(b, Vec3::Zero(), Vec3::UnitZ())->distance, 1.0, 1e-12);
  EXPECT_FALSE(cast_ray(b, Vec3::Zero(), -Vec3::UnitZ()));
}

TEST(GroundTruth, PlaneDepthAndPinholeDisparity) {
  const auto cam = CameraModel::pinhole(40, 30, 60.0, 19.5, 14.5);
  const StereoRig rig{cam, cam, RelativePose(Mat3::Identity(), Vec3(-0.1, 0, 0))};
  const GroundTruth gt = make_ground_truth(checker_wall(2.0), rig);
  for (int y = 0; y < 30; ++y) {
    for (int x = 0; x < 40; ++x) {
      const Vec3 ray = *unproject(cam, Vec2(x, y));
      EXPECT_NEAR(gt.depth0(x, y), 2.0 / ray.z(), 1e-9);
      EXPECT_NEAR(gt.correspondence(x, y).x(), -60.0 * 0.1 / 2.0, 1e-9);
      EXPECT_NEAR(gt.correspondence(x, y).y(), 0.0, 1e-9);
      // 3 px shift leaves the image for the first three columns.
      EXPECT_EQ(gt.covisible(x, y), x >= 3 ? 1 : 0) << x;
    }
  }
}

TEST(GroundTruth, IdentityRigHasZeroCorrespondence) {
  const auto cam = small_fisheye();
  const GroundTruth gt = make_ground_truth(default_scene(), {cam, cam, RelativePose()});
  for (std::size_t i = 0; i < gt.covisible.size(); ++i) {
    if (gt.covisible[i]) {
      EXPECT_LT(gt.correspondence[i].norm(), 1e-9);
    }
  }
  EXPECT_GT(count_valid(gt.covisible), 2500u);
}

TEST(GroundTruth, OccludedPointsAreNotCovisible) {
  const auto cam = CameraModel::unified(120, 120, 60.0, 59.5, 59.5, 0.9);
  const StereoRig rig{cam, cam, RelativePose(Mat3::Identity(), Vec3(-0.5, 0, 0))};
  Scene s;
  s.primitives.push_back(Plane{Vec3(0, 0, 3), Vec3(0, 0, -1), {}});
  s.primitives.push_back(Sphere{Vec3(0, 0, 1.5), 0.2, {}});
  const GroundTruth gt = make_ground_truth(s, rig);
  // Camera 1 sits at (0.5, 0, 0); the sphere hides (-0.5, 0, 3) from it.
  const Vec2 hidden = *project(cam, Vec3(-0.5, 0, 3));
  const int hx = static_cast<int>(std::lround(hidden.x())), hy = static_cast<int>(std::lround(hidden.y()));
  EXPECT_NEAR(gt.depth0(hx, hy), (*unproject(cam, Vec2(hx, hy)) * 3.0 / unproject(cam, Vec2(hx, hy))->z()).norm(), 1e-9);
  EXPECT_FALSE(gt.covisible(hx, hy));
  const Vec2 open = *project(cam, Vec3(0.8, 0.6, 3));
  EXPECT_TRUE(gt.covisible(static_cast<int>(std::lround(open.x())), static_cast<int>(std::lround(open.y()))));
}

TEST(GroundTruth, TriangulatesBackToTheRenderedDepth) {
  const StereoRig rig = {small_fisheye(), small_fisheye(), RelativePose(Mat3::Identity(), Vec3(-0.1, 0, 0))};
  const GroundTruth gt = make_ground_truth(default_scene(), rig);
  std::size_t n = 0;
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      // Grazing hits thousands of metres away are too ill-conditioned to compare.
      if (!gt.covisible(x, y) || gt.depth0(x, y) > 20.0) continue;
      const auto d = triangulate_midpoint(rig, Vec2(x, y), Vec2(x, y) + gt.correspondence(x, y));
      if (!d) continue;
      ++n;
      EXPECT_NEAR(*d, gt.depth0(x, y), 1e-7 * gt.depth0(x, y));
    }
  }
  EXPECT_GT(n, 1500u);
}

TEST(SceneJson, RoundTrips) {
  Scene s = default_scene(9);
  Texture sine;
  sine.kind = TextureKind::Sine;
  sine.grating = Vec3(0, 1, 0);
  s.primitives.push_back(Box{Vec3(0, 0, 1), Vec3(0.2, 0.3, 1.4), sine});
  s.noise_sigma = 0.02;
  const nlohmann::json j = to_json(s);
  EXPECT_EQ(to_json(scene_from_json(j)), j);
}

TEST(SceneJson, RejectsUnknownPrimitive) {
  const nlohmann::json j = {{"primitives", {{{"type", "torus"}}}}};
  EXPECT_THROW(scene_from_json(j), std::invalid_argument);
}

}  // namespace
}  // namespace fvs
