#include "fvs/camera.hpp"
#include "fvs/rig_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <unistd.h>

namespace fs = std::filesystem;

namespace fvs {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(Project, PinholeExamples) {
  const auto cam = CameraModel::pinhole(800, 800, 300.0, 400.0, 400.0);
  EXPECT_TRUE(project(cam, Vec3(0, 0, 1))->isApprox(Vec2(400, 400)));
  const Vec2 p = *project(cam, Vec3(1, 0, 1));
  EXPECT_NEAR(p.x(), 700.0, 1e-12);
  EXPECT_NEAR(p.y(), 400.0, 1e-12);
  EXPECT_FALSE(project(cam, Vec3(0, 0, -1)));
}

TEST(Project, UnifiedExample) {
  const auto cam = CameraModel::unified(800, 800, 300.0, 400.0, 400.0, 1.0);
  const Vec2 p = *project(cam, Vec3(1, 0, 1));
  EXPECT_NEAR(p.x(), 300.0 / (1.0 + std::sqrt(2.0)) + 400.0, 1e-12);
  EXPECT_NEAR(p.y(), 400.0, 1e-12);
}

TEST(Project, UnifiedRespectsFieldOfView) {
  const auto cam = CameraModel::unified(400, 400, 200.0, 199.5, 199.5, 0.9, 180.0);
  EXPECT_TRUE(project(cam, Vec3(1, 0, 0.01)));
  EXPECT_FALSE(project(cam, Vec3(1, 0, -0.2)));
  const auto narrow = CameraModel::unified(400, 400, 200.0, 199.5, 199.5, 0.9, 90.0);
  EXPECT_FALSE(project(narrow, Vec3(1, 0, 0.9)));
}

TEST(Unproject, PrincipalPointIsTheOpticalAxis) {
  const std::array<CameraModel, 3> cams{CameraModel::pinhole(100, 80, 50, 49.5, 39.5),
                                        CameraModel::unified(100, 80, 50, 49.5, 39.5, 0.8),
                                        CameraModel::polynomial(100, 80, 50, 49.5, 39.5, {1, -0.02, 0.001, 0})};
  for (const auto& cam : cams) {
    const Vec3 r = *unproject(cam, Vec2(cam.cx, cam.cy));
    EXPECT_NEAR((r - Vec3(0, 0, 1)).norm(), 0.0, 1e-12) << to_string(cam.kind);
  }
}

TEST(Unproject, PinholeInverse) {
  const auto cam = CameraModel::pinhole(800, 800, 300.0, 400.0, 400.0);
  const Vec3 r = *unproject(cam, Vec2(700, 400));
  EXPECT_NEAR((r - Vec3(1, 0, 1).normalized()).norm(), 0.0, 1e-12);
}

TEST(Unproject, EquidistantRadiusMapsToPolarAngle) {
  const auto cam = CameraModel::polynomial(800, 800, 300.0, 400.0, 400.0, {1, 0, 0, 0});
  const double r = 300.0 * kPi / 4.0;
  const Vec3 ray = *unproject(cam, Vec2(400.0 + r, 400.0));
  EXPECT_NEAR(std::acos(ray.z()), kPi / 4.0, 1e-10);
  EXPECT_NEAR(ray.y(), 0.0, 1e-12);
}

TEST(Camera, RoundTripAcrossTheFieldOfView) {
  const std::array<CameraModel, 3> cams{
      CameraModel::pinhole(400, 400, 150, 199.5, 199.5, 160.0),
      CameraModel::unified(400, 400, 200, 199.5, 199.5, 0.9),
      CameraModel::polynomial(400, 400, 120, 199.5, 199.5, {1.0, -0.05, 0.004, -0.0002})};
  std::mt19937 rng(9);
  for (const auto& cam : cams) {
    const double max_theta = 0.5 * cam.max_fov - 1e-3;
    std::uniform_real_distribution<double> th(0.0, max_theta), ph(-kPi, kPi);
    for (int i = 0; i < 500; ++i) {
      const double t = th(rng), p = ph(rng);
      const Vec3 ray(std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t));
      const auto px = project(cam, 3.7 * ray);
      ASSERT_TRUE(px) << to_string(cam.kind);
      const auto back = unproject(cam, *px);
      ASSERT_TRUE(back);
      EXPECT_LT((*back - ray).norm(), 1e-9) << to_string(cam.kind) << " theta " << t;
    }
  }
}

TEST(Camera, UnifiedWithZeroXiIsPinhole) {
  const auto pin = CameraModel::pinhole(300, 200, 120, 150, 100, 150.0);
  const auto uni = CameraModel::unified(300, 200, 120, 150, 100, 0.0, 150.0);
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Vec3 X(d(rng), d(rng), 0.5 + std::abs(d(rng)));
    const auto a = project(pin, X);
    const auto b = project(uni, X);
    ASSERT_EQ(a.has_value(), b.has_value());
    if (a) {
      EXPECT_LT((*a - *b).norm(), 1e-9);
    }
  }
}

TEST(Camera, RescaledKeepsPixelCentresAligned) {
  const auto cam = CameraModel::unified(400, 400, 200, 199.5, 199.5, 0.9);
  const auto half = cam.rescaled(0.5, 200, 200);
  EXPECT_DOUBLE_EQ(half.fx, 100.0);
  EXPECT_DOUBLE_EQ(half.cx, 99.5);
  const Vec3 X(0.3, -0.2, 1.0);
  const Vec2 full = *project(cam, X);
  const Vec2 coarse = *project(half, X);
  EXPECT_LT(((full + Vec2(0.5, 0.5)) * 0.5 - Vec2(0.5, 0.5) - coarse).norm(), 1e-12);
}

TEST(Camera, ValidateRejectsNonsense) {
  auto cam = CameraModel::unified(10, 10, 5, 4.5, 4.5, 0.9);
  cam.fx = -1.0;
  EXPECT_THROW(cam.validate(), std::invalid_argument);
  EXPECT_THROW(CameraModel::unified(10, 10, 5, 4.5, 4.5, -0.5), std::invalid_argument);
  EXPECT_THROW(camera_kind_from_string("orthographic"), std::invalid_argument);
}

TEST(Pose, TransformExamples) {
  const Vec3 X(0, 0, 2);
  EXPECT_EQ(RelativePose::identity().transform(X), X);
  EXPECT_EQ(RelativePose(Mat3::Identity(), Vec3(0.1, 0, 0)).transform(X), Vec3(0.1, 0, 2));
  const RelativePose yaw(RelativePose::axis_angle(Vec3::UnitY(), kPi / 2), Vec3::Zero());
  EXPECT_LT((transform(yaw, Vec3(1, 0, 0)) - Vec3(0, 0, -1)).norm(), 1e-12);
}

TEST(Pose, RejectsNonRotations) {
  Mat3 m = Mat3::Identity();
  m(0, 0) = 1.1;
  EXPECT_THROW(RelativePose(m, Vec3::Zero()), std::invalid_argument);
  EXPECT_THROW(RelativePose(-Mat3::Identity(), Vec3::Zero()), std::invalid_argument);
}

TEST(Pose, SecondCentre) {
  const Mat3 r = RelativePose::axis_angle(Vec3(0.2, 1.0, -0.3).normalized(), 0.4);
  const RelativePose pose(r, Vec3(0.3, -0.1, 0.05));
  EXPECT_LT(pose.transform(pose.second_center()).norm(), 1e-12);
  EXPECT_FALSE(pose.is_pure_translation());
  EXPECT_TRUE(RelativePose(Mat3::Identity(), Vec3(1, 0, 0)).is_pure_translation());
}

TEST(Triangulate, RectifiedPinholeDepth) {
  const auto cam = CameraModel::pinhole(800, 800, 300.0, 400.0, 400.0);
  const StereoRig rig{cam, cam, RelativePose(Mat3::Identity(), Vec3(-0.1, 0, 0))};
  const auto d = triangulate_midpoint(rig, Vec2(400, 400), Vec2(370, 400));
  ASSERT_TRUE(d);
  EXPECT_NEAR(*d, 1.0, 1e-9);
}

TEST(Triangulate, RoundTripOnFisheyeRig) {
  const StereoRig rig = default_fisheye_rig();
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> d(-2.0, 2.0), z(0.3, 4.0);
  int checked = 0;
  while (checked < 200) {
    const Vec3 X(d(rng), d(rng), z(rng));
    const auto x0 = project(rig.cam0, X);
    const auto x1 = project(rig.cam1, rig.pose.transform(X));
    if (!x0 || !x1) continue;
    const auto depth = triangulate_midpoint(rig, *x0, *x1);
    ASSERT_TRUE(depth);
    EXPECT_NEAR(*depth, X.norm(), 1e-6 * X.norm());
    ++checked;
  }
}

TEST(Triangulate, ZeroDisparityIsInvalid) {
  const StereoRig rig = default_fisheye_rig();
  EXPECT_FALSE(triangulate_midpoint(rig, Vec2(150, 220), Vec2(150, 220)));
}

class RigIo : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("fvs_rig_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(RigIo, RoundTrip) {
  StereoRig rig = default_fisheye_rig();
  rig.cam1 = CameraModel::polynomial(400, 400, 130, 200.2, 198.7, {1.0, -0.01, 0.002, 0.0}, 190.0);
  rig.pose = RelativePose(RelativePose::axis_angle(Vec3::UnitX(), 0.05), Vec3(-0.1, 0.01, 0.0));
  save_rig(dir_ / "rig.json", rig);
  const StereoRig back = load_rig(dir_ / "rig.json");
  EXPECT_EQ(back.cam1.kind, CameraKind::Polynomial);
  EXPECT_NEAR(back.cam1.k[1], -0.01, 1e-15);
  EXPECT_NEAR(back.cam1.max_fov, rig.cam1.max_fov, 1e-12);
  EXPECT_NEAR(back.cam0.xi, 0.9, 1e-15);
  EXPECT_LT((back.pose.rotation() - rig.pose.rotation()).norm(), 1e-12);
  EXPECT_LT((back.pose.translation() - rig.pose.translation()).norm(), 1e-15);
}

TEST_F(RigIo, MissingFileNamesThePath) {
  try {
    load_rig(dir_ / "absent_rig.json");
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("absent_rig.json"), std::string::npos);
  }
}

TEST_F(RigIo, RejectsInvalidValues) {
  std::ofstream(dir_ / "bad.json")
      << R"({"cam0":{"type":"unified","width":10,"height":10,"fx":-5,"fy":5,"cx":4.5,"cy":4.5,"xi":0.9},)"
      << R"("cam1":{"type":"unified","width":10,"height":10,"fx":5,"fy":5,"cx":4.5,"cy":4.5,"xi":0.9},)"
      << R"("pose":{"rotation":[1,0,0,0,1,0,0,0,1],"translation":[-0.1,0,0]}})";
  EXPECT_THROW(load_rig(dir_ / "bad.json"), std::exception);
}

TEST(DefaultRig, MatchesDocumentedValues) {
  const StereoRig rig = default_fisheye_rig();
  EXPECT_EQ(rig.cam0.kind, CameraKind::Unified);
  EXPECT_EQ(rig.cam0.width, 400);
  EXPECT_DOUBLE_EQ(rig.cam0.fx, 200.0);
  EXPECT_DOUBLE_EQ(rig.cam0.xi, 0.9);
  EXPECT_NEAR(rig.cam0.max_fov, kPi, 1e-12);
  EXPECT_NEAR(rig.pose.second_center().x(), 0.1, 1e-15);
}

}  // namespace
}  // namespace fvs
