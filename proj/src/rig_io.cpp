#include "fvs/rig_io.hpp"

#include "fvs/raster_io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace fvs {

using nlohmann::json;

namespace {
constexpr double kRadToDeg = 180.0 / std::numbers::pi;
}

json to_json(const CameraModel& m) {
  json j{{"type", to_string(m.kind)},
         {"width", m.width},
         {"height", m.height},
         {"fx", m.fx},
         {"fy", m.fy},
         {"cx", m.cx},
         {"cy", m.cy},
         {"max_fov_deg", m.max_fov * kRadToDeg}};
  if (m.kind == CameraKind::Unified) j["xi"] = m.xi;
  if (m.kind == CameraKind::Polynomial) j["k"] = m.k;
  return j;
}

CameraModel camera_from_json(const json& j) {
  CameraModel m;
  m.kind = camera_kind_from_string(j.at("type").get<std::string>());
  m.width = j.at("width").get<int>();
  m.height = j.at("height").get<int>();
  if (j.contains("f")) {
    m.fx = m.fy = j.at("f").get<double>();
  } else {
    m.fx = j.at("fx").get<double>();
    m.fy = j.at("fy").get<double>();
  }
  m.cx = j.at("cx").get<double>();
  m.cy = j.at("cy").get<double>();
  const double default_fov = m.kind == CameraKind::Pinhole ? 120.0 : 180.0;
  m.max_fov = j.value("max_fov_deg", default_fov) / kRadToDeg;
  if (m.kind == CameraKind::Unified) m.xi = j.at("xi").get<double>();
  if (m.kind == CameraKind::Polynomial) m.k = j.at("k").get<std::array<double, 4>>();
  m.validate();
  return m;
}

json to_json(const StereoRig& rig) {
  const Mat3& r = rig.pose.rotation();
  const Vec3& t = rig.pose.translation();
  std::vector<double> rot;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) rot.push_back(r(i, k));
  }
  return json{{"cam0", to_json(rig.cam0)},
              {"cam1", to_json(rig.cam1)},
              {"pose", {{"rotation", rot}, {"translation", {t.x(), t.y(), t.z()}}}}};
}

StereoRig rig_from_json(const json& j) {
  if (j.contains("rig")) return rig_from_json(j.at("rig"));
  StereoRig rig;
  rig.cam0 = camera_from_json(j.at("cam0"));
  rig.cam1 = camera_from_json(j.at("cam1"));
  const auto rot = j.at("pose").at("rotation").get<std::vector<double>>();
  const auto tr = j.at("pose").at("translation").get<std::vector<double>>();
  if (rot.size() != 9 || tr.size() != 3) {
    throw std::invalid_argument("pose: rotation needs 9 values and translation 3");
  }
  Mat3 r;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) r(i, k) = rot[3 * i + k];
  }
  rig.pose = RelativePose(r, Vec3(tr[0], tr[1], tr[2]));
  return rig;
}

StereoRig load_rig(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open rig file: " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw IoError("invalid JSON in " + path.string() + ": " + e.what());
  }
  return rig_from_json(j);
}

void save_rig(const std::filesystem::path& path, const StereoRig& rig) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os << to_json(rig).dump(2) << "\n";
}

StereoRig default_fisheye_rig() {
  StereoRig rig;
  rig.cam0 = CameraModel::unified(400, 400, 200.0, 199.5, 199.5, 0.9, 180.0);
  rig.cam1 = rig.cam0;
  rig.pose = RelativePose(Mat3::Identity(), Vec3(-0.1, 0.0, 0.0));
  return rig;
}

}  // namespace fvs
