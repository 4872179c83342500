#include "fvs/walkthrough.hpp"

#include "fvs/eval.hpp"
#include "fvs/fields.hpp"
#include "fvs/pyramid.hpp"
#include "fvs/raster_io.hpp"
#include "fvs/stereo.hpp"
#include "fvs/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace fs = std::filesystem;

namespace fvs {

namespace {

constexpr int kSize = 16;
constexpr int kZoom = 16;

std::string num(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string vec(const Vec2& v, int digits = 4) { return "(" + num(v.x(), digits) + ", " + num(v.y(), digits) + ")"; }
std::string vec(const Vec3& v, int digits = 4) {
  return "(" + num(v.x(), digits) + ", " + num(v.y(), digits) + ", " + num(v.z(), digits) + ")";
}

StereoRig toy_rig() {
  const CameraModel cam = CameraModel::unified(kSize, kSize, 8.0, 7.5, 7.5, 0.9);
  const Mat3 r = RelativePose::axis_angle(Vec3::UnitY(), 3.0 * std::numbers::pi / 180.0);
  return {cam, cam, RelativePose(r, Vec3(-0.2, 0.0, 0.0))};
}

Scene toy_scene() {
  Scene s = default_scene(3);
  std::get<Plane>(s.primitives[0]).point = Vec3(0.0, 0.0, 1.5);
  std::get<Plane>(s.primitives[0]).texture.cell = 1.2;
  auto& ball = std::get<Sphere>(s.primitives[1]);
  ball.center = Vec3(0.1, 0.0, 0.8);
  ball.radius = 0.25;
  ball.texture.cell = 0.4;
  return s;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t n = 0;
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    ++n;
  }
  std::string str(int digits = 4) const { return n ? "[" + num(lo, digits) + ", " + num(hi, digits) + "]" : "(empty)"; }
};

Range range_of(const ScalarField& f, const Mask& m) {
  Range r;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (m[i]) r.add(f[i]);
  }
  return r;
}

ScalarField mask_to_scalar(const Mask& m) {
  ScalarField f(m.width(), m.height());
  for (std::size_t i = 0; i < m.size(); ++i) f[i] = m[i];
  return f;
}

RgbImage zoom(const RgbImage& img) {
  RgbImage out(img.width() * kZoom, img.height() * kZoom);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) out(x, y) = img(x / kZoom, y / kZoom);
  }
  return out;
}

RgbImage grey(const ScalarField& f, const Mask& m, std::optional<double> lo = std::nullopt,
              std::optional<double> hi = std::nullopt) {
  return colorize_scalar({f, m}, lo, hi);
}

// Direction field as hue-free encoding: red = x component, green = y
// component, both mapped from [-1, 1].
RgbImage direction_image(const VectorField2& d, const Mask& m) {
  RgbImage img(d.width(), d.height(), Rgb{0, 0, 0});
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!m[i]) continue;
    const auto c = [](double v) { return static_cast<std::uint8_t>(std::lround(127.5 * (std::clamp(v, -1.0, 1.0) + 1.0))); };
    img[i] = Rgb{c(d[i].x()), c(d[i].y()), 128};
  }
  return img;
}

void draw_polyline(RgbImage& zoomed, const std::vector<Vec2>& pts, Rgb color) {
  const auto put = [&](const Vec2& p) {
    const int x = static_cast<int>(std::floor((p.x() + 0.5) * kZoom));
    const int y = static_cast<int>(std::floor((p.y() + 0.5) * kZoom));
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (zoomed.in_bounds(x + dx, y + dy)) zoomed(x + dx, y + dy) = color;
      }
    }
  };
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double len = (pts[i + 1] - pts[i]).norm();
    const int steps = std::max(1, static_cast<int>(std::ceil(len * kZoom)));
    for (int s = 0; s <= steps; ++s) put(pts[i] + (pts[i + 1] - pts[i]) * (static_cast<double>(s) / steps));
  }
  if (pts.size() == 1) put(pts.front());
}

class Writer {
 public:
  explicit Writer(fs::path dir) : dir_(std::move(dir)) {}

  std::string png(const std::string& name, const RgbImage& img) {
    write_png(dir_ / name, zoom(img));
    files.push_back(dir_ / name);
    return name;
  }
  std::string png_raw(const std::string& name, const RgbImage& img) {
    write_png(dir_ / name, img);
    files.push_back(dir_ / name);
    return name;
  }
  void pfm(const std::string& name, const ScalarField& f) {
    write_pfm(dir_ / name, f);
    files.push_back(dir_ / name);
  }
  void pfm(const std::string& name, const VectorField2& f, const Mask& m) {
    write_pfm(dir_ / name, f, &m);
    files.push_back(dir_ / name);
  }

  std::vector<fs::path> files;

 private:
  fs::path dir_;
};

}  // namespace

Walkthrough generate_walkthrough(const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw IoError("cannot create directory " + out_dir.string());
  Writer out(out_dir);
  std::ostringstream md;

  const StereoRig rig = toy_rig();
  const Scene scene = toy_scene();
  const Mask mask0 = fov_mask(rig.cam0);

  md << "# Walkthrough: fisheye stereo on a 16x16 rig\n\n"
     << "Generated by `fvs walkthrough`. Every number below is computed by the library when the\n"
     << "document is generated. Images are shown magnified " << kZoom << "x with nearest-neighbour\n"
     << "sampling; the matching PFM files hold the raw values.\n\n";

  // 1. Camera model.
  md << "## 1. Camera model\n\n"
     << "Both cameras use the unified model with xi = " << num(rig.cam0.xi, 2) << ", f = "
     << num(rig.cam0.fx, 1) << " px and principal point " << vec(Vec2(rig.cam0.cx, rig.cam0.cy), 1)
     << ". Camera 1 is rotated by 3 degrees about y and translated by "
     << vec(rig.pose.translation(), 2) << " (its centre sits at " << vec(rig.pose.second_center(), 3)
     << " in camera-0 coordinates).\n\n"
     << "| point (camera 0) | pixel | unprojected ray |\n|---|---|---|\n";
  for (const Vec3& X : {Vec3(0.0, 0.0, 1.0), Vec3(0.4, -0.2, 1.0), Vec3(1.0, 0.5, 0.3)}) {
    const auto px = project(rig.cam0, X);
    if (!px) continue;
    const auto ray = unproject(rig.cam0, *px);
    md << "| " << vec(X, 2) << " | " << vec(*px) << " | " << (ray ? vec(*ray) : std::string("-")) << " |\n";
  }
  md << "\nThe field-of-view mask keeps " << count_valid(mask0) << " of " << kSize * kSize
     << " pixels.\n\n";
  out.png("mask.png", grey(mask_to_scalar(mask0), full_mask(kSize, kSize), 0.0, 1.0));

  // 2. Images.
  const ScalarField i0 = render(scene, rig.cam0, RelativePose::identity());
  const ScalarField i1 = render(scene, rig.cam1, rig.pose);
  const GroundTruth gt = make_ground_truth(scene, rig);
  out.pfm("i0.pfm", i0);
  out.pfm("i1.pfm", i1);
  md << "## 2. Rendered pair\n\n"
     << "A textured plane at 1.5 m with a sphere in front, ray cast per camera.\n\n"
     << "![I0](" << out.png("i0.png", grey(i0, mask0, 0.0, 1.0)) << ") ![I1]("
     << out.png("i1.png", grey(i1, fov_mask(rig.cam1), 0.0, 1.0)) << ")\n\n"
     << "Ground truth marks " << count_valid(gt.covisible) << " pixels as covisible.\n\n";

  // 3. Calibration field.
  const CalibrationField calib = generate_calibration_field(rig);
  Range calib_mag;
  for (std::size_t i = 0; i < calib.offset.size(); ++i) {
    if (calib.valid[i]) calib_mag.add(calib.offset[i].norm());
  }
  const MaskedScalar i1c = warp_image(i1, calib.offset, fov_mask(rig.cam1), calib.valid);
  out.pfm("calibration.pfm", calib.offset, calib.valid);
  out.pfm("i1_calibrated.pfm", i1c.values);
  md << "## 3. Calibration field\n\n"
     << "The rotation-only flow c(x) = project(cam1, R ray(x)) - x removes the rotation. Its\n"
     << "magnitude ranges over " << calib_mag.str() << " px on " << calib_mag.n << " valid pixels.\n"
     << "Image 1 resampled at x + c(x) behaves as if taken by a purely translated camera.\n\n"
     << "![calibrated I1](" << out.png("i1_calibrated.png", grey(i1c.values, i1c.valid, 0.0, 1.0))
     << ")\n\n";

  // 4. Trajectory field.
  const StereoRig translated = pre_rotated_rig(rig);
  const SolverParams defaults;
  const TrajectoryField traj = generate_trajectory_field(translated, defaults.epsilon_scale);
  const TrajectoryField traj_half = generate_trajectory_field(translated, 0.5 * defaults.epsilon_scale);
  double max_angle = 0.0;
  for (std::size_t i = 0; i < traj.direction.size(); ++i) {
    if (!traj.valid[i] || !traj_half.valid[i]) continue;
    const double c = std::clamp(traj.direction[i].dot(traj_half.direction[i]), -1.0, 1.0);
    max_angle = std::max(max_angle, std::acos(c));
  }
  out.pfm("trajectory.pfm", traj.direction, traj.valid);
  md << "## 4. Trajectory field\n\n"
     << "After calibration the rig translates by " << vec(translated.pose.translation(), 4)
     << ". Each pixel's epipolar direction is the normalised flow of a vanishingly small\n"
     << "translation (largest probe flow " << num(defaults.epsilon_scale, 2) << " px). Halving the\n"
     << "probe changes no direction by more than " << num(max_angle, 9) << " rad.\n\n"
     << "| pixel | direction |\n|---|---|\n";
  for (int x = 1; x < kSize; x += 3) {
    md << "| (" << x << ", 7) | "
       << (traj.valid(x, 7) ? vec(traj.direction(x, 7)) : std::string("invalid")) << " |\n";
  }
  md << "\nColour encodes the direction (red = x, green = y):\n\n"
     << "![trajectory](" << out.png("trajectory.png", direction_image(traj.direction, traj.valid)) << ")\n\n";

  RgbImage overlay = zoom(grey(i0, mask0, 0.0, 1.0));
  md << "Euler-traced epipolar curves (step 0.25 px, 6 px of arc) drawn over I0:\n\n"
     << "| start | end | vertices |\n|---|---|---|\n";
  const std::pair<Vec2, Rgb> starts[] = {{Vec2(3.0, 3.0), Rgb{230, 40, 40}},
                                         {Vec2(4.0, 8.0), Rgb{40, 200, 60}},
                                         {Vec2(6.0, 13.0), Rgb{60, 90, 240}}};
  for (const auto& [start, color] : starts) {
    const auto line = trace_epipolar_curve(traj, start, 6.0, 0.25);
    draw_polyline(overlay, line, color);
    md << "| " << vec(start, 1) << " | " << vec(line.back(), 3) << " | " << line.size() << " |\n";
  }
  md << "\n![epipolar curves](" << out.png_raw("epipolar_overlay.png", overlay) << ")\n\n";

  // 5. Anisotropic tensor.
  const ScalarField smoothed = gaussian_blur(i0, mask0, defaults.tensor_sigma);
  const SymTensorField tensor = compute_tensor(smoothed, defaults.beta, defaults.eta, mask0);
  ScalarField across(kSize, kSize);  // eigenvalue across the edge: trace - 1
  for (std::size_t i = 0; i < tensor.size(); ++i) across[i] = tensor[i].a + tensor[i].c - 1.0;
  out.pfm("tensor_weight.pfm", across);
  md << "## 5. Anisotropic tensor\n\n"
     << "T = I + (exp(-beta |grad I0|^eta) - 1) n n^T with beta = " << num(defaults.beta, 2)
     << ", eta = " << num(defaults.eta, 2) << ", computed on I0 blurred with sigma = "
     << num(defaults.tensor_sigma, 1) << ". The weight across edges spans "
     << range_of(across, mask0).str() << " (1 = isotropic).\n\n"
     << "![tensor weight](" << out.png("tensor_weight.png", grey(across, mask0, 0.0, 1.0)) << ")\n\n";

  // 6. First linearisation on the finest level.
  SolverParams params;
  params.levels = 1;
  params.min_width = 8;
  params.warp_iters = 30;
  const auto levels = prepare_levels(i0, i1, rig, params);
  const LevelProblem& finest = levels.back();
  const MaskedScalar warped = warp_image(finest.i1, VectorField2(kSize, kSize), finest.i1_valid, finest.mask);
  const MaskedScalar i_u = image_derivative_along(finest.trajectory.direction, warped);
  ScalarField rho0(kSize, kSize);
  for (std::size_t i = 0; i < rho0.size(); ++i) {
    if (warped.valid[i]) rho0[i] = warped.values[i] - i0[i];
  }
  out.pfm("i_u.pfm", i_u.values);
  out.pfm("rho0.pfm", rho0);
  md << "## 6. Linearised data term\n\n"
     << "At zero disparity, rho(u) = rho0 + u I_u with I_u the difference of warped I1 one pixel\n"
     << "along the epipolar direction. I_u spans " << range_of(i_u.values, i_u.valid).str()
     << " and rho0 spans " << range_of(rho0, warped.valid).str() << ".\n\n"
     << "![I_u](" << out.png("i_u.png", grey(i_u.values, i_u.valid)) << ") ![rho0]("
     << out.png("rho0.png", grey(rho0, warped.valid)) << ")\n\n";

  const StepSizes steps = compute_step_sizes(tensor, mask0, params.alpha0, params.alpha1);
  const int cx = 8, cy = 8;
  const double tau_u = steps.tau_u(cx, cy);
  md << "Diagonal preconditioning gives tau_u in " << range_of(steps.tau_u, mask0).str()
     << " and tau_v in " << range_of(steps.tau_v, mask0).str() << ".\n\n"
     << "The resolvent of the data term at pixel (8, 8) with lambda = " << num(params.lambda, 2)
     << ", tau_u = " << num(tau_u) << ", I_u = " << num(i_u.values(cx, cy)) << ":\n\n"
     << "| u_hat | rho(u_hat) | thresholded u |\n|---|---|---|\n";
  for (double u_hat : {-1.0, 0.0, 0.5, 2.0}) {
    const double rho = rho0(cx, cy) + u_hat * i_u.values(cx, cy);
    md << "| " << num(u_hat, 2) << " | " << num(rho) << " | "
       << num(thresholding_step(u_hat, rho, i_u.values(cx, cy), tau_u, params.lambda)) << " |\n";
  }
  md << "\n";

  // 7. Full coarse-to-fine solve.
  StereoResult res = solve_levels(levels, params);
  compose_flow(res, rig);
  const MaskedScalar err = correspondence_error(res.flow, gt, mask0, &res.flow_valid);
  const MaskedScalar derr = depth_error_map(res.flow, res.flow_valid, rig, gt);
  const ErrorReport report = make_report(err, derr);
  Range gt_len;
  for (std::size_t i = 0; i < gt.correspondence.size(); ++i) {
    if (gt.covisible[i]) gt_len.add(gt.correspondence[i].norm());
  }
  out.pfm("disparity.pfm", res.disparity);
  out.pfm("flow.pfm", res.flow, res.flow_valid);
  md << "## 7. Coarse-to-fine solve\n\n"
     << levels.size() << " pyramid levels (widths";
  for (const auto& l : levels) md << " " << l.i0.width();
  md << "), " << params.warp_iters << " warp iterations of " << params.pd_iters
     << " primal-dual steps each, du_max = " << num(params.du_max, 2) << " px.\n\n"
     << "Disparity spans " << range_of(res.disparity, res.valid).str() << " px; the true correspondence\n"
     << "length spans " << gt_len.str() << " px. Against ground truth on "
     << report.valid_count << " covisible pixels: mean error " << num(report.mean_error) << " px, "
     << num(report.percent_over[0], 2) << "% above 1 px.\n\n"
     << "![disparity](" << out.png("disparity.png", grey(res.disparity, res.valid)) << ") ![error]("
     << out.png("error.png", colorize_error(err)) << ")\n\n";

  // 8. Triangulation.
  const auto depth = depth_from_flow(rig, res.flow, res.flow_valid);
  md << "## 8. Depth\n\n"
     << "Midpoint triangulation of the estimated correspondence at (8, 8): "
     << (depth.valid(cx, cy) ? num(depth.values(cx, cy)) + " m" : std::string("invalid"))
     << "; ground truth " << num(gt.depth0(cx, cy)) << " m.\n";
  out.pfm("depth.pfm", depth.values);

  Walkthrough w;
  w.document = out_dir / "walkthrough.md";
  std::ofstream os(w.document);
  os << md.str();
  if (!os) throw IoError("cannot write " + w.document.string());
  w.files = std::move(out.files);
  return w;
}

}  // namespace fvs
