#include "fvs/cli.hpp"

#include "fvs/eval.hpp"
#include "fvs/fields.hpp"
#include "fvs/raster_io.hpp"
#include "fvs/rig_io.hpp"
#include "fvs/stereo.hpp"
#include "fvs/walkthrough.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace fvs {

namespace {

json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw IoError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  os << j.dump(2) << "\n";
  if (!os) throw IoError("cannot write " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

ScalarField mask_to_field(const Mask& m) {
  ScalarField f(m.width(), m.height());
  for (std::size_t i = 0; i < m.size(); ++i) f[i] = m[i] ? 1.0 : 0.0;
  return f;
}

Mask field_to_mask(const ScalarField& f) {
  Mask m(f.width(), f.height(), 0);
  for (std::size_t i = 0; i < f.size(); ++i) m[i] = f[i] > 0.5 ? 1 : 0;
  return m;
}

// Solver flags shared by `stereo` and `sweep`. Values are only applied when
// the flag was given, so config files keep precedence over defaults.
struct SolverFlags {
  std::map<std::string, std::pair<CLI::Option*, double>> reals;
  std::map<std::string, std::pair<CLI::Option*, int>> ints;

  void add(CLI::App* app) {
    const SolverParams d;
    const std::pair<const char*, double> real_flags[] = {
        {"lambda", d.lambda},         {"alpha0", d.alpha0},         {"alpha1", d.alpha1},
        {"beta", d.beta},             {"eta", d.eta},               {"du_max", d.du_max},
        {"scale", d.scale},           {"tensor_sigma", d.tensor_sigma}, {"theta", d.theta},
        {"epsilon_scale", d.epsilon_scale}};
    const std::pair<const char*, int> int_flags[] = {{"warp_iters", d.warp_iters},
                                                     {"pd_iters", d.pd_iters},
                                                     {"levels", d.levels},
                                                     {"min_width", d.min_width}};
    for (const auto& [name, def] : real_flags) reals[name] = {nullptr, def};
    for (const auto& [name, def] : int_flags) ints[name] = {nullptr, def};
    for (auto& [name, slot] : reals) {
      slot.first = app->add_option(flag_name(name), slot.second, "solver " + name + " (default " +
                                                                     fmt(slot.second) + ")");
    }
    for (auto& [name, slot] : ints) {
      slot.first = app->add_option(flag_name(name), slot.second,
                                   "solver " + name + " (default " + std::to_string(slot.second) + ")");
    }
  }

  json overrides() const {
    json j = json::object();
    for (const auto& [name, slot] : reals) {
      if (slot.first->count()) j[name] = slot.second;
    }
    for (const auto& [name, slot] : ints) {
      if (slot.first->count()) j[name] = slot.second;
    }
    return j;
  }

  static std::string flag_name(std::string name) {
    std::replace(name.begin(), name.end(), '_', '-');
    return "--" + name;
  }
  static std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  }
};

// Precedence: built-in defaults < --config file < individual flags.
json resolve_config(const std::string& config_path, const SolverFlags& flags) {
  json cfg = json::object();
  if (!config_path.empty()) cfg = read_json(config_path);
  SolverParams params;
  if (cfg.contains("solver")) params = solver_params_from_json(cfg.at("solver"));
  params = solver_params_from_json(flags.overrides(), params);
  params.validate();
  cfg["solver"] = to_json(params);
  return cfg;
}

int cmd_render(const std::string& out, const std::string& rig_path, const std::string& scene_path,
               std::uint64_t seed, int samples, double noise) {
  const StereoRig rig = rig_path.empty() ? default_fisheye_rig() : load_rig(rig_path);
  Scene scene = scene_path.empty() ? default_scene(seed) : scene_from_json(read_json(scene_path));
  if (samples > 0) scene.samples_per_axis = samples;
  if (noise >= 0.0) scene.noise_sigma = noise;
  write_dataset(out, scene, rig);
  std::cout << "wrote dataset to " << out << "\n";
  return 0;
}

int cmd_fields(const std::string& rig_path, const std::string& out, double epsilon_scale) {
  const StereoRig rig = rig_path.empty() ? default_fisheye_rig() : load_rig(rig_path);
  ensure_dir(out);
  const CalibrationField calib = generate_calibration_field(rig);
  write_pfm(fs::path(out) / "calibration.pfm", calib.offset, &calib.valid);
  const TrajectoryField traj = generate_trajectory_field(pre_rotated_rig(rig), epsilon_scale);
  write_pfm(fs::path(out) / "trajectory.pfm", traj.direction, &traj.valid);
  std::cout << "wrote calibration.pfm and trajectory.pfm to " << out << "\n";
  return 0;
}

struct StereoInputs {
  ScalarField left;
  ScalarField right;
  StereoRig rig;
};

StereoInputs load_stereo_inputs(const std::string& dataset, const std::string& left,
                                const std::string& right, const std::string& rig_path) {
  StereoInputs in;
  if (!dataset.empty()) {
    const json manifest = read_json(fs::path(dataset) / "manifest.json");
    in.rig = rig_from_json(manifest);
    in.left = load_image(fs::path(dataset) / manifest.at("files").at("left").get<std::string>());
    in.right = load_image(fs::path(dataset) / manifest.at("files").at("right").get<std::string>());
  } else {
    if (left.empty() || right.empty()) throw std::invalid_argument("need --dataset or --left/--right");
    in.left = load_image(left);
    in.right = load_image(right);
    in.rig = rig_path.empty() ? default_fisheye_rig() : load_rig(rig_path);
  }
  if (!rig_path.empty() && !dataset.empty()) in.rig = load_rig(rig_path);
  return in;
}

int cmd_stereo(const StereoInputs& in, const json& cfg, const std::string& out) {
  ensure_dir(out);
  const SolverParams params = solver_params_from_json(cfg.at("solver"));
  const auto t0 = std::chrono::steady_clock::now();
  const StereoResult res = solve_pyramid(in.left, in.right, in.rig, params);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const MaskedScalar depth = depth_from_flow(in.rig, res.flow, res.flow_valid);

  const fs::path dir(out);
  write_pfm(dir / "disparity.pfm", res.disparity);
  write_pfm(dir / "warp.pfm", res.warp, &res.valid);
  write_pfm(dir / "flow.pfm", res.flow, &res.flow_valid);
  write_pfm(dir / "depth.pfm", depth.values);
  write_png(dir / "disparity.png", colorize_scalar({res.disparity, res.valid}));
  write_png(dir / "depth.png", colorize_scalar(depth, 0.0, 10.0));
  write_json(dir / "config.json", cfg);
  std::cout << "solved in " << std::fixed << std::setprecision(2) << seconds << " s, outputs in " << out
            << "\n";
  return 0;
}

int cmd_eval(const std::string& flow_path, const std::string& dataset, const std::string& out,
             const std::string& error_map, const std::vector<double>& extra_taus) {
  const Dataset ds = read_dataset(dataset);
  const VectorPfm est = read_pfm_vector(flow_path);
  const Mask domain = fov_mask(ds.rig.cam0);
  const MaskedScalar err = correspondence_error(est.field, ds.truth, domain, &est.aux);
  const MaskedScalar derr = depth_error_map(est.field, est.aux, ds.rig, ds.truth);
  const ErrorReport report = make_report(err, derr);
  json j = to_json(report);
  for (double tau : extra_taus) {
    const auto pct = erroneous_percentage(err.values, tau, err.valid);
    std::ostringstream key;
    key << tau;
    j["extra"][key.str()] = pct ? json(*pct) : json(nullptr);
  }
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json(out, j);
  }
  if (!error_map.empty()) write_png(error_map, colorize_error(err));
  return 0;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad list entry '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

int cmd_sweep(const std::string& dataset, const json& cfg, const std::string& n_list,
              const std::string& du_list, const std::string& csv_path, std::uint64_t seed) {
  Dataset ds;
  if (dataset.empty()) {
    ds.rig = default_fisheye_rig();
    const Scene scene = default_scene(seed);
    ds.left = render(scene, ds.rig.cam0, RelativePose::identity());
    ds.right = render(scene, ds.rig.cam1, ds.rig.pose);
    ds.truth = make_ground_truth(scene, ds.rig);
  } else {
    ds = read_dataset(dataset);
  }
  const SolverParams base = solver_params_from_json(cfg.at("solver"));
  const Mask domain = fov_mask(ds.rig.cam0);

  std::ostringstream csv;
  csv << "N,du_max,tau1,tau3,tau5,mean_error_px,seconds\n";
  for (double n : parse_list(n_list)) {
    for (double du : parse_list(du_list)) {
      SolverParams p = base;
      p.warp_iters = static_cast<int>(n);
      p.du_max = du;
      const auto t0 = std::chrono::steady_clock::now();
      const StereoResult res = solve_pyramid(ds.left, ds.right, ds.rig, p);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const MaskedScalar err = correspondence_error(res.flow, ds.truth, domain, &res.flow_valid);
      const ErrorReport r = make_report(err, MaskedScalar{ScalarField(1, 1), Mask(1, 1, 0)});
      csv << p.warp_iters << "," << du << "," << std::setprecision(10) << r.percent_over[0] << ","
          << r.percent_over[1] << "," << r.percent_over[2] << "," << r.mean_error << "," << secs << "\n";
      std::cerr << "N=" << p.warp_iters << " du_max=" << du << " tau1=" << r.percent_over[0] << "% ("
                << secs << " s)\n";
    }
  }
  if (csv_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream os(csv_path);
    os << csv.str();
    if (!os) throw IoError("cannot write " + csv_path);
    json echo = cfg;
    echo["warp_iters_grid"] = n_list;
    echo["du_max_grid"] = du_list;
    write_json(fs::path(csv_path).replace_extension(".config.json"), echo);
  }
  return 0;
}

}  // namespace

json to_json(const SolverParams& p) {
  return {{"lambda", p.lambda},
          {"alpha0", p.alpha0},
          {"alpha1", p.alpha1},
          {"beta", p.beta},
          {"eta", p.eta},
          {"warp_iters", p.warp_iters},
          {"pd_iters", p.pd_iters},
          {"du_max", p.du_max},
          {"levels", p.levels},
          {"scale", p.scale},
          {"min_width", p.min_width},
          {"tensor_sigma", p.tensor_sigma},
          {"theta", p.theta},
          {"epsilon_scale", p.epsilon_scale}};
}

SolverParams solver_params_from_json(const json& j, SolverParams p) {
  for (const auto& [key, value] : j.items()) {
    if (key == "lambda") p.lambda = value.get<double>();
    else if (key == "alpha0") p.alpha0 = value.get<double>();
    else if (key == "alpha1") p.alpha1 = value.get<double>();
    else if (key == "beta") p.beta = value.get<double>();
    else if (key == "eta") p.eta = value.get<double>();
    else if (key == "warp_iters") p.warp_iters = value.get<int>();
    else if (key == "pd_iters") p.pd_iters = value.get<int>();
    else if (key == "du_max") p.du_max = value.get<double>();
    else if (key == "levels") p.levels = value.get<int>();
    else if (key == "scale") p.scale = value.get<double>();
    else if (key == "min_width") p.min_width = value.get<int>();
    else if (key == "tensor_sigma") p.tensor_sigma = value.get<double>();
    else if (key == "theta") p.theta = value.get<double>();
    else if (key == "epsilon_scale") p.epsilon_scale = value.get<double>();
    else throw std::invalid_argument("unknown solver parameter '" + key + "'");
  }
  return p;
}

void write_dataset(const fs::path& dir, const Scene& scene, const StereoRig& rig) {
  ensure_dir(dir);
  const ScalarField left = render(scene, rig.cam0, RelativePose::identity());
  const ScalarField right = render(scene, rig.cam1, rig.pose);
  const GroundTruth gt = make_ground_truth(scene, rig);
  write_pgm(dir / "left.pgm", left, 16);
  write_pgm(dir / "right.pgm", right, 16);
  write_pfm(dir / "gt_depth.pfm", gt.depth0);
  write_pfm(dir / "gt_flow.pfm", gt.correspondence, &gt.covisible);
  write_pfm(dir / "gt_covisible.pfm", mask_to_field(gt.covisible));
  const json manifest = {{"rig", to_json(rig)},
                         {"scene", to_json(scene)},
                         {"files",
                          {{"left", "left.pgm"},
                           {"right", "right.pgm"},
                           {"depth", "gt_depth.pfm"},
                           {"flow", "gt_flow.pfm"},
                           {"covisible", "gt_covisible.pfm"}}}};
  write_json(dir / "manifest.json", manifest);
}

Dataset read_dataset(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw IoError("missing ground truth manifest " + manifest_path.string());
  const json manifest = read_json(manifest_path);
  const auto file = [&](const char* key) { return dir / manifest.at("files").at(key).get<std::string>(); };
  Dataset ds;
  ds.rig = rig_from_json(manifest);
  ds.left = load_image(file("left"));
  ds.right = load_image(file("right"));
  ds.truth.depth0 = read_pfm_scalar(file("depth"));
  ds.truth.correspondence = read_pfm_vector(file("flow")).field;
  ds.truth.covisible = field_to_mask(read_pfm_scalar(file("covisible")));
  return ds;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Variational fisheye stereo: render, fields, stereo, eval, sweep, walkthrough"};
  app.require_subcommand(1);

  std::string out, rig_path, scene_path, config_path, dataset, left, right, flow_path, error_map;
  std::string n_list = "2,5,10,50", du_list = "0.2";
  std::uint64_t seed = 1;
  int samples = 0;
  double noise = -1.0;
  double epsilon_scale = SolverParams{}.epsilon_scale;
  std::vector<double> taus;

  auto* render_cmd = app.add_subcommand("render", "Render a synthetic dataset with ground truth");
  render_cmd->add_option("-o,--out", out, "Output directory")->required();
  render_cmd->add_option("--rig", rig_path, "Rig JSON (default: built-in fisheye rig)");
  render_cmd->add_option("--scene", scene_path, "Scene JSON (default: plane + sphere)");
  render_cmd->add_option("--seed", seed, "Texture seed of the default scene");
  render_cmd->add_option("--samples", samples, "Sub-pixel rays per axis");
  render_cmd->add_option("--noise", noise, "Additive Gaussian noise sigma");

  auto* fields_cmd = app.add_subcommand("fields", "Write calibration and trajectory fields");
  fields_cmd->add_option("-o,--out", out, "Output directory")->required();
  fields_cmd->add_option("--rig", rig_path, "Rig JSON (default: built-in fisheye rig)");
  fields_cmd->add_option("--epsilon-scale", epsilon_scale, "Probe flow magnitude, px");

  SolverFlags stereo_flags;
  auto* stereo_cmd = app.add_subcommand("stereo", "Estimate disparity, warp, flow and depth");
  stereo_cmd->add_option("-o,--out", out, "Output directory")->required();
  stereo_cmd->add_option("--dataset", dataset, "Dataset directory written by `render`");
  stereo_cmd->add_option("--left", left, "Camera-0 image (.pgm/.png/.pfm)");
  stereo_cmd->add_option("--right", right, "Camera-1 image");
  stereo_cmd->add_option("--rig", rig_path, "Rig JSON (overrides the dataset rig)");
  stereo_cmd->add_option("--config", config_path, "JSON config with a \"solver\" object");
  stereo_flags.add(stereo_cmd);

  auto* eval_cmd = app.add_subcommand("eval", "Score a flow estimate against ground truth");
  eval_cmd->add_option("--flow", flow_path, "Estimated flow PFM (from `stereo`)")->required();
  eval_cmd->add_option("--dataset", dataset, "Dataset directory with ground truth")->required();
  eval_cmd->add_option("-o,--out", out, "Report JSON (default: stdout)");
  eval_cmd->add_option("--error-map", error_map, "Colour-coded error PNG");
  eval_cmd->add_option("--tau", taus, "Additional thresholds, px");

  SolverFlags sweep_flags;
  auto* sweep_cmd = app.add_subcommand("sweep", "Error and runtime over a grid of N x du_max");
  sweep_cmd->add_option("--dataset", dataset, "Dataset directory (default: render the default scene)");
  sweep_cmd->add_option("--n", n_list, "Comma-separated warp iteration counts");
  sweep_cmd->add_option("--du", du_list, "Comma-separated du_max values");
  sweep_cmd->add_option("--csv", out, "Output CSV (default: stdout)");
  sweep_cmd->add_option("--config", config_path, "JSON config with a \"solver\" object");
  sweep_cmd->add_option("--seed", seed, "Texture seed of the default scene");
  sweep_flags.add(sweep_cmd);

  auto* walk_cmd = app.add_subcommand("walkthrough", "Generate the worked example document");
  walk_cmd->add_option("-o,--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*render_cmd) return cmd_render(out, rig_path, scene_path, seed, samples, noise);
    if (*fields_cmd) return cmd_fields(rig_path, out, epsilon_scale);
    if (*stereo_cmd) {
      const json cfg = resolve_config(config_path, stereo_flags);
      return cmd_stereo(load_stereo_inputs(dataset, left, right, rig_path), cfg, out);
    }
    if (*eval_cmd) return cmd_eval(flow_path, dataset, out, error_map, taus);
    if (*sweep_cmd) {
      const json cfg = resolve_config(config_path, sweep_flags);
      return cmd_sweep(dataset, cfg, n_list, du_list, out, seed);
    }
    if (*walk_cmd) {
      const Walkthrough w = generate_walkthrough(out);
      std::cout << "wrote " << w.document.string() << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "fvs: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"fvs"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace fvs
