#include "fvs/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fvs {

MaskedScalar correspondence_error(const VectorField2& w_est, const GroundTruth& gt, const Mask& mask,
                                  const Mask* est_valid) {
  require_same_shape(w_est, gt.correspondence, "correspondence_error");
  require_same_shape(w_est, mask, "correspondence_error");
  if (est_valid) require_same_shape(w_est, *est_valid, "correspondence_error");
  MaskedScalar out{ScalarField(w_est.width(), w_est.height()), Mask(w_est.width(), w_est.height(), 0)};
  for (std::size_t i = 0; i < w_est.size(); ++i) {
    if (!mask[i] || !gt.covisible[i] || (est_valid && !(*est_valid)[i])) continue;
    out.values[i] = (w_est[i] - gt.correspondence[i]).norm();
    out.valid[i] = 1;
  }
  return out;
}

std::optional<double> erroneous_percentage(const ScalarField& err, double tau, const Mask& valid) {
  if (!(tau > 0.0)) throw std::invalid_argument("erroneous_percentage: tau must be > 0");
  require_same_shape(err, valid, "erroneous_percentage");
  std::size_t total = 0, bad = 0;
  for (std::size_t i = 0; i < err.size(); ++i) {
    if (!valid[i]) continue;
    ++total;
    if (err[i] > tau) ++bad;
  }
  if (total == 0) return std::nullopt;
  return 100.0 * static_cast<double>(bad) / static_cast<double>(total);
}

MaskedScalar depth_error_map(const VectorField2& flow, const Mask& flow_valid, const StereoRig& rig,
                             const GroundTruth& gt) {
  const MaskedScalar depth = depth_from_flow(rig, flow, flow_valid);
  MaskedScalar out{ScalarField(flow.width(), flow.height()), Mask(flow.width(), flow.height(), 0)};
  for (std::size_t i = 0; i < flow.size(); ++i) {
    if (!depth.valid[i] || !gt.covisible[i]) continue;
    out.values[i] = std::abs(depth.values[i] - gt.depth0[i]);
    out.valid[i] = 1;
  }
  return out;
}

double ErrorReport::percent_over_tau(double tau) const {
  for (std::size_t i = 0; i < kReportThresholds.size(); ++i) {
    if (kReportThresholds[i] == tau) return percent_over[i];
  }
  throw std::invalid_argument("no report entry for tau " + std::to_string(tau));
}

ErrorReport make_report(const MaskedScalar& corr_error, const MaskedScalar& depth_error) {
  ErrorReport r;
  std::vector<double> errs;
  for (std::size_t i = 0; i < corr_error.values.size(); ++i) {
    if (corr_error.valid[i]) errs.push_back(corr_error.values[i]);
  }
  r.valid_count = errs.size();
  if (!errs.empty()) {
    for (std::size_t t = 0; t < kReportThresholds.size(); ++t) {
      r.percent_over[t] = *erroneous_percentage(corr_error.values, kReportThresholds[t], corr_error.valid);
    }
    double sum = 0.0;
    for (double e : errs) sum += e;
    r.mean_error = sum / static_cast<double>(errs.size());
    const auto mid = errs.begin() + static_cast<std::ptrdiff_t>(errs.size() / 2);
    std::nth_element(errs.begin(), mid, errs.end());
    r.median_error = *mid;
    if (errs.size() % 2 == 0) {
      r.median_error = 0.5 * (r.median_error + *std::max_element(errs.begin(), mid));
    }
  }
  double dsum = 0.0;
  for (std::size_t i = 0; i < depth_error.values.size(); ++i) {
    if (!depth_error.valid[i]) continue;
    dsum += depth_error.values[i];
    ++r.depth_count;
  }
  if (r.depth_count > 0) r.mean_depth_error = dsum / static_cast<double>(r.depth_count);
  return r;
}

nlohmann::json to_json(const ErrorReport& r) {
  nlohmann::json j;
  for (std::size_t t = 0; t < kReportThresholds.size(); ++t) {
    j["tau" + std::to_string(static_cast<int>(kReportThresholds[t]))] = r.percent_over[t];
  }
  j["mean_error_px"] = r.mean_error;
  j["median_error_px"] = r.median_error;
  j["mean_abs_depth_error_m"] = r.mean_depth_error;
  j["valid_pixels"] = r.valid_count;
  j["depth_pixels"] = r.depth_count;
  return j;
}

Rgb error_color(double err) {
  std::size_t bin = 0;
  for (std::size_t i = 1; i < kErrorBreaks.size(); ++i) {
    if (err >= kErrorBreaks[i]) bin = i;
  }
  return kErrorColors[bin];
}

RgbImage colorize_error(const MaskedScalar& err) {
  RgbImage img(err.values.width(), err.values.height(), Rgb{0, 0, 0});
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (err.valid[i]) img[i] = error_color(err.values[i]);
  }
  return img;
}

RgbImage colorize_scalar(const MaskedScalar& values, std::optional<double> lo, std::optional<double> hi) {
  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -vmin;
  for (std::size_t i = 0; i < values.values.size(); ++i) {
    if (!values.valid[i]) continue;
    vmin = std::min(vmin, values.values[i]);
    vmax = std::max(vmax, values.values[i]);
  }
  const double a = lo.value_or(vmin);
  const double b = hi.value_or(vmax);
  const double span = b > a ? b - a : 1.0;
  RgbImage img(values.values.width(), values.values.height(), Rgb{0, 0, 0});
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (!values.valid[i]) continue;
    const double t = std::clamp((values.values[i] - a) / span, 0.0, 1.0);
    const auto g = static_cast<std::uint8_t>(std::lround(30.0 + 225.0 * t));
    img[i] = Rgb{g, g, g};
  }
  return img;
}

}  // namespace fvs
