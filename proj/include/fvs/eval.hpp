// Error metrics against rendered ground truth.
//
// Correspondence error is the distance between the estimated and the true
// position of a pixel in image 1. All statistics run over covisible,
// in-mask pixels only.
#pragma once

#include "fvs/camera.hpp"
#include "fvs/image.hpp"
#include "fvs/stereo.hpp"
#include "fvs/raster_io.hpp"
#include "fvs/synth.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <optional>

namespace fvs {

/// |w_est(x) - w_gt(x)| where gt.covisible, mask and (if given) est_valid hold.
MaskedScalar correspondence_error(const VectorField2& w_est, const GroundTruth& gt, const Mask& mask,
                                  const Mask* est_valid = nullptr);

/// 100 * |{err > tau}| / |valid|. nullopt when nothing is valid.
std::optional<double> erroneous_percentage(const ScalarField& err, double tau, const Mask& valid);

/// |depth_est - depth_gt| from triangulated correspondences.
MaskedScalar depth_error_map(const VectorField2& flow, const Mask& flow_valid, const StereoRig& rig,
                             const GroundTruth& gt);

inline constexpr std::array<double, 3> kReportThresholds{1.0, 3.0, 5.0};

struct ErrorReport {
  std::array<double, 3> percent_over{};  // for kReportThresholds
  double mean_error = 0.0;               // px
  double median_error = 0.0;             // px
  double mean_depth_error = 0.0;         // m, over pixels with a depth estimate
  std::size_t valid_count = 0;
  std::size_t depth_count = 0;

  double percent_over_tau(double tau) const;
};

ErrorReport make_report(const MaskedScalar& corr_error, const MaskedScalar& depth_error);
nlohmann::json to_json(const ErrorReport& report);

// Colour ramp for error maps. Bin i covers [kErrorBreaks[i], kErrorBreaks[i+1]).
inline constexpr std::array<double, 6> kErrorBreaks{0.0, 0.19, 0.75, 3.0, 24.0, 48.0};
inline constexpr std::array<Rgb, 6> kErrorColors{{{49, 54, 149},
                                                 {116, 173, 209},
                                                 {224, 243, 248},
                                                 {253, 174, 97},
                                                 {215, 48, 39},
                                                 {165, 0, 38}}};

Rgb error_color(double err);
/// Invalid pixels are black.
RgbImage colorize_error(const MaskedScalar& err);

/// Linear grey ramp from lo..hi; invalid pixels black. lo/hi default to the
/// valid range.
RgbImage colorize_scalar(const MaskedScalar& values, std::optional<double> lo = std::nullopt,
                         std::optional<double> hi = std::nullopt);

}  // namespace fvs
