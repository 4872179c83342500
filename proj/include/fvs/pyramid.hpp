// Coarse-to-fine image pyramids over masked rasters.
#pragma once

#include "fvs/image.hpp"

#include <utility>
#include <vector>

namespace fvs {

struct PyramidLevel {
  ScalarField image;
  Mask mask;
  /// Width of this level divided by the finest width.
  double relative_scale = 1.0;
};

/// Levels ordered coarsest first; the last level is the input itself.
struct Pyramid {
  std::vector<PyramidLevel> levels;

  const PyramidLevel& finest() const { return levels.back(); }
  const PyramidLevel& coarsest() const { return levels.front(); }
};

/// Widths of the pyramid chain, finest first. Each coarser width is
/// ceil(finer / scale); the chain stops before a width drops below min_width.
std::vector<int> pyramid_widths(int width, int levels, double scale, int min_width);

/// Pixel-centre aligned dimensions of the level below (w, h) at `scale`.
std::pair<int, int> coarser_dims(int width, int height, double scale);

/// Area-weighted average that only draws on in-mask source pixels.
ScalarField downsample_area(const ScalarField& image, const Mask& mask, int width, int height);
/// Nearest-neighbour mask resampling.
Mask resample_mask_nearest(const Mask& mask, int width, int height);

Pyramid build_pyramid(const ScalarField& image, const Mask& mask, int levels, double scale,
                      int min_width);

struct UpsampledState {
  ScalarField disparity;
  VectorField2 warp;
};

/// Carries disparity and warp from a coarse level to the next finer one.
/// Masked bicubic resampling; values are multiplied by `scale` because
/// both quantities are measured in pixels of their own level.
UpsampledState upsample_state(const ScalarField& disparity, const VectorField2& warp,
                              const Mask& coarse_mask, const Mask& fine_mask, double scale);

}  // namespace fvs
