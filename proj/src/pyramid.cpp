#include "fvs/pyramid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fvs {

namespace {

struct Tap {
  int index;
  double weight;
};

// Fine-grid footprint of each coarse cell along one axis, as overlap weights.
std::vector<std::vector<Tap>> area_taps(int fine, int coarse) {
  const double ratio = static_cast<double>(fine) / coarse;
  std::vector<std::vector<Tap>> taps(coarse);
  for (int c = 0; c < coarse; ++c) {
    const double lo = c * ratio;
    const double hi = std::min<double>(fine, (c + 1) * ratio);
    for (int f = static_cast<int>(std::floor(lo)); f < fine && f < hi; ++f) {
      const double overlap = std::min<double>(f + 1, hi) - std::max<double>(f, lo);
      if (overlap > 1e-12) taps[c].push_back({f, overlap});
    }
  }
  return taps;
}

}  // namespace

std::vector<int> pyramid_widths(int width, int levels, double scale, int min_width) {
  if (levels < 1) throw std::invalid_argument("build_pyramid: level count must be >= 1");
  if (!(scale > 1.0)) throw std::invalid_argument("build_pyramid: scale must be > 1");
  std::vector<int> widths{width};
  while (static_cast<int>(widths.size()) < levels) {
    const int next = static_cast<int>(std::ceil(widths.back() / scale));
    if (next < min_width) break;
    widths.push_back(next);
  }
  return widths;
}

std::pair<int, int> coarser_dims(int width, int height, double scale) {
  return {static_cast<int>(std::ceil(width / scale)), static_cast<int>(std::ceil(height / scale))};
}

ScalarField downsample_area(const ScalarField& image, const Mask& mask, int width, int height) {
  require_same_shape(image, mask, "downsample_area");
  const auto tx = area_taps(image.width(), width);
  const auto ty = area_taps(image.height(), height);
  ScalarField out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double in_sum = 0.0, in_w = 0.0, all_sum = 0.0, all_w = 0.0;
      for (const auto& a : ty[y]) {
        for (const auto& b : tx[x]) {
          const double wgt = a.weight * b.weight;
          const double v = image(b.index, a.index);
          all_sum += wgt * v;
          all_w += wgt;
          if (mask(b.index, a.index)) {
            in_sum += wgt * v;
            in_w += wgt;
          }
        }
      }
      // Never blend masked and unmasked intensities.
      out(x, y) = in_w > 0.0 ? in_sum / in_w : (all_w > 0.0 ? all_sum / all_w : 0.0);
    }
  }
  return out;
}

Mask resample_mask_nearest(const Mask& mask, int width, int height) {
  Mask out(width, height, 0);
  const double rx = static_cast<double>(mask.width()) / width;
  const double ry = static_cast<double>(mask.height()) / height;
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(mask.height() - 1, static_cast<int>(std::floor((y + 0.5) * ry)));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(mask.width() - 1, static_cast<int>(std::floor((x + 0.5) * rx)));
      out(x, y) = mask(sx, sy) ? 1 : 0;
    }
  }
  return out;
}

Pyramid build_pyramid(const ScalarField& image, const Mask& mask, int levels, double scale,
                      int min_width) {
  require_same_shape(image, mask, "build_pyramid");
  const auto widths = pyramid_widths(image.width(), levels, scale, min_width);
  Pyramid pyr;
  pyr.levels.push_back({image, mask, 1.0});
  for (std::size_t i = 1; i < widths.size(); ++i) {
    const auto& finer = pyr.levels.back();
    const auto [w, h] = coarser_dims(finer.image.width(), finer.image.height(), scale);
    PyramidLevel lvl;
    lvl.image = downsample_area(finer.image, finer.mask, w, h);
    lvl.mask = resample_mask_nearest(finer.mask, w, h);
    lvl.relative_scale = static_cast<double>(w) / image.width();
    pyr.levels.push_back(std::move(lvl));
  }
  std::reverse(pyr.levels.begin(), pyr.levels.end());
  return pyr;
}

UpsampledState upsample_state(const ScalarField& disparity, const VectorField2& warp,
                              const Mask& coarse_mask, const Mask& fine_mask, double scale) {
  require_same_shape(disparity, warp, "upsample_state");
  require_same_shape(disparity, coarse_mask, "upsample_state");
  const int w = fine_mask.width();
  const int h = fine_mask.height();
  const double rx = static_cast<double>(disparity.width()) / w;
  const double ry = static_cast<double>(disparity.height()) / h;
  UpsampledState out{ScalarField(w, h), VectorField2(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!fine_mask(x, y)) continue;
      const Vec2 pos((x + 0.5) * rx - 0.5, (y + 0.5) * ry - 0.5);
      const auto u = sample_bicubic(disparity, pos, coarse_mask);
      const auto v = sample_bicubic(warp, pos, coarse_mask);
      if (u) out.disparity(x, y) = scale * *u;
      if (v) out.warp(x, y) = scale * *v;
    }
  }
  return out;
}

}  // namespace fvs
