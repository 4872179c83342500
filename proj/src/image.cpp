#include "fvs/image.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace fvs {

Mask full_mask(int width, int height) { return Mask(width, height, 1); }

Mask circular_mask(int width, int height, const Vec2& center, double radius) {
  Mask mask(width, height, 0);
  const double r2 = radius * radius;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double dx = x - center.x();
      const double dy = y - center.y();
      mask(x, y) = (dx * dx + dy * dy <= r2) ? 1 : 0;
    }
  }
  return mask;
}

std::size_t count_valid(const Mask& mask) {
  std::size_t n = 0;
  for (auto v : mask.data()) n += v ? 1 : 0;
  return n;
}

Mask mask_and(const Mask& a, const Mask& b) {
  require_same_shape(a, b, "mask_and");
  Mask out(a.width(), a.height(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] && b[i]) ? 1 : 0;
  return out;
}

namespace {

// Keys cubic convolution kernel weights for offsets -1, 0, 1, 2.
std::array<double, 4> cubic_weights(double t) {
  constexpr double a = -0.5;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return {
      a * t3 - 2.0 * a * t2 + a * t,
      (a + 2.0) * t3 - (a + 3.0) * t2 + 1.0,
      -(a + 2.0) * t3 + (2.0 * a + 3.0) * t2 - a * t,
      -a * t3 + a * t2,
  };
}

template <class T>
std::optional<T> sample_impl(const Field<T>& field, const Vec2& pos, const Mask& mask) {
  if (!std::isfinite(pos.x()) || !std::isfinite(pos.y())) return std::nullopt;
  const double fx = std::floor(pos.x());
  const double fy = std::floor(pos.y());
  // Beyond this the stencil cannot touch the raster.
  if (fx < -3.0 || fy < -3.0 || fx > field.width() + 2.0 || fy > field.height() + 2.0) {
    return std::nullopt;
  }
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const double tx = pos.x() - fx;
  const double ty = pos.y() - fy;

  auto valid = [&](int x, int y) { return field.in_bounds(x, y) && mask(x, y) != 0; };

  bool all_valid = true;
  for (int j = -1; j <= 2 && all_valid; ++j) {
    for (int i = -1; i <= 2; ++i) {
      if (!valid(x0 + i, y0 + j)) {
        all_valid = false;
        break;
      }
    }
  }

  if (all_valid) {
    const auto wx = cubic_weights(tx);
    const auto wy = cubic_weights(ty);
    T acc = zero_value<T>();
    for (int j = 0; j < 4; ++j) {
      T row = zero_value<T>();
      for (int i = 0; i < 4; ++i) row += wx[i] * field(x0 + i - 1, y0 + j - 1);
      acc += wy[j] * row;
    }
    return acc;
  }

  // Bilinear over the valid corners of the enclosing cell.
  const std::array<double, 4> bw = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
  const std::array<int, 4> bx = {x0, x0 + 1, x0, x0 + 1};
  const std::array<int, 4> by = {y0, y0, y0 + 1, y0 + 1};
  T acc = zero_value<T>();
  double wsum = 0.0;
  for (int k = 0; k < 4; ++k) {
    if (bw[k] > 0.0 && valid(bx[k], by[k])) {
      acc += bw[k] * field(bx[k], by[k]);
      wsum += bw[k];
    }
  }
  if (wsum > 1e-12) return T(acc / wsum);

  // Nearest valid tap of the 4x4 stencil.
  double best = std::numeric_limits<double>::infinity();
  std::optional<T> nearest;
  for (int j = -1; j <= 2; ++j) {
    for (int i = -1; i <= 2; ++i) {
      const int x = x0 + i;
      const int y = y0 + j;
      if (!valid(x, y)) continue;
      const double d = (Vec2(x, y) - pos).squaredNorm();
      if (d < best) {
        best = d;
        nearest = field(x, y);
      }
    }
  }
  return nearest;
}

}  // namespace

std::optional<double> sample_bicubic(const ScalarField& field, const Vec2& pos, const Mask& mask) {
  require_same_shape(field, mask, "sample_bicubic");
  return sample_impl(field, pos, mask);
}

std::optional<Vec2> sample_bicubic(const VectorField2& field, const Vec2& pos, const Mask& mask) {
  require_same_shape(field, mask, "sample_bicubic");
  return sample_impl(field, pos, mask);
}

VectorField2 gradient(const ScalarField& field, const Mask& mask) {
  require_same_shape(field, mask, "gradient");
  const int w = field.width();
  const int h = field.height();
  VectorField2 out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      Vec2 g = Vec2::Zero();
      if (x + 1 < w && mask(x + 1, y)) g.x() = field(x + 1, y) - field(x, y);
      if (y + 1 < h && mask(x, y + 1)) g.y() = field(x, y + 1) - field(x, y);
      out(x, y) = g;
    }
  }
  return out;
}

ScalarField divergence(const VectorField2& field, const Mask& mask) {
  require_same_shape(field, mask, "divergence");
  const int w = field.width();
  const int h = field.height();
  ScalarField out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      double d = 0.0;
      if (x + 1 < w && mask(x + 1, y)) d += field(x, y).x();
      if (x > 0 && mask(x - 1, y)) d -= field(x - 1, y).x();
      if (y + 1 < h && mask(x, y + 1)) d += field(x, y).y();
      if (y > 0 && mask(x, y - 1)) d -= field(x, y - 1).y();
      out(x, y) = d;
    }
  }
  return out;
}

ScalarField gaussian_blur(const ScalarField& field, const Mask& mask, double sigma) {
  require_same_shape(field, mask, "gaussian_blur");
  if (sigma <= 0.0) return field;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
  }
  const int w = field.width();
  const int h = field.height();

  // Separable: carry (weighted value, weight) so normalisation stays masked.
  ScalarField num(w, h);
  ScalarField den(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      double ws = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int xx = x + k;
        if (xx < 0 || xx >= w || !mask(xx, y)) continue;
        s += kernel[k + radius] * field(xx, y);
        ws += kernel[k + radius];
      }
      num(x, y) = s;
      den(x, y) = ws;
    }
  }
  ScalarField out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) {
        out(x, y) = field(x, y);
        continue;
      }
      double s = 0.0;
      double ws = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int yy = y + k;
        if (yy < 0 || yy >= h) continue;
        s += kernel[k + radius] * num(x, yy);
        ws += kernel[k + radius] * den(x, yy);
      }
      out(x, y) = ws > 0.0 ? s / ws : field(x, y);
    }
  }
  return out;
}

}  // namespace fvs
