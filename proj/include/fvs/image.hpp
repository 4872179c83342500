// Raster containers, masked interpolation, and the discrete differential
// operators shared by every stage of the stereo pipeline.
//
// Pixel centres sit on integer coordinates: pixel (x, y) covers the square
// [x - 0.5, x + 0.5) x [y - 0.5, y + 0.5).
#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fvs {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec4 = Eigen::Vector4d;

template <class T>
inline T zero_value() {
  return T{};
}
template <>
inline Vec2 zero_value<Vec2>() {
  return Vec2::Zero();
}
template <>
inline Vec4 zero_value<Vec4>() {
  return Vec4::Zero();
}

/// Row-major W x H grid. Storage is owned and contiguous.
template <class T>
class Field {
 public:
  Field() = default;
  Field(int width, int height) : Field(width, height, zero_value<T>()) {}
  Field(int width, int height, const T& fill)
      : width_(width), height_(height) {
    if (width < 0 || height < 0) {
      throw std::invalid_argument("Field: negative dimensions");
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool in_bounds(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  void fill(const T& value) { std::fill(data_.begin(), data_.end(), value); }

  template <class U>
  bool same_shape(const Field<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Field& other) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using ScalarField = Field<double>;
using VectorField2 = Field<Vec2>;

/// Symmetric 2x2 tensor [[a, b], [b, c]].
struct SymTensor {
  double a = 1.0;
  double b = 0.0;
  double c = 1.0;

  Vec2 apply(const Vec2& v) const { return {a * v.x() + b * v.y(), b * v.x() + c * v.y()}; }
  bool operator==(const SymTensor&) const = default;
};
using SymTensorField = Field<SymTensor>;

/// Boolean validity raster; 1 = pixel participates, 0 = rejected.
using Mask = Field<std::uint8_t>;

Mask full_mask(int width, int height);
Mask circular_mask(int width, int height, const Vec2& center, double radius);
std::size_t count_valid(const Mask& mask);
Mask mask_and(const Mask& a, const Mask& b);

template <class T, class U>
void require_same_shape(const Field<T>& a, const Field<U>& b, const char* what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}

// -- Interpolation ---------------------------------------------------------

/// Masked bicubic (Keys, a = -0.5) sample at a continuous position.
///
/// All 16 taps valid: bicubic. Otherwise bilinear renormalised over the
/// valid taps of the 2x2 cell, then the nearest valid tap of the 4x4
/// stencil. Returns nullopt if no tap is valid (out of mask or bounds).
std::optional<double> sample_bicubic(const ScalarField& field, const Vec2& pos, const Mask& mask);
std::optional<Vec2> sample_bicubic(const VectorField2& field, const Vec2& pos, const Mask& mask);

// -- Differential operators -------------------------------------------------
//
// gradient: forward differences, a component is zero unless both pixels of
// the difference are inside the mask (Neumann across the mask and the image
// border). divergence: the exact negative adjoint, i.e. backward differences
// with the dual field treated as zero on every excluded edge (Dirichlet).

VectorField2 gradient(const ScalarField& field, const Mask& mask);
ScalarField divergence(const VectorField2& field, const Mask& mask);

/// Normalised Gaussian blur that only averages in-mask pixels.
ScalarField gaussian_blur(const ScalarField& field, const Mask& mask, double sigma);

/// Zeroes every pixel outside the mask.
template <class T>
Field<T> masked(Field<T> field, const Mask& mask) {
  require_same_shape(field, mask, "masked");
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (!mask[i]) field[i] = zero_value<T>();
  }
  return field;
}

}  // namespace fvs
