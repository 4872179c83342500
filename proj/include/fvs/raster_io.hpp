// File formats for rasters.
//
//   PFM  little-endian portable float map. Scalar fields as "Pf", vector
//        fields as "PF" with channels (x, y, aux). aux carries a validity
//        flag when a mask is supplied and is zero otherwise.
//   PGM  binary 8- or 16-bit greyscale (P5).
//   PNG  8-bit greyscale or RGB via libpng.
//
// Loaded intensities are normalised to [0, 1]; colour input is converted
// to luminance (Rec. 601 weights).
#pragma once

#include "fvs/image.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>

namespace fvs {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_pfm(const std::filesystem::path& path, const ScalarField& field);
void write_pfm(const std::filesystem::path& path, const VectorField2& field,
               const Mask* validity = nullptr);

ScalarField read_pfm_scalar(const std::filesystem::path& path);

struct VectorPfm {
  VectorField2 field;
  /// Third channel interpreted as a flag (> 0.5).
  Mask aux;
};
VectorPfm read_pfm_vector(const std::filesystem::path& path);

/// Clamps to [0, 1] and quantises to 8 or 16 bits (big-endian samples).
void write_pgm(const std::filesystem::path& path, const ScalarField& image, int bits = 8);
ScalarField read_pgm(const std::filesystem::path& path);

using Rgb = std::array<std::uint8_t, 3>;
using RgbImage = Field<Rgb>;

void write_png(const std::filesystem::path& path, const ScalarField& image);
void write_png(const std::filesystem::path& path, const RgbImage& image);
ScalarField read_png(const std::filesystem::path& path);

/// Dispatches on the extension (.pgm / .png / .pfm).
ScalarField load_image(const std::filesystem::path& path);

}  // namespace fvs
