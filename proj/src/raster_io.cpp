#include "fvs/raster_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace fvs {

namespace {

static_assert(std::endian::native == std::endian::little, "PFM I/O assumes a little-endian host");

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path.string());
  return is;
}

void write_pfm_raw(const std::filesystem::path& path, int w, int h, int channels,
                   const std::vector<float>& rows_top_down) {
  auto os = open_out(path);
  os << (channels == 3 ? "PF" : "Pf") << "\n" << w << " " << h << "\n-1.0\n";
  const std::size_t row = static_cast<std::size_t>(w) * channels;
  // PFM stores the bottom row first.
  for (int y = h - 1; y >= 0; --y) {
    os.write(reinterpret_cast<const char*>(rows_top_down.data() + y * row),
             static_cast<std::streamsize>(row * sizeof(float)));
  }
  if (!os) throw IoError("write failed: " + path.string());
}

struct RawPfm {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> data;  // top-down rows
};

RawPfm read_pfm_raw(const std::filesystem::path& path) {
  auto is = open_in(path);
  std::string magic;
  RawPfm pfm;
  double scale = 0.0;
  is >> magic >> pfm.width >> pfm.height >> scale;
  if (!is || (magic != "PF" && magic != "Pf") || pfm.width <= 0 || pfm.height <= 0) {
    throw IoError("malformed PFM header: " + path.string());
  }
  if (scale >= 0.0) throw IoError("big-endian PFM not supported: " + path.string());
  is.get();  // single whitespace after the scale
  pfm.channels = magic == "PF" ? 3 : 1;
  const std::size_t row = static_cast<std::size_t>(pfm.width) * pfm.channels;
  pfm.data.resize(row * pfm.height);
  for (int y = pfm.height - 1; y >= 0; --y) {
    is.read(reinterpret_cast<char*>(pfm.data.data() + y * row),
            static_cast<std::streamsize>(row * sizeof(float)));
  }
  if (!is) throw IoError("truncated PFM: " + path.string());
  return pfm;
}

std::uint8_t quantise(double v) {
  if (!std::isfinite(v)) v = 0.0;
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

struct PngReadGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadGuard() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};
struct PngWriteGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriteGuard() { png_destroy_write_struct(&png, info ? &info : nullptr); }
};
struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

void write_png_rows(const std::filesystem::path& path, int w, int h, int color_type,
                    const std::vector<std::uint8_t>& bytes) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open for writing: " + path.string());
  PngWriteGuard g;
  g.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!g.png) throw IoError("png_create_write_struct failed");
  g.info = png_create_info_struct(g.png);
  if (!g.info) throw IoError("png_create_info_struct failed");
  if (setjmp(png_jmpbuf(g.png))) throw IoError("libpng error writing " + path.string());
  png_init_io(g.png, fp.get());
  png_set_IHDR(g.png, g.info, w, h, 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(g.png, g.info);
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  for (int y = 0; y < h; ++y) {
    png_write_row(g.png, const_cast<png_bytep>(bytes.data() + static_cast<std::size_t>(y) * w * channels));
  }
  png_write_end(g.png, nullptr);
}

}  // namespace

void write_pfm(const std::filesystem::path& path, const ScalarField& field) {
  std::vector<float> buf(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) buf[i] = static_cast<float>(field[i]);
  write_pfm_raw(path, field.width(), field.height(), 1, buf);
}

void write_pfm(const std::filesystem::path& path, const VectorField2& field, const Mask* validity) {
  if (validity) require_same_shape(field, *validity, "write_pfm");
  std::vector<float> buf(field.size() * 3);
  for (std::size_t i = 0; i < field.size(); ++i) {
    buf[3 * i + 0] = static_cast<float>(field[i].x());
    buf[3 * i + 1] = static_cast<float>(field[i].y());
    buf[3 * i + 2] = validity ? ((*validity)[i] ? 1.0f : 0.0f) : 0.0f;
  }
  write_pfm_raw(path, field.width(), field.height(), 3, buf);
}

ScalarField read_pfm_scalar(const std::filesystem::path& path) {
  const auto raw = read_pfm_raw(path);
  if (raw.channels != 1) throw IoError("expected single-channel PFM: " + path.string());
  ScalarField out(raw.width, raw.height);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = raw.data[i];
  return out;
}

VectorPfm read_pfm_vector(const std::filesystem::path& path) {
  const auto raw = read_pfm_raw(path);
  if (raw.channels != 3) throw IoError("expected three-channel PFM: " + path.string());
  VectorPfm out{VectorField2(raw.width, raw.height), Mask(raw.width, raw.height, 0)};
  for (std::size_t i = 0; i < out.field.size(); ++i) {
    out.field[i] = Vec2(raw.data[3 * i], raw.data[3 * i + 1]);
    out.aux[i] = raw.data[3 * i + 2] > 0.5f ? 1 : 0;
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, const ScalarField& image, int bits) {
  if (bits != 8 && bits != 16) throw std::invalid_argument("write_pgm: bits must be 8 or 16");
  auto os = open_out(path);
  os << "P5\n" << image.width() << " " << image.height() << "\n" << (bits == 8 ? 255 : 65535) << "\n";
  std::vector<std::uint8_t> bytes;
  bytes.reserve(image.size() * (bits / 8));
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (bits == 8) {
      bytes.push_back(quantise(image[i]));
    } else {
      const double v = std::isfinite(image[i]) ? std::clamp(image[i], 0.0, 1.0) : 0.0;
      const auto q = static_cast<std::uint16_t>(std::lround(v * 65535.0));
      bytes.push_back(static_cast<std::uint8_t>(q >> 8));
      bytes.push_back(static_cast<std::uint8_t>(q & 0xff));
    }
  }
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("write failed: " + path.string());
}

ScalarField read_pgm(const std::filesystem::path& path) {
  auto is = open_in(path);
  std::string magic;
  is >> magic;
  auto next_int = [&]() {
    // Skip comments between header tokens.
    while (is >> std::ws && is.peek() == '#') {
      std::string line;
      std::getline(is, line);
    }
    int v = 0;
    is >> v;
    return v;
  };
  if (magic != "P5") throw IoError("only binary PGM (P5) is supported: " + path.string());
  const int w = next_int();
  const int h = next_int();
  const int maxval = next_int();
  if (!is || w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) {
    throw IoError("malformed PGM header: " + path.string());
  }
  is.get();
  ScalarField out(w, h);
  if (maxval < 256) {
    std::vector<std::uint8_t> bytes(out.size());
    is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = bytes[i] / static_cast<double>(maxval);
  } else {
    std::vector<std::uint8_t> bytes(out.size() * 2);
    is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = ((bytes[2 * i] << 8) | bytes[2 * i + 1]) / static_cast<double>(maxval);
    }
  }
  if (!is) throw IoError("truncated PGM: " + path.string());
  return out;
}

void write_png(const std::filesystem::path& path, const ScalarField& image) {
  std::vector<std::uint8_t> bytes(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) bytes[i] = quantise(image[i]);
  write_png_rows(path, image.width(), image.height(), PNG_COLOR_TYPE_GRAY, bytes);
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  std::vector<std::uint8_t> bytes(image.size() * 3);
  for (std::size_t i = 0; i < image.size(); ++i) {
    std::memcpy(bytes.data() + 3 * i, image[i].data(), 3);
  }
  write_png_rows(path, image.width(), image.height(), PNG_COLOR_TYPE_RGB, bytes);
}

ScalarField read_png(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open for reading: " + path.string());
  PngReadGuard g;
  g.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!g.png) throw IoError("png_create_read_struct failed");
  g.info = png_create_info_struct(g.png);
  if (!g.info) throw IoError("png_create_info_struct failed");
  if (setjmp(png_jmpbuf(g.png))) throw IoError("libpng error reading " + path.string());
  png_init_io(g.png, fp.get());
  png_read_info(g.png, g.info);
  png_set_strip_16(g.png);
  png_set_strip_alpha(g.png);
  png_set_palette_to_rgb(g.png);
  png_set_expand_gray_1_2_4_to_8(g.png);
  png_read_update_info(g.png, g.info);
  const int w = static_cast<int>(png_get_image_width(g.png, g.info));
  const int h = static_cast<int>(png_get_image_height(g.png, g.info));
  const int channels = png_get_channels(g.png, g.info);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h * channels);
  for (int y = 0; y < h; ++y) {
    png_read_row(g.png, bytes.data() + static_cast<std::size_t>(y) * w * channels, nullptr);
  }
  ScalarField out(w, h);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint8_t* px = bytes.data() + i * channels;
    out[i] = channels >= 3 ? (0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]) / 255.0 : px[0] / 255.0;
  }
  return out;
}

ScalarField load_image(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".pfm") return read_pfm_scalar(path);
  throw IoError("unsupported image format: " + path.string());
}

}  // namespace fvs
