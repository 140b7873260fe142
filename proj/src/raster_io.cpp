#include "layoutkit/raster_io.hpp"

#include "layoutkit/error.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace layoutkit::io {

namespace {

constexpr std::array<char, 4> kMagic{'E', 'Q', 'M', 'P'};

void put_u32(std::ostream& os, std::uint32_t v) {
  const std::array<unsigned char, 4> b{static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                       static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b.data()), 4);
}

std::uint32_t get_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

}  // namespace

void write_eqmp(const std::filesystem::path& path, const geom::Raster& raster) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(kMagic.data(), 4);
  put_u32(os, static_cast<std::uint32_t>(raster.width()));
  put_u32(os, static_cast<std::uint32_t>(raster.height()));
  put_u32(os, static_cast<std::uint32_t>(raster.channels()));
  std::vector<unsigned char> buf(raster.size() * 4);
  const auto data = raster.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(data[i]);
    buf[4 * i + 0] = static_cast<unsigned char>(bits);
    buf[4 * i + 1] = static_cast<unsigned char>(bits >> 8);
    buf[4 * i + 2] = static_cast<unsigned char>(bits >> 16);
    buf[4 * i + 3] = static_cast<unsigned char>(bits >> 24);
  }
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!os) throw IoError("write failed: " + path.string());
}

geom::Raster read_eqmp(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::array<unsigned char, 16> header{};
  is.read(reinterpret_cast<char*>(header.data()), 16);
  if (is.gcount() != 16 || std::memcmp(header.data(), kMagic.data(), 4) != 0) {
    throw FormatError(path.string() + ": not an EQMP file");
  }
  const std::uint32_t w = get_u32(header.data() + 4);
  const std::uint32_t h = get_u32(header.data() + 8);
  const std::uint32_t c = get_u32(header.data() + 12);
  if (w == 0 || h == 0 || c == 0 || w > (1u << 16) || h > (1u << 16) || c > 64) {
    throw FormatError(path.string() + ": implausible EQMP dimensions");
  }
  const std::size_t n = static_cast<std::size_t>(w) * h * c;
  std::vector<unsigned char> buf(n * 4);
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(is.gcount()) != buf.size()) throw FormatError(path.string() + ": truncated EQMP data");
  std::vector<float> data(n);
  for (std::size_t i = 0; i < n; ++i) data[i] = std::bit_cast<float>(get_u32(buf.data() + 4 * i));
  return geom::Raster(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c), std::move(data));
}

void write_png(const std::filesystem::path& path, const geom::Raster& raster, PngDepth depth) {
  if (raster.channels() != 1 && raster.channels() != 3) throw DomainError("PNG output needs 1 or 3 channels");
  FilePtr fp = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialization failed");
  }
  const int bits = static_cast<int>(depth);
  const int bytes = bits / 8;
  const int w = raster.width();
  const int h = raster.height();
  const int nc = raster.channels();
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * nc * bytes);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encoding failed: " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), bits,
               nc == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const double maxv = depth == PngDepth::u8 ? 255.0 : 65535.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < nc; ++c) {
        const double f = std::clamp(static_cast<double>(raster.at(x, y, c)), 0.0, 1.0);
        const auto q = static_cast<unsigned>(std::lround(f * maxv));
        const std::size_t i = (static_cast<std::size_t>(x) * nc + c) * bytes;
        if (bytes == 1) {
          row[i] = static_cast<unsigned char>(q);
        } else {  // PNG stores 16-bit samples big-endian
          row[i] = static_cast<unsigned char>(q >> 8);
          row[i + 1] = static_cast<unsigned char>(q & 0xff);
        }
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

geom::Raster read_png(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("input not found: " + path.string());
  FilePtr fp = open_file(path, "rb");
  std::array<unsigned char, 8> sig{};
  if (std::fread(sig.data(), 1, 8, fp.get()) != 8 || png_sig_cmp(sig.data(), 0, 8) != 0) {
    throw FormatError(path.string() + ": not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialization failed");
  }
  std::vector<unsigned char> pixels;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("PNG decoding failed: " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  int bits = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && bits < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  if (bits == 16) png_set_swap(png);  // native little-endian 16-bit samples
  png_read_update_info(png, info);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const int nc = png_get_channels(png, info);
  bits = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  pixels.resize(stride * h);
  rows.resize(h);
  for (int y = 0; y < h; ++y) rows[y] = pixels.data() + stride * y;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  geom::Raster out(w, h, nc);
  const double maxv = bits == 16 ? 65535.0 : 255.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < nc; ++c) {
        const std::size_t i = static_cast<std::size_t>(x) * nc + c;
        unsigned q = 0;
        if (bits == 16) {
          std::uint16_t s;
          std::memcpy(&s, rows[y] + 2 * i, 2);
          q = s;
        } else {
          q = rows[y][i];
        }
        out.at(x, y, c) = static_cast<float>(q / maxv);
      }
    }
  }
  return out;
}

}  // namespace layoutkit::io
