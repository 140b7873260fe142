#pragma once

#include "layoutkit/geom.hpp"

#include <filesystem>

namespace layoutkit::io {

/// EQMP float map: 16-byte header ("EQMP", u32 width, u32 height, u32 channels)
/// followed by width*height*channels little-endian float32 values, row-major,
/// channels interleaved.
void write_eqmp(const std::filesystem::path& path, const geom::Raster& raster);
[[nodiscard]] geom::Raster read_eqmp(const std::filesystem::path& path);

enum class PngDepth { u8 = 8, u16 = 16 };

/// Writes 1-channel (gray) or 3-channel (RGB) rasters; values in [0,1] are
/// clamped and quantized to the chosen depth.
void write_png(const std::filesystem::path& path, const geom::Raster& raster, PngDepth depth = PngDepth::u8);
/// Reads gray/RGB(A) PNG at 8 or 16 bits into [0,1] floats (alpha dropped).
[[nodiscard]] geom::Raster read_png(const std::filesystem::path& path);

}  // namespace layoutkit::io
