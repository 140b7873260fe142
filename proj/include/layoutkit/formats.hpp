#pragma once

// JSON interchange formats. Every document validates against the schemas in docs/.

#include "layoutkit/eval.hpp"
#include "layoutkit/layout.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace layoutkit::io {

/// {"vertices":[[x,z],..],"camera":[x,z],"camera_height":h,"floor":y0,"ceiling":y1}
[[nodiscard]] std::string layout_to_json(const solver::ManhattanLayout& layout);
/// FormatError on malformed documents; the layout itself is not validated.
[[nodiscard]] solver::ManhattanLayout layout_from_json(std::string_view text);

/// {"width":W,"corners":[{"u":..,"v_top":..,"v_bot":..,"conf":..}]}
[[nodiscard]] std::string corners_to_json(const maps::CornerSet& corners);
[[nodiscard]] maps::CornerSet corners_from_json(std::string_view text);

/// One JSONL line: {"id":..,"iou3d":..,"corner_error":..,"pixel_error":..}
[[nodiscard]] std::string metrics_record(std::string_view id, const eval::LayoutMetrics& m);

[[nodiscard]] std::string read_text(const std::filesystem::path& path);
/// Writes text plus a trailing newline.
void write_text(const std::filesystem::path& path, std::string_view text);

inline void write_layout(const std::filesystem::path& path, const solver::ManhattanLayout& layout) {
  write_text(path, layout_to_json(layout));
}
[[nodiscard]] inline solver::ManhattanLayout read_layout(const std::filesystem::path& path) {
  return layout_from_json(read_text(path));
}

}  // namespace layoutkit::io
