#include "layoutkit/formats.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace layoutkit::io {

using nlohmann::json;
using solver::ManhattanLayout;

namespace {

json point(const geom::Vec2& p) { return json::array({p.x(), p.y()}); }

geom::Vec2 to_point(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw FormatError("expected an [x, z] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

double number(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) throw FormatError(std::string("missing number \"") + key + "\"");
  return it->get<double>();
}

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

std::string layout_to_json(const ManhattanLayout& L) {
  json j;
  j["vertices"] = json::array();
  for (const auto& v : L.vertices) j["vertices"].push_back(point(v));
  j["camera"] = point(L.camera);
  j["camera_height"] = L.camera_height;
  j["floor"] = L.floor;
  j["ceiling"] = L.ceiling;
  return j.dump();
}

ManhattanLayout layout_from_json(std::string_view text) {
  const json j = parse(text);
  if (!j.is_object()) throw FormatError("layout must be a JSON object");
  const auto verts = j.find("vertices");
  if (verts == j.end() || !verts->is_array()) throw FormatError("missing array \"vertices\"");
  const auto cam = j.find("camera");
  if (cam == j.end()) throw FormatError("missing \"camera\"");
  ManhattanLayout L;
  for (const auto& v : *verts) L.vertices.push_back(to_point(v));
  L.camera = to_point(*cam);
  L.camera_height = number(j, "camera_height");
  L.floor = number(j, "floor");
  L.ceiling = number(j, "ceiling");
  return L;
}

std::string corners_to_json(const maps::CornerSet& set) {
  json j;
  j["width"] = set.width;
  j["corners"] = json::array();
  for (const auto& c : set.corners) {
    j["corners"].push_back({{"u", c.u}, {"v_top", c.v_top}, {"v_bot", c.v_bot}, {"conf", c.conf}});
  }
  return j.dump();
}

maps::CornerSet corners_from_json(std::string_view text) {
  const json j = parse(text);
  if (!j.is_object()) throw FormatError("corner set must be a JSON object");
  const auto list = j.find("corners");
  if (list == j.end() || !list->is_array()) throw FormatError("missing array \"corners\"");
  maps::CornerSet set;
  if (j.contains("width")) set.width = static_cast<int>(number(j, "width"));
  for (const auto& c : *list) {
    if (!c.is_object()) throw FormatError("corner must be an object");
    maps::Corner k;
    k.u = number(c, "u");
    k.v_top = number(c, "v_top");
    k.v_bot = number(c, "v_bot");
    k.conf = c.contains("conf") ? number(c, "conf") : 0.0;
    set.corners.push_back(k);
  }
  return set;
}

std::string metrics_record(std::string_view id, const eval::LayoutMetrics& m) {
  json j;
  j["id"] = std::string(id);
  j["iou3d"] = m.iou3d;
  j["corner_error"] = m.corner_error;
  j["pixel_error"] = m.pixel_error;
  return j.dump();
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace layoutkit::io
