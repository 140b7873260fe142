#include "layoutkit/maps.hpp"

#include "layoutkit/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace layoutkit::maps {

using geom::Raster;
using geom::Vec3;

namespace {

int wrap(int i, int n) {
  const int r = i % n;
  return r < 0 ? r + n : r;
}

void check_unit_range(const Raster& r, const char* what) {
  for (float f : r.data()) {
    if (!(f >= 0.0f && f <= 1.0f)) throw DomainError(std::string(what) + " values must lie in [0, 1]");
  }
}

void stamp_disk(Raster& r, int channel, double pu, double pv, double radius) {
  const int w = r.width();
  const int h = r.height();
  const int y0 = std::max(0, static_cast<int>(std::ceil(pv - radius)));
  const int y1 = std::min(h - 1, static_cast<int>(std::floor(pv + radius)));
  const int x0 = static_cast<int>(std::ceil(pu - radius));
  const int x1 = static_cast<int>(std::floor(pu + radius));
  const double r2 = radius * radius;
  for (int y = y0; y <= y1; ++y) {
    const double dy = y - pv;
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - pu;
      if (dx * dx + dy * dy <= r2) r.at(wrap(x, w), y, channel) = 1.0f;
    }
  }
}

// Samples the projection of a 3D segment densely enough that consecutive
// samples are well under a pixel apart, including near the poles.
template <class F>
void for_each_projected_sample(const Vec3& a, const Vec3& b, const Vec3& cam, int width, F&& f) {
  const Vec3 da = a - cam;
  const Vec3 db = b - cam;
  const Vec3 dm = 0.5 * (a + b) - cam;
  const double angle = std::atan2(da.cross(db).norm(), da.dot(db));
  double cos_min = 1.0;
  for (const Vec3& d : {da, db, dm}) cos_min = std::min(cos_min, std::hypot(d.x(), d.z()) / d.norm());
  const double px = angle * width / geom::kTwoPi / std::max(cos_min, 0.05);
  const int n = static_cast<int>(std::ceil(4.0 * px)) + 2;
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    f(geom::dir_to_pix(Vec3(da + t * (db - da)), width));
  }
}

std::vector<double> gaussian_taps(double sigma, int taps) {
  std::vector<double> k(taps);
  const int lo = -taps / 2;
  double sum = 0.0;
  for (int i = 0; i < taps; ++i) {
    const double t = lo + i;
    k[i] = std::exp(-t * t / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (auto& x : k) x /= sum;
  return k;
}

struct Peak {
  double pos = 0.0;    // refined, continuous index
  int index = 0;       // integer index inside the peak run
  double value = 0.0;  // value at `index`
};

// Plateau-aware local maxima. A run of equal values is a peak when it is
// strictly above its neighbours on both sides; its position is the run centre,
// refined by a parabola when the run is a single sample.
std::vector<Peak> find_peaks(std::span<const double> values, bool circular) {
  const int n = static_cast<int>(values.size());
  std::vector<Peak> peaks;
  if (n < 3) return peaks;
  auto at = [&](int i) { return values[wrap(i, n)]; };
  int start = 0;
  if (circular) {
    // Begin scanning at a run boundary so no run wraps past the start.
    start = static_cast<int>(std::min_element(values.begin(), values.end()) - values.begin());
    if (at(start) == *std::max_element(values.begin(), values.end())) return peaks;
    while (at(start - 1) == at(start)) start = wrap(start + 1, n);
  }
  const double lo_sentinel = -std::numeric_limits<double>::infinity();
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && at(start + j + 1) == at(start + i)) ++j;
    const double v = at(start + i);
    const double before = (circular || i > 0) ? at(start + i - 1) : lo_sentinel;
    const double after = (circular || j < n - 1) ? at(start + j + 1) : lo_sentinel;
    if (v > before && v > after) {
      Peak p;
      p.value = v;
      if (i == j) {
        double offset = 0.0;
        const double denom = before - 2.0 * v + after;
        if (std::isfinite(before) && std::isfinite(after) && denom < 0.0) {
          offset = std::clamp(0.5 * (before - after) / denom, -0.5, 0.5);
        }
        p.index = start + i;
        p.pos = p.index + offset;
      } else {
        p.index = start + (i + j) / 2;
        p.pos = start + 0.5 * (i + j);
      }
      if (circular) {
        p.index = wrap(p.index, n);
        p.pos = std::fmod(p.pos, static_cast<double>(n));
        if (p.pos < 0.0) p.pos += n;
      }
      peaks.push_back(p);
    }
    i = j + 1;
  }
  return peaks;
}

double window_mean(const EquirectImage& m, double u, double v, int half) {
  const int w = m.width();
  const int h = m.height();
  const int cu = static_cast<int>(std::lround(u));
  const int cv = static_cast<int>(std::lround(v));
  double sum = 0.0;
  int count = 0;
  for (int dv = -half; dv <= half; ++dv) {
    const int y = std::clamp(cv + dv, 0, h - 1);
    for (int du = -half; du <= half; ++du) {
      sum += m.at(wrap(cu + du, w), y);
      ++count;
    }
  }
  return sum / count;
}

}  // namespace

ProbMaps::ProbMaps(EquirectImage boundary, EquirectImage corner)
    : boundary_(std::move(boundary)), corner_(std::move(corner)) {
  if (boundary_.channels() != 3) throw DomainError("boundary map must have 3 channels");
  if (corner_.channels() != 1) throw DomainError("corner map must have 1 channel");
  if (boundary_.width() != corner_.width()) throw DomainError("boundary and corner maps differ in size");
  check_unit_range(boundary_, "boundary map");
  check_unit_range(corner_, "corner map");
}

ProbMaps ProbMaps::uniform(int width, float fill) {
  return {EquirectImage(width, 3, fill), EquirectImage(width, 1, fill)};
}

Raster ProbMaps::to_raster() const {
  Raster r(width(), height(), 4);
  for (int y = 0; y < height(); ++y) {
    for (int x = 0; x < width(); ++x) {
      for (int c = 0; c < 3; ++c) r.at(x, y, c) = boundary_.at(x, y, c);
      r.at(x, y, 3) = corner_.at(x, y);
    }
  }
  return r;
}

ProbMaps ProbMaps::from_raster(const Raster& r) {
  if (r.channels() != 4) throw DomainError("probability maps need 4 channels (3 boundary + corner)");
  Raster b(r.width(), r.height(), 3);
  Raster c(r.width(), r.height(), 1);
  for (int y = 0; y < r.height(); ++y) {
    for (int x = 0; x < r.width(); ++x) {
      for (int k = 0; k < 3; ++k) b.at(x, y, k) = r.at(x, y, k);
      c.at(x, y) = r.at(x, y, 3);
    }
  }
  return {EquirectImage(std::move(b)), EquirectImage(std::move(c))};
}

Raster rasterize_layout_masks(const solver::ManhattanLayout& layout, int width, double dilation_radius) {
  if (!geom::point_in_polygon(layout.camera, layout.vertices)) {
    throw DomainError("camera is outside the layout polygon");
  }
  if (!(layout.floor < layout.camera_height && layout.camera_height < layout.ceiling)) {
    throw DomainError("camera must lie between floor and ceiling");
  }
  Raster masks(width, width / 2, 4);
  const Vec3 cam = layout.camera_position();
  const int n = layout.wall_count();
  auto draw = [&](const Vec3& a, const Vec3& b, int channel) {
    for_each_projected_sample(a, b, cam, width,
                              [&](const geom::PixelCoord& p) { stamp_disk(masks, channel, p.u, p.v, dilation_radius); });
  };
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    draw(layout.floor_corner(i), layout.ceiling_corner(i), kWallWall);
    draw(layout.ceiling_corner(i), layout.ceiling_corner(j), kCeilingWall);
    draw(layout.floor_corner(i), layout.floor_corner(j), kWallFloor);
    for (const Vec3& c : {layout.ceiling_corner(i), layout.floor_corner(i)}) {
      const auto p = solver::project(layout, c, width);
      stamp_disk(masks, 3, p.u, p.v, dilation_radius);
    }
  }
  return masks;
}

Raster gaussian_blur(const Raster& src, double sigma, int taps) {
  if (sigma <= 0.0 || taps <= 1) return src;
  const auto k = gaussian_taps(sigma, taps);
  const int lo = -taps / 2;
  const int w = src.width();
  const int h = src.height();
  const int nc = src.channels();
  Raster tmp(w, h, nc);
  std::vector<double> acc(nc);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (int t = 0; t < taps; ++t) {
        const int sx = wrap(x - (lo + t), w);
        for (int c = 0; c < nc; ++c) acc[c] += k[t] * src.at(sx, y, c);
      }
      for (int c = 0; c < nc; ++c) tmp.at(x, y, c) = static_cast<float>(acc[c]);
    }
  }
  Raster out(w, h, nc);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (int t = 0; t < taps; ++t) {
        const int sy = y - (lo + t);
        if (sy < 0 || sy >= h) continue;
        for (int c = 0; c < nc; ++c) acc[c] += k[t] * tmp.at(x, sy, c);
      }
      for (int c = 0; c < nc; ++c) out.at(x, y, c) = static_cast<float>(acc[c]);
    }
  }
  return out;
}

BlobLabels label_blobs(const Raster& r, int c) {
  const int w = r.width();
  const int h = r.height();
  BlobLabels out;
  out.label.assign(static_cast<std::size_t>(w) * h, -1);
  std::vector<int> stack;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      const std::size_t s = static_cast<std::size_t>(y0) * w + x0;
      if (out.label[s] >= 0 || r.at(x0, y0, c) <= 0.0f) continue;
      stack.assign(1, static_cast<int>(s));
      out.label[s] = out.count;
      while (!stack.empty()) {
        const int id = stack.back();
        stack.pop_back();
        const int x = id % w;
        const int y = id / w;
        for (int dy = -1; dy <= 1; ++dy) {
          const int ny = y + dy;
          if (ny < 0 || ny >= h) continue;
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = wrap(x + dx, w);
            const std::size_t ns = static_cast<std::size_t>(ny) * w + nx;
            if (out.label[ns] < 0 && r.at(nx, ny, c) > 0.0f) {
              out.label[ns] = out.count;
              stack.push_back(static_cast<int>(ns));
            }
          }
        }
      }
      ++out.count;
    }
  }
  return out;
}

void normalize_blobs(Raster& r) {
  for (int c = 0; c < r.channels(); ++c) {
    const BlobLabels blobs = label_blobs(r, c);
    std::vector<float> peak(static_cast<std::size_t>(blobs.count), 0.0f);
    const std::size_t n = blobs.label.size();
    for (std::size_t i = 0; i < n; ++i) {
      const int l = blobs.label[i];
      if (l >= 0) peak[l] = std::max(peak[l], r.data()[i * r.channels() + c]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const int l = blobs.label[i];
      float& v = r.data()[i * r.channels() + c];
      if (l >= 0) v = std::min(1.0f, v / peak[l]);
    }
  }
}

ProbMaps render_ground_truth(const solver::ManhattanLayout& layout, int width, const GroundTruthOptions& options) {
  if (width < 64 || width % 2 != 0) throw DomainError("map width must be even and >= 64");
  Raster maps = rasterize_layout_masks(layout, width, options.dilation_radius);
  maps = gaussian_blur(maps, options.sigma, options.kernel_size);
  normalize_blobs(maps);
  return ProbMaps::from_raster(maps);
}

EquirectImage augment(const EquirectImage& img, const Augmentation& mode) {
  const int w = img.width();
  const int h = img.height();
  const int nc = img.channels();
  if (const auto* g = std::get_if<Gamma>(&mode)) {
    if (!(g->gamma >= 0.5 && g->gamma <= 2.0)) throw DomainError("gamma must lie in [0.5, 2]");
    EquirectImage out = img;
    for (float& f : out.data()) f = static_cast<float>(std::pow(std::clamp(static_cast<double>(f), 0.0, 1.0), g->gamma));
    return out;
  }
  EquirectImage out(w, nc);
  const bool flip = std::holds_alternative<Flip>(mode);
  const int k = flip ? 0 : std::get<Roll>(mode).k;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int sx = flip ? w - 1 - x : wrap(x - k, w);
      for (int c = 0; c < nc; ++c) out.at(x, y, c) = img.at(sx, y, c);
    }
  }
  return out;
}

ProbMaps augment(const ProbMaps& maps, const Augmentation& mode) {
  if (std::holds_alternative<Gamma>(mode)) throw DomainError("gamma augmentation is not defined for probability maps");
  return {augment(maps.boundary(), mode), augment(maps.corner(), mode)};
}

double binary_cross_entropy(const Raster& pred, const Raster& target, double background_reweight) {
  if (pred.width() != target.width() || pred.height() != target.height() || pred.channels() != target.channels()) {
    throw DomainError("prediction and target dimensions differ");
  }
  constexpr double kEps = 1e-7;
  const auto p = pred.data();
  const auto t = target.data();
  double sum = 0.0;
  double weight = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(static_cast<double>(p[i]), kEps, 1.0 - kEps);
    const double g = t[i];
    const double wgt = g < 0.01 ? background_reweight : 1.0;
    sum -= wgt * (g * std::log(q) + (1.0 - g) * std::log(1.0 - q));
    weight += wgt;
  }
  return weight > 0.0 ? sum / weight : 0.0;
}

double eval_loss(const ProbMaps& pred, const ProbMaps& gt, const solver::CuboidParams& d_pred,
                 const solver::CuboidParams& d_gt, const LossWeights& w) {
  if (pred.width() != gt.width()) throw DomainError("prediction and ground truth sizes differ");
  const auto a = d_pred.as_array();
  const auto b = d_gt.as_array();
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
  return w.alpha * binary_cross_entropy(pred.boundary(), gt.boundary(), w.background_reweight) +
         w.beta * binary_cross_entropy(pred.corner(), gt.corner(), w.background_reweight) + w.tau * std::sqrt(d2);
}

CornerSet detect_corners(const EquirectImage& m, const ExtractOptions& opt) {
  const int w = m.width();
  const int h = m.height();
  CornerSet out;
  out.width = w;

  std::vector<double> response(w, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) response[x] += m.at(x, y);
  const double max_response = *std::max_element(response.begin(), response.end());
  if (!(max_response > 0.0)) return out;

  auto peaks = find_peaks(response, true);
  std::erase_if(peaks, [&](const Peak& p) { return p.value < opt.floor_fraction * max_response; });
  std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.value > b.value; });
  std::vector<Peak> kept;
  for (const auto& p : peaks) {
    const bool clear = std::all_of(kept.begin(), kept.end(), [&](const Peak& k) {
      return std::abs(geom::wrapped_column_delta(k.pos, p.pos, w)) >= opt.min_separation;
    });
    if (clear) kept.push_back(p);
  }

  std::vector<double> profile(h);
  for (const auto& col : kept) {
    std::fill(profile.begin(), profile.end(), 0.0);
    const int hw = opt.profile_half_width;
    for (int y = 0; y < h; ++y) {
      for (int dx = -hw; dx <= hw; ++dx) profile[y] += m.at(wrap(col.index + dx, w), y);
      profile[y] /= (2 * hw + 1);
    }
    auto rows = find_peaks(profile, false);
    std::stable_sort(rows.begin(), rows.end(), [](const Peak& a, const Peak& b) { return a.value > b.value; });
    // Same suppression radius as the columns, so a noisy blob cannot supply both rows.
    std::vector<Peak> row_kept;
    for (const auto& r : rows) {
      if (row_kept.size() == 2) break;
      if (row_kept.empty() || std::abs(r.pos - row_kept[0].pos) >= opt.min_separation) row_kept.push_back(r);
    }
    rows = std::move(row_kept);
    double top = 0.0;
    double bot = 0.0;
    if (rows.size() >= 2) {
      top = std::min(rows[0].pos, rows[1].pos);
      bot = std::max(rows[0].pos, rows[1].pos);
    } else {
      // One-sided column: fall back to the strongest row on each side of the horizon.
      const auto mid = profile.begin() + h / 2;
      top = static_cast<double>(std::max_element(profile.begin(), mid) - profile.begin());
      bot = static_cast<double>(std::max_element(mid, profile.end()) - profile.begin());
      if (rows.size() == 1) (rows[0].pos < h / 2 ? top : bot) = rows[0].pos;
    }
    Corner c;
    c.u = col.pos;
    c.v_top = top;
    c.v_bot = bot;
    c.response = col.value;
    c.conf = 0.5 * (window_mean(m, c.u, top, opt.conf_half_window) + window_mean(m, c.u, bot, opt.conf_half_window));
    out.corners.push_back(c);
  }
  std::sort(out.corners.begin(), out.corners.end(), [](const Corner& a, const Corner& b) { return a.u < b.u; });
  return out;
}

CornerSet extract_corners(const EquirectImage& m, const ExtractOptions& opt) {
  CornerSet found = detect_corners(m, opt);
  if (found.size() < 4) {
    const auto n = found.size();
    throw InsufficientCorners("found " + std::to_string(n) + " corner columns, need at least 4", std::move(found));
  }
  return found;
}

CornerSet strongest(const CornerSet& set, std::size_t n) {
  CornerSet out = set;
  std::stable_sort(out.corners.begin(), out.corners.end(),
                   [](const Corner& a, const Corner& b) { return a.response > b.response; });
  if (out.corners.size() > n) out.corners.resize(n);
  std::sort(out.corners.begin(), out.corners.end(), [](const Corner& a, const Corner& b) { return a.u < b.u; });
  return out;
}

int decide_wall_count(const CornerSet& detected) {
  if (detected.size() < 6) return 4;
  const CornerSet top6 = strongest(detected, 6);
  const auto weakest = std::min_element(top6.corners.begin(), top6.corners.end(),
                                        [](const Corner& a, const Corner& b) { return a.response < b.response; });
  return weakest->conf >= kSixWallThreshold ? 6 : 4;
}

int decide_wall_count(const EquirectImage& corner_map, const ExtractOptions& options) {
  return decide_wall_count(detect_corners(corner_map, options));
}

}  // namespace layoutkit::maps
