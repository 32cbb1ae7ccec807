#include "depthsr/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "depthsr/error.hpp"
#include "depthsr/imaging.hpp"
#include "depthsr/png_io.hpp"

namespace fs = std::filesystem;

namespace depthsr {

bool is_supported_scale(int s) { return s == 2 || s == 4 || s == 8 || s == 16; }

void RgbdPair::validate() const {
  DEPTHSR_REQUIRE(color.height() == depth.height() && color.width() == depth.width(),
                  "color and depth of pair '" + source_id + "' differ in size");
}

void SrSample::validate() const {
  DEPTHSR_REQUIRE(scale >= 1, "sample scale must be positive");
  DEPTHSR_REQUIRE(hr_depth_gt.height() == hr_color.height() && hr_depth_gt.width() == hr_color.width(),
                  "ground truth and color of sample '" + source_id + "' differ in size");
  DEPTHSR_REQUIRE(hr_color.height() == scale * lr_depth.height() && hr_color.width() == scale * lr_depth.width(),
                  "sample '" + source_id + "': high-resolution dims are not scale x low-resolution dims");
}

// ---------------------------------------------------------------------------
// PNG-backed I/O
// ---------------------------------------------------------------------------

DepthMap load_depth_png(const std::string& path, double unit_scale) {
  DEPTHSR_REQUIRE(unit_scale > 0.0, "depth unit scale must be positive");
  const png::Gray16 raw = png::read_gray16(path);
  Plane values(raw.height, raw.width);
  std::vector<std::uint8_t> mask(raw.pixels.size());
  for (std::size_t i = 0; i < raw.pixels.size(); ++i) {
    const std::uint16_t v = raw.pixels[i];
    mask[i] = v != 0;
    // Readings beyond the configured range saturate at 1.
    values.values()[i] = std::min(1.0, v / unit_scale);
  }
  return DepthMap(std::move(values), std::move(mask), unit_scale);
}

void save_depth_png(const std::string& path, const DepthMap& depth) {
  depth.validate();
  png::Gray16 raw{depth.height(), depth.width(), std::vector<std::uint16_t>(depth.values.size())};
  for (std::size_t i = 0; i < raw.pixels.size(); ++i) {
    if (!depth.valid_mask[i]) continue;
    const double scaled = std::clamp(std::round(depth.values.values()[i] * depth.unit_scale), 1.0, 65535.0);
    raw.pixels[i] = static_cast<std::uint16_t>(scaled);
  }
  png::write_gray16(path, raw);
}

ColorImage load_color_png(const std::string& path) { return png::to_color(png::read_rgb8(path)); }

void save_color_png(const std::string& path, const ColorImage& color) { png::write_rgb8(path, png::from_color(color)); }

RgbdPair load_rgbd(const std::string& color_path, const std::string& depth_path, double unit_scale) {
  RgbdPair pair{load_color_png(color_path), load_depth_png(depth_path, unit_scale), fs::path(color_path).stem().string()};
  DEPTHSR_REQUIRE(pair.color.height() == pair.depth.height() && pair.color.width() == pair.depth.width(),
                  "dimension mismatch between " + color_path + " and " + depth_path);
  return pair;
}

void save_rgbd(const RgbdPair& pair, const std::string& color_path, const std::string& depth_path) {
  pair.validate();
  save_color_png(color_path, pair.color);
  save_depth_png(depth_path, pair.depth);
}

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<PairPaths> list_pairs(const fs::path& location) {
  std::vector<PairPaths> out;
  if (fs::is_regular_file(location)) {
    std::ifstream in(location);
    DEPTHSR_REQUIRE(in.good(), "cannot read manifest " + location.string());
    const fs::path base = location.parent_path();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      const auto comma = line.find(',');
      DEPTHSR_REQUIRE(comma != std::string::npos,
                      location.string() + ":" + std::to_string(lineno) + ": expected 'color,depth'");
      fs::path color = trim(line.substr(0, comma));
      fs::path depth = trim(line.substr(comma + 1));
      if (color.is_relative()) color = base / color;
      if (depth.is_relative()) depth = base / depth;
      out.push_back({color.stem().string(), color, depth});
    }
  } else if (fs::is_directory(location)) {
    for (const auto& entry : fs::directory_iterator(location)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".png") continue;
      const std::string stem = entry.path().stem().string();
      if (stem.size() >= 6 && stem.compare(stem.size() - 6, 6, "_depth") == 0) continue;
      const fs::path depth = location / (stem + "_depth.png");
      if (fs::exists(depth)) out.push_back({stem, entry.path(), depth});
    }
  } else {
    detail::fail("dataset location does not exist: " + location.string());
  }
  std::sort(out.begin(), out.end(), [](const PairPaths& a, const PairPaths& b) { return a.source_id < b.source_id; });
  return out;
}

std::vector<RgbdPair> load_dataset(const fs::path& location, double unit_scale) {
  std::vector<RgbdPair> out;
  for (const PairPaths& p : list_pairs(location)) {
    RgbdPair pair = load_rgbd(p.color.string(), p.depth.string(), unit_scale);
    pair.source_id = p.source_id;
    out.push_back(std::move(pair));
  }
  return out;
}

void write_dataset(const fs::path& dir, const std::vector<RgbdPair>& pairs) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  DEPTHSR_REQUIRE(!ec && fs::is_directory(dir), "cannot create directory " + dir.string());
  std::string manifest;
  for (const RgbdPair& p : pairs) {
    const std::string color = p.source_id + ".png";
    const std::string depth = p.source_id + "_depth.png";
    save_rgbd(p, (dir / color).string(), (dir / depth).string());
    manifest += color + "," + depth + "\n";
  }
  const fs::path tmp = dir / (std::string(kManifestName) + ".partial");
  {
    std::ofstream out(tmp);
    DEPTHSR_REQUIRE(out.good(), "cannot write manifest in " + dir.string());
    out << manifest;
  }
  fs::rename(tmp, dir / kManifestName);
}

// ---------------------------------------------------------------------------
// Preprocessing
// ---------------------------------------------------------------------------

DepthMap complete_depth(const DepthMap& d) {
  DEPTHSR_REQUIRE(d.valid_count() > 0, "complete_depth: depth map has no valid pixels");
  if (d.fully_valid()) return d;
  const int h = d.height();
  const int w = d.width();
  Plane v = d.values;
  std::vector<std::uint8_t> known = d.valid_mask;
  auto idx = [w](int r, int c) { return static_cast<std::size_t>(r) * w + c; };

  std::vector<std::pair<std::size_t, double>> updates;
  while (true) {
    updates.clear();
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        if (known[idx(r, c)]) continue;
        double sum = 0.0;
        int n = 0;
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            const int rr = r + dr;
            const int cc = c + dc;
            if (rr < 0 || rr >= h || cc < 0 || cc >= w || !known[idx(rr, cc)]) continue;
            sum += v(rr, cc);
            ++n;
          }
        if (n > 0) updates.emplace_back(idx(r, c), sum / n);
      }
    if (updates.empty()) break;
    for (const auto& [i, val] : updates) {
      v.values()[i] = val;
      known[i] = 1;
    }
  }

  // One smoothing pass restricted to the filled pixels.
  const Plane before = v;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      if (d.valid_mask[idx(r, c)]) continue;
      double sum = 0.0;
      int n = 0;
      for (int rr = std::max(0, r - 1); rr <= std::min(h - 1, r + 1); ++rr)
        for (int cc = std::max(0, c - 1); cc <= std::min(w - 1, c + 1); ++cc) {
          sum += before(rr, cc);
          ++n;
        }
      v(r, c) = sum / n;
    }
  return DepthMap(std::move(v), d.unit_scale);
}

SrSample make_sr_sample(const RgbdPair& pair, int scale) {
  pair.validate();
  DEPTHSR_REQUIRE(is_supported_scale(scale), "scale factor " + std::to_string(scale) + " is not one of 2, 4, 8, 16");
  const int h = pair.depth.height();
  const int w = pair.depth.width();
  DEPTHSR_REQUIRE(h % scale == 0 && w % scale == 0,
                  "pair '" + pair.source_id + "' (" + std::to_string(h) + "x" + std::to_string(w) +
                      ") is not divisible by scale " + std::to_string(scale));
  SrSample s;
  s.lr_depth = DepthMap(clip_unit(bicubic_resample(pair.depth.values, h / scale, w / scale)), pair.depth.unit_scale);
  s.hr_color = pair.color;
  s.hr_depth_gt = pair.depth;
  s.scale = scale;
  s.source_id = pair.source_id;
  return s;
}

std::size_t patch_count(int height, int width, int size, int stride) {
  DEPTHSR_REQUIRE(size >= 1 && stride >= 1, "patch size and stride must be positive");
  if (height < size || width < size) return 0;
  return static_cast<std::size_t>((height - size) / stride + 1) * static_cast<std::size_t>((width - size) / stride + 1);
}

PatchSet extract_patches(const RgbdPair& pair, int size, int stride) {
  pair.validate();
  DEPTHSR_REQUIRE(size >= 1 && stride >= 1, "patch size and stride must be positive");
  DEPTHSR_REQUIRE(pair.depth.height() >= size && pair.depth.width() >= size,
                  "image '" + pair.source_id + "' is smaller than the patch size");
  PatchSet set;
  set.patch_size = size;
  set.stride = stride;
  for (int r = 0; r + size <= pair.depth.height(); r += stride)
    for (int c = 0; c + size <= pair.depth.width(); c += stride) {
      char suffix[32];
      std::snprintf(suffix, sizeof suffix, "_y%04d_x%04d", r, c);
      set.patches.push_back({crop(pair.color, r, c, size, size), crop(pair.depth, r, c, size, size),
                             pair.source_id + suffix});
    }
  return set;
}

RgbdPair rotate90(const RgbdPair& patch) {
  patch.validate();
  const int n = patch.depth.height();
  DEPTHSR_REQUIRE(patch.depth.width() == n, "rotate90 requires a square patch");
  RgbdPair out{ColorImage(n, n), DepthMap(Plane(n, n), patch.depth.unit_scale), patch.source_id + "_rot90"};
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const int sr = n - 1 - c;
      const int sc = r;
      for (int ch = 0; ch < ColorImage::kChannels; ++ch) out.color.at(ch, r, c) = patch.color.at(ch, sr, sc);
      out.depth.values(r, c) = patch.depth.values(sr, sc);
      out.depth.valid_mask[static_cast<std::size_t>(r) * n + c] = patch.depth.valid_mask[static_cast<std::size_t>(sr) * n + sc];
    }
  return out;
}

std::vector<RgbdPair> augment_rot90(const RgbdPair& patch) { return {patch, rotate90(patch)}; }

}  // namespace depthsr
