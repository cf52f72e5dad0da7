#include "tgr/raster.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>

#include "tgr/errors.hpp"

namespace tgr {
namespace {

struct Rgb {
  uint8_t r, g, b;
};

Rgb color_for(const WorldObject& obj) {
  static const std::pair<const char*, Rgb> table[] = {
      {"red", {200, 60, 60}},    {"green", {60, 160, 80}},  {"blue", {70, 90, 200}},
      {"yellow", {210, 190, 60}}, {"purple", {150, 80, 180}}, {"orange", {230, 140, 50}},
      {"white", {235, 235, 235}}, {"black", {40, 40, 40}},
  };
  for (const auto& attr : obj.attributes) {
    for (const auto& [name, rgb] : table) {
      if (attr == name) return rgb;
    }
  }
  return {120, 120, 120};
}

// 5x7 digit glyphs, one bit per pixel, row-major.
constexpr std::array<uint8_t, 7> kDigits[10] = {
    {0x0e, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0e},  // 0
    {0x04, 0x0c, 0x04, 0x04, 0x04, 0x04, 0x0e},  // 1
    {0x0e, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1f},  // 2
    {0x1f, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0e},  // 3
    {0x02, 0x06, 0x0a, 0x12, 0x1f, 0x02, 0x02},  // 4
    {0x1f, 0x10, 0x1e, 0x01, 0x01, 0x11, 0x0e},  // 5
    {0x06, 0x08, 0x10, 0x1e, 0x11, 0x11, 0x0e},  // 6
    {0x1f, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},  // 7
    {0x0e, 0x11, 0x11, 0x0e, 0x11, 0x11, 0x0e},  // 8
    {0x0e, 0x11, 0x11, 0x0f, 0x01, 0x02, 0x0c},  // 9
};

class Canvas {
 public:
  Canvas(int width, int height) : w_(width), h_(height), pix_(static_cast<size_t>(w_ * h_ * 3)) {
    for (size_t i = 0; i < pix_.size(); i += 3) {
      pix_[i] = 244;
      pix_[i + 1] = 244;
      pix_[i + 2] = 238;
    }
  }

  void set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
    const size_t i = 3 * (static_cast<size_t>(y) * static_cast<size_t>(w_) + static_cast<size_t>(x));
    pix_[i] = c.r;
    pix_[i + 1] = c.g;
    pix_[i + 2] = c.b;
  }

  void fill_rect(const BoundingBox& b, Rgb c) {
    for (int y = static_cast<int>(b.y_min); y < static_cast<int>(b.y_max); ++y)
      for (int x = static_cast<int>(b.x_min); x < static_cast<int>(b.x_max); ++x) set(x, y, c);
  }

  void outline_rect(const BoundingBox& b, Rgb c) {
    for (int x = static_cast<int>(b.x_min); x < static_cast<int>(b.x_max); ++x) {
      set(x, static_cast<int>(b.y_min), c);
      set(x, static_cast<int>(b.y_max) - 1, c);
    }
    for (int y = static_cast<int>(b.y_min); y < static_cast<int>(b.y_max); ++y) {
      set(static_cast<int>(b.x_min), y, c);
      set(static_cast<int>(b.x_max) - 1, y, c);
    }
  }

  void draw_number(int value, int x, int y, Rgb c, int scale = 2) {
    const std::string digits = std::to_string(std::max(0, value));
    for (char ch : digits) {
      const auto& glyph = kDigits[ch - '0'];
      for (int row = 0; row < 7; ++row)
        for (int col = 0; col < 5; ++col)
          if (glyph[static_cast<size_t>(row)] & (1 << (4 - col)))
            for (int sy = 0; sy < scale; ++sy)
              for (int sx = 0; sx < scale; ++sx)
                set(x + col * scale + sx, y + row * scale + sy, c);
      x += 6 * scale;
    }
  }

  std::vector<uint8_t> ppm() const {
    char header[64];
    const int n = std::snprintf(header, sizeof(header), "P6\n%d %d\n255\n", w_, h_);
    std::vector<uint8_t> out(static_cast<size_t>(n) + pix_.size());
    std::memcpy(out.data(), header, static_cast<size_t>(n));
    std::memcpy(out.data() + n, pix_.data(), pix_.size());
    return out;
  }

 private:
  int w_, h_;
  std::vector<uint8_t> pix_;
};

}  // namespace

std::vector<uint8_t> render_frame_ppm(const World& world, int frame,
                                      const std::vector<RasterMark>& marks) {
  const EpisodeMeta& meta = world.meta();
  Canvas canvas(static_cast<int>(meta.frame_width), static_cast<int>(meta.frame_height));
  const SceneSnapshot snap = world.snapshot_at(frame);
  for (const auto& entry : snap.entries) {
    if (entry.visibility != Visibility::Visible) continue;
    const WorldObject* obj = world.object(entry.id);
    const Rgb c = color_for(*obj);
    canvas.fill_rect(entry.box, c);
    canvas.outline_rect(entry.box, {30, 30, 30});
  }
  for (const auto& mark : marks) {
    canvas.draw_number(mark.label, static_cast<int>(mark.box.x_min) + 3,
                       static_cast<int>(mark.box.y_min) + 3, {10, 10, 10});
  }
  return canvas.ppm();
}

void write_ppm(const std::filesystem::path& path, const std::vector<uint8_t>& ppm) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write image: " + path.string());
  out.write(reinterpret_cast<const char*>(ppm.data()), static_cast<std::streamsize>(ppm.size()));
}

std::filesystem::path raster_path(const std::filesystem::path& dir, const std::string& episode_id,
                                  int frame) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06d.ppm", frame);
  return dir / episode_id / name;
}

}  // namespace tgr
