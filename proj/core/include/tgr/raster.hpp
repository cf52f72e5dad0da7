#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tgr/world.hpp"

namespace tgr {

/// Numeral marks drawn at a box's top-left corner (visual prompting in
/// raster mode).
struct RasterMark {
  int label = 0;
  BoundingBox box;
};

/// Draws one frame as colored rectangles on a light background: binary PPM
/// (P6). Contained and absent objects are not drawn.
std::vector<uint8_t> render_frame_ppm(const World& world, int frame,
                                      const std::vector<RasterMark>& marks = {});

void write_ppm(const std::filesystem::path& path, const std::vector<uint8_t>& ppm);

/// {dir}/{episode}/{frame:06}.ppm
std::filesystem::path raster_path(const std::filesystem::path& dir, const std::string& episode_id,
                                  int frame);

}  // namespace tgr
