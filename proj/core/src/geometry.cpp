#include "tgr/geometry.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "tgr/errors.hpp"

namespace tgr {

bool BoundingBox::valid() const {
  return x_min >= 0.0 && y_min >= 0.0 && x_min < x_max && y_min < y_max;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  if (a.area() <= 0.0 || b.area() <= 0.0) {
    throw ValidationError("iou: degenerate (zero-area) box");
  }
  const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  return inter / (a.area() + b.area() - inter);
}

BoundingBox translated(const BoundingBox& b, double dx, double dy) {
  return {b.x_min + dx, b.y_min + dy, b.x_max + dx, b.y_max + dy};
}

BoundingBox lerp(const BoundingBox& a, const BoundingBox& b, double t) {
  return {a.x_min + (b.x_min - a.x_min) * t, a.y_min + (b.y_min - a.y_min) * t,
          a.x_max + (b.x_max - a.x_max) * t, a.y_max + (b.y_max - a.y_max) * t};
}

void to_json(nlohmann::json& j, const BoundingBox& b) {
  j = nlohmann::json{{"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max}, {"y_max", b.y_max}};
}

void from_json(const nlohmann::json& j, BoundingBox& b) {
  j.at("x_min").get_to(b.x_min);
  j.at("y_min").get_to(b.y_min);
  j.at("x_max").get_to(b.x_max);
  j.at("y_max").get_to(b.y_max);
}

}  // namespace tgr
