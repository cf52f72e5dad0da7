#pragma once

#include <nlohmann/json_fwd.hpp>

namespace tgr {

/// Axis-aligned box in frame pixel space, corner form. Half-open
/// [x_min,x_max) x [y_min,y_max) semantics so integer-coordinate boxes have
/// exact unit-cell areas.
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }

  /// Strictly positive area and non-negative coordinates.
  bool valid() const;

  bool operator==(const BoundingBox&) const = default;
};

/// Intersection over union of two valid boxes; 0 when disjoint.
/// Throws ValidationError on a degenerate (zero-area) box.
double iou(const BoundingBox& a, const BoundingBox& b);

BoundingBox translated(const BoundingBox& b, double dx, double dy);

/// Per-coordinate linear interpolation, t in [0,1].
BoundingBox lerp(const BoundingBox& a, const BoundingBox& b, double t);

void to_json(nlohmann::json& j, const BoundingBox& b);
void from_json(const nlohmann::json& j, BoundingBox& b);

}  // namespace tgr
