#pragma once

#include <Eigen/Dense>
#include <vector>

namespace vemc {

using Vec2 = Eigen::Vector2d;

/// Signed area of a simple polygon (positive for counter-clockwise loops).
double polygon_signed_area(const std::vector<Vec2>& pts);

/// Area-weighted centroid of a simple polygon.
Vec2 polygon_centroid(const std::vector<Vec2>& pts);

/// Diameter as maximum pairwise vertex distance (exact for polygons).
double polygon_diameter(const std::vector<Vec2>& pts);

double polygon_perimeter(const std::vector<Vec2>& pts);

/// True if the centroid sees every edge, i.e. all fan triangles
/// (centroid, v_i, v_{i+1}) are positively oriented.
bool polygon_star_from_centroid(const std::vector<Vec2>& pts);

/// Outward unit normal of the directed edge a->b of a CCW polygon.
inline Vec2 edge_outward_normal(const Vec2& a, const Vec2& b) {
  Vec2 t = (b - a).normalized();
  return {t.y(), -t.x()};
}

/// Clip a convex polygon against the half-plane n.x <= c (keeps that side).
/// Returns the clipped polygon; may be empty.
std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& poly, const Vec2& n,
                                 double c);

struct Rect {
  double x0, y0, x1, y1;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  std::vector<Vec2> corners() const {
    return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  }
};

}  // namespace vemc
