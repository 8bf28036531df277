#include "vemc/geometry.hpp"

#include <cmath>

namespace vemc {

double polygon_signed_area(const std::vector<Vec2>& pts) {
  double a = 0.0;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = pts[i];
    const Vec2& q = pts[(i + 1) % n];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

Vec2 polygon_centroid(const std::vector<Vec2>& pts) {
  double a = 0.0;
  Vec2 c = Vec2::Zero();
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = pts[i];
    const Vec2& q = pts[(i + 1) % n];
    const double w = p.x() * q.y() - q.x() * p.y();
    a += w;
    c += w * (p + q);
  }
  return c / (3.0 * a);
}

double polygon_diameter(const std::vector<Vec2>& pts) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      d2 = std::max(d2, (pts[i] - pts[j]).squaredNorm());
  return std::sqrt(d2);
}

double polygon_perimeter(const std::vector<Vec2>& pts) {
  double p = 0.0;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) p += (pts[(i + 1) % n] - pts[i]).norm();
  return p;
}

bool polygon_star_from_centroid(const std::vector<Vec2>& pts) {
  const Vec2 c = polygon_centroid(pts);
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 u = pts[i] - c;
    const Vec2 v = pts[(i + 1) % n] - c;
    if (u.x() * v.y() - u.y() * v.x() <= 0.0) return false;
  }
  return true;
}

std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& poly, const Vec2& n,
                                 double c) {
  std::vector<Vec2> out;
  const std::size_t m = poly.size();
  if (m == 0) return out;
  out.reserve(m + 2);
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % m];
    const double dp = n.dot(p) - c;
    const double dq = n.dot(q) - c;
    if (dp <= 0.0) out.push_back(p);
    if ((dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq <= 0.0)) {
      const double t = dp / (dp - dq);
      out.push_back(p + t * (q - p));
    }
  }
  return out;
}

}  // namespace vemc
