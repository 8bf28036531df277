#pragma once

#include <cstdint>

#include "vemc/mesh.hpp"

namespace vemc {

/// n x n grid of congruent squares tiling rect. Boundary labels unset.
PolyMesh build_square_mesh(const Rect& rect, int n);

/// Hexagon-dominant tiling with exactly target_count cells (clipped Voronoi
/// of a staggered lattice); target_count must be a perfect square.
PolyMesh build_hexagonal_mesh(const Rect& rect, int target_count);

/// Clipped Voronoi of Lloyd-relaxed uniform random seeds; exactly
/// target_count convex cells; deterministic for a fixed seed.
PolyMesh build_web_mesh(const Rect& rect, int target_count, std::uint64_t seed);

/// Tangentially displace interior Contact-line nodes of `mesh` by amounts in
/// [lo,hi]*h_max so that node insertion against an unperturbed partner
/// produces contact edges of those lengths. Nodes whose move would break a
/// cell are skipped.
PolyMesh perturb_contact_band(const PolyMesh& mesh, double lo, double hi,
                              std::uint64_t seed);

/// Mirror through y -> -y (cells re-oriented CCW); labels preserved.
PolyMesh mirror_y(const PolyMesh& mesh);

/// Polar-pattern mesh of the lower half-disk of radius R centred at
/// (0, R): rings x sectors cells (innermost ring triangles, rest quads),
/// chordal boundary. cell_count must be 16*4^L (16, 64, 256, ...).
PolyMesh build_half_disk_mesh(double R, int cell_count);

/// Insert a vertex on the boundary edge containing point p (within tol of
/// the edge segment); no-op when a vertex already sits there. Returns the
/// vertex id. Splitting never changes cell geometry.
int split_boundary_edge_at(PolyMesh& mesh, const Vec2& p, double tol);

}  // namespace vemc
