#pragma once

#include <array>
#include <vector>

#include "geometry.hpp"

namespace gsmhd {

/// Oriented unstructured triangular mesh in the (r, z) plane.
///
/// Cells are counterclockwise vertex triples. Edges are derived, stored as
/// (lo, hi) vertex pairs with a global orientation from lower to higher
/// vertex index; the per-cell edge table carries the sign relating the
/// cell-local traversal direction to the global one. The mesh is immutable
/// after construction and safe to share across threads.
class Mesh2D {
 public:
  struct Edge {
    index_t v0, v1;  // v0 < v1, global orientation v0 -> v1
  };

  Mesh2D(std::vector<Vec2> vertices, std::vector<std::array<index_t, 3>> cells,
         std::vector<int> region_tags = {},
         std::vector<int> boundary_tags_in = {});

  index_t num_vertices() const { return static_cast<index_t>(verts_.size()); }
  index_t num_cells() const { return static_cast<index_t>(cells_.size()); }
  index_t num_edges() const { return static_cast<index_t>(edges_.size()); }

  const Vec2 &vertex(index_t v) const { return verts_[v]; }
  const std::array<index_t, 3> &cell(index_t c) const { return cells_[c]; }
  const Edge &edge(index_t e) const { return edges_[e]; }
  int region_tag(index_t c) const { return region_[c]; }

  // Local edge k of cell c runs from local vertex k to k+1 (mod 3).
  index_t cell_edge(index_t c, int k) const { return cell_edges_[c][k]; }
  // +1 when the local direction agrees with the global lo->hi orientation.
  int cell_edge_sign(index_t c, int k) const { return cell_signs_[c][k]; }

  const std::vector<index_t> &boundary_edges() const { return boundary_edges_; }
  bool is_boundary_edge(index_t e) const { return edge_cell_count_[e] == 1; }
  int boundary_tag(index_t e) const { return boundary_tags_[e]; }
  // Owning cell and local edge index of a boundary edge.
  std::pair<index_t, int> boundary_owner(index_t e) const { return bedge_owner_[e]; }

  std::array<Vec2, 3> cell_points(index_t c) const {
    return {verts_[cells_[c][0]], verts_[cells_[c][1]], verts_[cells_[c][2]]};
  }
  double cell_area(index_t c) const;
  Vec2 cell_centroid(index_t c) const;
  // Gradients of the three barycentric coordinate functions (constant per cell).
  std::array<Vec2, 3> barycentric_gradients(index_t c) const;

  // Outward unit normal of a boundary edge and its length.
  Vec2 boundary_normal(index_t e) const;
  double edge_length(index_t e) const;

  double min_r() const;
  double max_r() const;

  /// Point location result.
  enum class LocStatus { inside, on_boundary, outside };
  struct Location {
    index_t cell = -1;
    std::array<double, 3> bary{};
    LocStatus status = LocStatus::outside;
  };

  /// Locates p via an axis-aligned bounding-box tree over cells. Points
  /// outside the mesh hull return the nearest candidate cell with clamped
  /// barycentrics and status=outside.
  Location locate(const Vec2 &p) const;

  // Structural checks used by tests and by refinement postconditions.
  void check_invariants() const;

 private:
  void build_topology();
  void build_bbox_tree();

  std::vector<Vec2> verts_;
  std::vector<std::array<index_t, 3>> cells_;
  std::vector<int> region_;
  std::vector<Edge> edges_;
  std::vector<std::array<index_t, 3>> cell_edges_;
  std::vector<std::array<int, 3>> cell_signs_;
  std::vector<int> edge_cell_count_;
  std::vector<index_t> boundary_edges_;
  std::vector<int> boundary_tags_;
  std::vector<std::pair<index_t, int>> bedge_owner_;

  // flat AABB tree (implicit binary layout over a cell permutation)
  struct BBox {
    double rlo, rhi, zlo, zhi;
  };
  struct BNode {
    BBox box;
    index_t begin, end;  // range into tree_cells_
    index_t left = -1, right = -1;
  };
  std::vector<BNode> tree_;
  std::vector<index_t> tree_cells_;
};

/// Uniform triangulation of [rmin,rmax] x [zmin,zmax]: nr x nz rectangles,
/// each split by the diagonal from the low corner to the high corner.
/// Requires rmin > 0 (the domain must exclude the symmetry axis).
Mesh2D build_structured_mesh(double rmin, double rmax, double zmin, double zmax,
                             index_t nr, index_t nz);

/// Shifts every node by alpha*sin(coordinate) in each direction. Connectivity
/// is unchanged; throws if any cell area becomes non-positive.
Mesh2D perturb_mesh(const Mesh2D &mesh, double alpha);

/// One newest-vertex-bisection sweep per pass: every cell whose vertex psi
/// values straddle iso is bisected, with closure bisections restoring
/// conformity. psi is re-interpolated linearly onto new vertices and returned
/// alongside the refined mesh.
struct RefinedMesh {
  Mesh2D mesh;
  std::vector<double> psi;
};
RefinedMesh refine_along_levelset(const Mesh2D &mesh, const std::vector<double> &psi,
                                  double iso, int passes);

/// Band variant: flags every cell whose vertex psi range intersects
/// [psi_lo, psi_hi]. Used for refinement along a flux band rather than a
/// single level line.
RefinedMesh refine_along_band(const Mesh2D &mesh, const std::vector<double> &psi,
                              double psi_lo, double psi_hi, int sweeps);

}  // namespace gsmhd
