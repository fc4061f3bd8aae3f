#include "mesh.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

namespace gsmhd {

Mesh2D::Mesh2D(std::vector<Vec2> vertices, std::vector<std::array<index_t, 3>> cells,
               std::vector<int> region_tags, std::vector<int> boundary_tags_in)
    : verts_(std::move(vertices)), cells_(std::move(cells)), region_(std::move(region_tags)) {
  if (region_.empty()) region_.assign(cells_.size(), 1);
  if (region_.size() != cells_.size())
    throw std::invalid_argument("mesh: region tag count does not match cell count");
  for (const auto &v : verts_)
    if (!(v.r > 0.0))
      throw std::invalid_argument("mesh: vertex with r <= 0 (domain must exclude the axis)");
  build_topology();
  if (!boundary_tags_in.empty()) {
    if (boundary_tags_in.size() != boundary_edges_.size())
      throw std::invalid_argument("mesh: boundary tag count does not match boundary edge count");
    for (std::size_t i = 0; i < boundary_edges_.size(); ++i)
      boundary_tags_[boundary_edges_[i]] = boundary_tags_in[i];
  }
  build_bbox_tree();
}

void Mesh2D::build_topology() {
  std::map<std::pair<index_t, index_t>, index_t> edge_of;
  cell_edges_.assign(cells_.size(), {});
  cell_signs_.assign(cells_.size(), {});
  for (index_t c = 0; c < num_cells(); ++c) {
    if (cell_area(c) <= 0.0)
      throw std::invalid_argument("mesh: cell " + std::to_string(c) +
                                  " is degenerate or clockwise");
    const auto &cv = cells_[c];
    for (int k = 0; k < 3; ++k) {
      index_t p = cv[k], q = cv[(k + 1) % 3];
      auto key = std::minmax(p, q);
      auto it = edge_of.find(key);
      index_t e;
      if (it == edge_of.end()) {
        e = num_edges();
        edge_of.emplace(key, e);
        edges_.push_back({key.first, key.second});
      } else {
        e = it->second;
      }
      cell_edges_[c][k] = e;
      cell_signs_[c][k] = (p < q) ? 1 : -1;
    }
  }
  edge_cell_count_.assign(edges_.size(), 0);
  bedge_owner_.assign(edges_.size(), {-1, -1});
  for (index_t c = 0; c < num_cells(); ++c)
    for (int k = 0; k < 3; ++k) {
      index_t e = cell_edges_[c][k];
      edge_cell_count_[e]++;
      bedge_owner_[e] = {c, k};  // survives only for single-cell edges
    }
  boundary_tags_.assign(edges_.size(), 0);
  for (index_t e = 0; e < num_edges(); ++e) {
    if (edge_cell_count_[e] == 1) {
      boundary_edges_.push_back(e);
      boundary_tags_[e] = 1;
    } else if (edge_cell_count_[e] != 2) {
      throw std::invalid_argument("mesh: non-manifold edge " + std::to_string(e));
    }
  }
}

double Mesh2D::cell_area(index_t c) const {
  auto p = cell_points(c);
  return 0.5 * cross2(p[1] - p[0], p[2] - p[0]);
}

Vec2 Mesh2D::cell_centroid(index_t c) const {
  auto p = cell_points(c);
  return {(p[0].r + p[1].r + p[2].r) / 3.0, (p[0].z + p[1].z + p[2].z) / 3.0};
}

std::array<Vec2, 3> Mesh2D::barycentric_gradients(index_t c) const {
  auto p = cell_points(c);
  double inv2A = 1.0 / (2.0 * cell_area(c));
  std::array<Vec2, 3> g;
  g[1] = Vec2{p[2].z - p[0].z, p[0].r - p[2].r} * inv2A;
  g[2] = Vec2{p[0].z - p[1].z, p[1].r - p[0].r} * inv2A;
  g[0] = Vec2{0, 0} - g[1] - g[2];
  return g;
}

Vec2 Mesh2D::boundary_normal(index_t e) const {
  auto [c, k] = bedge_owner_[e];
  const auto &cv = cells_[c];
  Vec2 a = verts_[cv[k]], b = verts_[cv[(k + 1) % 3]];
  Vec2 t = (b - a) * (1.0 / norm(b - a));
  return {t.z, -t.r};  // outward for counterclockwise cells
}

double Mesh2D::edge_length(index_t e) const {
  return norm(verts_[edges_[e].v1] - verts_[edges_[e].v0]);
}

double Mesh2D::min_r() const {
  double m = std::numeric_limits<double>::max();
  for (const auto &v : verts_) m = std::min(m, v.r);
  return m;
}

double Mesh2D::max_r() const {
  double m = std::numeric_limits<double>::lowest();
  for (const auto &v : verts_) m = std::max(m, v.r);
  return m;
}

namespace {

std::array<double, 3> barycentric(const std::array<Vec2, 3> &p, const Vec2 &x) {
  double det = cross2(p[0] - p[2], p[1] - p[2]);
  double l0 = cross2(x - p[2], p[1] - p[2]) / det;
  double l1 = cross2(p[0] - p[2], x - p[2]) / det;
  return {l0, l1, 1.0 - l0 - l1};
}

double point_triangle_dist2(const std::array<Vec2, 3> &p, const Vec2 &x) {
  auto seg = [&](const Vec2 &a, const Vec2 &b) {
    Vec2 d = b - a;
    double t = dot(x - a, d) / dot(d, d);
    t = std::clamp(t, 0.0, 1.0);
    Vec2 q = a + t * d;
    return dot(x - q, x - q);
  };
  auto l = barycentric(p, x);
  if (l[0] >= 0 && l[1] >= 0 && l[2] >= 0) return 0.0;
  return std::min({seg(p[0], p[1]), seg(p[1], p[2]), seg(p[2], p[0])});
}

}  // namespace

void Mesh2D::build_bbox_tree() {
  tree_cells_.resize(cells_.size());
  std::iota(tree_cells_.begin(), tree_cells_.end(), index_t{0});
  tree_.clear();
  if (cells_.empty()) return;

  auto cell_box = [&](index_t c) {
    auto p = cell_points(c);
    BBox b{p[0].r, p[0].r, p[0].z, p[0].z};
    for (int i = 1; i < 3; ++i) {
      b.rlo = std::min(b.rlo, p[i].r);
      b.rhi = std::max(b.rhi, p[i].r);
      b.zlo = std::min(b.zlo, p[i].z);
      b.zhi = std::max(b.zhi, p[i].z);
    }
    return b;
  };

  struct Todo {
    index_t node, begin, end;
  };
  tree_.push_back({});
  std::vector<Todo> stack{{0, 0, num_cells()}};
  constexpr index_t kLeafSize = 8;
  while (!stack.empty()) {
    auto [ni, begin, end] = stack.back();
    stack.pop_back();
    BBox box = cell_box(tree_cells_[begin]);
    for (index_t i = begin + 1; i < end; ++i) {
      BBox b = cell_box(tree_cells_[i]);
      box.rlo = std::min(box.rlo, b.rlo);
      box.rhi = std::max(box.rhi, b.rhi);
      box.zlo = std::min(box.zlo, b.zlo);
      box.zhi = std::max(box.zhi, b.zhi);
    }
    tree_[ni].box = box;
    tree_[ni].begin = begin;
    tree_[ni].end = end;
    if (end - begin <= kLeafSize) continue;
    bool split_r = (box.rhi - box.rlo) >= (box.zhi - box.zlo);
    index_t mid = (begin + end) / 2;
    std::nth_element(tree_cells_.begin() + begin, tree_cells_.begin() + mid,
                     tree_cells_.begin() + end, [&](index_t a, index_t b) {
                       Vec2 ca = cell_centroid(a), cb = cell_centroid(b);
                       return split_r ? ca.r < cb.r : ca.z < cb.z;
                     });
    tree_[ni].left = static_cast<index_t>(tree_.size());
    tree_.push_back({});
    tree_[ni].right = static_cast<index_t>(tree_.size());
    tree_.push_back({});
    stack.push_back({tree_[ni].left, begin, mid});
    stack.push_back({tree_[ni].right, mid, end});
  }
}

Mesh2D::Location Mesh2D::locate(const Vec2 &p) const {
  constexpr double kInsideTol = 1e-10;
  Location best;
  double best_d2 = std::numeric_limits<double>::max();

  auto box_dist2 = [&](const BBox &b) {
    double dr = std::max({b.rlo - p.r, 0.0, p.r - b.rhi});
    double dz = std::max({b.zlo - p.z, 0.0, p.z - b.zhi});
    return dr * dr + dz * dz;
  };

  std::vector<index_t> stack{0};
  while (!stack.empty()) {
    index_t ni = stack.back();
    stack.pop_back();
    const BNode &n = tree_[ni];
    if (box_dist2(n.box) > best_d2) continue;
    if (n.left < 0) {
      for (index_t i = n.begin; i < n.end; ++i) {
        index_t c = tree_cells_[i];
        auto pts = cell_points(c);
        auto l = barycentric(pts, p);
        double lmin = std::min({l[0], l[1], l[2]});
        if (lmin >= -kInsideTol) {
          best.cell = c;
          best.bary = l;
          best.status =
              (lmin <= kInsideTol) ? LocStatus::on_boundary : LocStatus::inside;
          return best;
        }
        double d2 = point_triangle_dist2(pts, p);
        if (d2 < best_d2) {
          best_d2 = d2;
          best.cell = c;
          best.bary = l;
        }
      }
    } else {
      // visit nearer child first
      double dl = box_dist2(tree_[n.left].box), dr = box_dist2(tree_[n.right].box);
      if (dl < dr) {
        stack.push_back(n.right);
        stack.push_back(n.left);
      } else {
        stack.push_back(n.left);
        stack.push_back(n.right);
      }
    }
  }
  // outside: clamp barycentrics and renormalize
  best.status = LocStatus::outside;
  double s = 0.0;
  for (auto &l : best.bary) {
    l = std::max(l, 0.0);
    s += l;
  }
  for (auto &l : best.bary) l /= s;
  return best;
}

void Mesh2D::check_invariants() const {
  for (index_t c = 0; c < num_cells(); ++c)
    if (cell_area(c) <= 0.0) throw std::runtime_error("mesh invariant: non-positive cell area");
  for (index_t e = 0; e < num_edges(); ++e)
    if (edge_cell_count_[e] != 1 && edge_cell_count_[e] != 2)
      throw std::runtime_error("mesh invariant: edge incidence");
  // closed-boundary sanity: sum of length-weighted outward normals vanishes
  Vec2 s{0, 0};
  for (index_t e : boundary_edges_) s += edge_length(e) * boundary_normal(e);
  if (std::abs(s.r) > 1e-12 * num_edges() || std::abs(s.z) > 1e-12 * num_edges())
    throw std::runtime_error("mesh invariant: boundary normal sum");
}

Mesh2D build_structured_mesh(double rmin, double rmax, double zmin, double zmax,
                             index_t nr, index_t nz) {
  if (!(rmin > 0.0)) throw std::invalid_argument("structured mesh: rmin must be > 0");
  if (!(rmax > rmin) || !(zmax > zmin))
    throw std::invalid_argument("structured mesh: degenerate extents");
  if (nr < 1 || nz < 1) throw std::invalid_argument("structured mesh: nr, nz must be >= 1");

  std::vector<Vec2> verts;
  verts.reserve((nr + 1) * (nz + 1));
  for (index_t j = 0; j <= nz; ++j)
    for (index_t i = 0; i <= nr; ++i)
      verts.push_back({rmin + (rmax - rmin) * double(i) / double(nr),
                       zmin + (zmax - zmin) * double(j) / double(nz)});
  auto vid = [&](index_t i, index_t j) { return j * (nr + 1) + i; };
  std::vector<std::array<index_t, 3>> cells;
  cells.reserve(2 * nr * nz);
  for (index_t j = 0; j < nz; ++j)
    for (index_t i = 0; i < nr; ++i) {
      index_t a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      cells.push_back({a, b, c});
      cells.push_back({a, c, d});
    }
  return Mesh2D(std::move(verts), std::move(cells));
}

Mesh2D perturb_mesh(const Mesh2D &mesh, double alpha) {
  std::vector<Vec2> verts(mesh.num_vertices());
  for (index_t v = 0; v < mesh.num_vertices(); ++v) {
    const Vec2 &p = mesh.vertex(v);
    verts[v] = {p.r + alpha * std::sin(p.r), p.z + alpha * std::sin(p.z)};
  }
  std::vector<std::array<index_t, 3>> cells(mesh.num_cells());
  std::vector<int> region(mesh.num_cells());
  for (index_t c = 0; c < mesh.num_cells(); ++c) {
    cells[c] = mesh.cell(c);
    region[c] = mesh.region_tag(c);
    Vec2 a = verts[cells[c][0]], b = verts[cells[c][1]], d = verts[cells[c][2]];
    if (cross2(b - a, d - a) <= 0.0)
      throw std::runtime_error("perturb_mesh: cell " + std::to_string(c) +
                               " has non-positive area after perturbation");
  }
  std::vector<int> btags;
  for (index_t e : mesh.boundary_edges()) btags.push_back(mesh.boundary_tag(e));
  return Mesh2D(std::move(verts), std::move(cells), std::move(region), std::move(btags));
}

namespace {

// Newest-vertex bisection working state. Cells are stored with the peak
// (newest) vertex first; the refinement edge is (v1, v2).
struct Bisector {
  std::vector<Vec2> verts;
  std::vector<double> psi;
  std::vector<std::array<index_t, 3>> cells;
  std::vector<int> region;
  std::vector<char> alive;
  std::map<std::pair<index_t, index_t>, index_t> midpoint;
  std::map<std::pair<index_t, index_t>, int> btag;  // boundary-edge tags by vertex pair

  index_t mid(index_t a, index_t b) {
    auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    index_t m = static_cast<index_t>(verts.size());
    verts.push_back({0.5 * (verts[a].r + verts[b].r), 0.5 * (verts[a].z + verts[b].z)});
    psi.push_back(0.5 * (psi[a] + psi[b]));
    midpoint.emplace(key, m);
    auto bt = btag.find(key);
    if (bt != btag.end()) {
      btag[std::minmax(a, m)] = bt->second;
      btag[std::minmax(m, b)] = bt->second;
    }
    return m;
  }

  void bisect(index_t c) {
    auto [v0, v1, v2] = cells[c];
    index_t m = mid(v1, v2);
    alive[c] = 0;
    cells.push_back({m, v2, v0});
    region.push_back(region[c]);
    alive.push_back(1);
    cells.push_back({m, v0, v1});
    region.push_back(region[c]);
    alive.push_back(1);
  }
};

RefinedMesh run_refinement(const Mesh2D &mesh, const std::vector<double> &psi_in,
                           int sweeps,
                           const std::function<bool(double, double)> &flagged) {
  if (psi_in.size() != static_cast<std::size_t>(mesh.num_vertices()))
    throw std::invalid_argument("refine: psi length does not match vertex count");

  Bisector st;
  st.verts.resize(mesh.num_vertices());
  for (index_t v = 0; v < mesh.num_vertices(); ++v) st.verts[v] = mesh.vertex(v);
  st.psi = psi_in;
  for (index_t e : mesh.boundary_edges()) {
    auto ed = mesh.edge(e);
    st.btag[{ed.v0, ed.v1}] = mesh.boundary_tag(e);
  }
  // orient each cell so the longest edge is the refinement edge
  st.cells.resize(mesh.num_cells());
  st.region.resize(mesh.num_cells());
  st.alive.assign(mesh.num_cells(), 1);
  for (index_t c = 0; c < mesh.num_cells(); ++c) {
    auto cv = mesh.cell(c);
    auto p = mesh.cell_points(c);
    int k = 0;
    double lbest = -1.0;
    for (int i = 0; i < 3; ++i) {
      double l = norm(p[(i + 2) % 3] - p[(i + 1) % 3]);  // edge opposite vertex i
      if (l > lbest) {
        lbest = l;
        k = i;
      }
    }
    st.cells[c] = {cv[k], cv[(k + 1) % 3], cv[(k + 2) % 3]};
    st.region[c] = mesh.region_tag(c);
  }

  for (int pass = 0; pass < sweeps; ++pass) {
    std::vector<char> want(st.cells.size(), 0);
    bool any = false;
    for (std::size_t c = 0; c < st.cells.size(); ++c) {
      if (!st.alive[c]) continue;
      double lo = st.psi[st.cells[c][0]], hi = lo;
      for (int i = 1; i < 3; ++i) {
        lo = std::min(lo, st.psi[st.cells[c][i]]);
        hi = std::max(hi, st.psi[st.cells[c][i]]);
      }
      if (flagged(lo, hi)) {
        want[c] = 1;
        any = true;
      }
    }
    if (!any) break;
    // bisect flagged cells, then close until conforming
    for (;;) {
      bool changed = false;
      std::size_t n = st.cells.size();
      for (std::size_t c = 0; c < n; ++c) {
        if (!st.alive[c]) continue;
        auto key = std::minmax(st.cells[c][1], st.cells[c][2]);
        bool need = (c < want.size() && want[c]) || st.midpoint.count(key) > 0;
        if (need) {
          st.bisect(static_cast<index_t>(c));
          changed = true;
        }
      }
      if (!changed) break;
    }
  }

  std::vector<std::array<index_t, 3>> cells;
  std::vector<int> region;
  for (std::size_t c = 0; c < st.cells.size(); ++c)
    if (st.alive[c]) {
      cells.push_back(st.cells[c]);
      region.push_back(st.region[c]);
    }
  Mesh2D out(st.verts, std::move(cells), std::move(region));
  // reattach inherited boundary tags
  std::vector<int> btags;
  btags.reserve(out.boundary_edges().size());
  for (index_t e : out.boundary_edges()) {
    auto ed = out.edge(e);
    auto it = st.btag.find({ed.v0, ed.v1});
    btags.push_back(it == st.btag.end() ? 1 : it->second);
  }
  std::vector<std::array<index_t, 3>> cells2;
  std::vector<int> region2;
  for (index_t c = 0; c < out.num_cells(); ++c) {
    cells2.push_back(out.cell(c));
    region2.push_back(out.region_tag(c));
  }
  std::vector<Vec2> verts2(st.verts);
  Mesh2D out2(std::move(verts2), std::move(cells2), std::move(region2), std::move(btags));
  out2.check_invariants();
  return {std::move(out2), std::move(st.psi)};
}

}  // namespace

RefinedMesh refine_along_levelset(const Mesh2D &mesh, const std::vector<double> &psi,
                                  double iso, int passes) {
  if (passes < 1) throw std::invalid_argument("refine_along_levelset: passes must be >= 1");
  return run_refinement(mesh, psi, passes,
                        [iso](double lo, double hi) { return lo <= iso && iso <= hi; });
}

RefinedMesh refine_along_band(const Mesh2D &mesh, const std::vector<double> &psi,
                              double psi_lo, double psi_hi, int sweeps) {
  if (sweeps < 1) throw std::invalid_argument("refine_along_band: sweeps must be >= 1");
  return run_refinement(mesh, psi, sweeps, [psi_lo, psi_hi](double lo, double hi) {
    return lo <= psi_hi && hi >= psi_lo;
  });
}

}  // namespace gsmhd
