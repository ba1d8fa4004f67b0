#include "stokesctrl/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace stokesctrl {

double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

double domain_area(Domain domain) {
  return domain == Domain::LShape ? 0.75 : 1.0;
}

namespace {

// Structured block grid on an integer lattice, deduplicated through the
// lattice coordinates so shared block interfaces match exactly.
struct LatticeGrid {
  std::map<std::pair<int, int>, int> id;
  std::vector<Vec2> verts;
  double scale;  // lattice unit -> physical

  int vertex(int i, int j) {
    auto [it, fresh] = id.try_emplace({i, j}, (int)verts.size());
    if (fresh) verts.push_back({i * scale, j * scale});
    return it->second;
  }

  // n x n cells with lower-left lattice corner (bi, bj); every cell split by
  // the lower-left -> upper-right diagonal (fixed orientation, deterministic)
  void add_block(int bi, int bj, int n, std::vector<Tri>& tris) {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        int v00 = vertex(bi + i, bj + j), v10 = vertex(bi + i + 1, bj + j);
        int v01 = vertex(bi + i, bj + j + 1), v11 = vertex(bi + i + 1, bj + j + 1);
        tris.push_back({v00, v10, v11});
        tris.push_back({v00, v11, v01});
      }
  }
};

}  // namespace

CoarseMesh build_coarse(Domain domain, int n) {
  if (n < 1) throw std::invalid_argument("build_coarse: n must be >= 1");
  CoarseMesh m;
  m.domain = domain;
  m.n = n;
  LatticeGrid grid;
  if (domain == Domain::LShape) {
    // (-1/2,1/2)^2 minus the lower-right quadrant; three half-unit blocks of
    // n x n cells each, lattice unit 1/(2n)
    grid.scale = 1.0 / (2 * n);
    grid.add_block(-n, 0, n, m.tris);   // upper left
    grid.add_block(0, 0, n, m.tris);    // upper right
    grid.add_block(-n, -n, n, m.tris);  // lower left
  } else {
    // unit square, n x n cells
    grid.scale = 1.0 / n;
    grid.add_block(0, 0, n, m.tris);
  }
  m.verts = std::move(grid.verts);
  return m;
}

TwoLevelMesh refine_red(const CoarseMesh& coarse) {
  TwoLevelMesh m;
  m.domain = coarse.domain;
  m.n = coarse.n;
  m.cverts = coarse.verts;
  m.ctris = coarse.tris;
  m.verts = coarse.verts;
  for (const Tri& t : coarse.tris) {
    double area = triangle_area(coarse.verts[t[0]], coarse.verts[t[1]], coarse.verts[t[2]]);
    if (area <= 0.0) throw std::invalid_argument("refine_red: non-CCW or degenerate triangle");
  }
  auto mid = [&](int a, int b) {
    Edge e{std::min(a, b), std::max(a, b)};
    auto [it, fresh] = m.midpoint.try_emplace(e, (int)m.verts.size());
    if (fresh)
      m.verts.push_back({0.5 * (m.verts[a].x + m.verts[b].x),
                         0.5 * (m.verts[a].y + m.verts[b].y)});
    return it->second;
  };
  for (int k = 0; k < (int)coarse.tris.size(); ++k) {
    const Tri& t = coarse.tris[k];
    int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
    m.tris.push_back({t[0], ab, ca});
    m.tris.push_back({ab, t[1], bc});
    m.tris.push_back({ca, bc, t[2]});
    m.tris.push_back({ab, bc, ca});
    for (int c = 0; c < 4; ++c) m.parent.push_back(k);
  }
  // boundary edges: fine edges incident to exactly one triangle
  std::map<Edge, int> count;
  for (const Tri& t : m.tris)
    for (int e = 0; e < 3; ++e) {
      int a = t[e], b = t[(e + 1) % 3];
      count[Edge{std::min(a, b), std::max(a, b)}]++;
    }
  for (const auto& [e, c] : count) {
    if (c == 1) m.boundary_edges.push_back(e);
    if (c > 2) throw std::runtime_error("refine_red: non-conforming edge");
  }
  return m;
}

namespace {

// Tag one boundary edge of the preset domain by its midpoint; both endpoints
// must lie on the same tagged straight segment.
BoundaryTag tag_edge(Domain domain, const Vec2& a, const Vec2& b) {
  Vec2 mid{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
  bool horizontal = a.y == b.y, vertical = a.x == b.x;
  if (!horizontal && !vertical)
    throw std::runtime_error("classify_boundary: edge not on a tagged segment");
  switch (domain) {
    case Domain::UnitSquare:
      // Gamma_D = (0,1) x {0}, control on the rest
      return (horizontal && mid.y == 0.0) ? BoundaryTag::Dirichlet : BoundaryTag::Control;
    case Domain::LShape:
      // Gamma_D = (0,1/2) x {0}  union  {0} x (-1/2,0); control on the rest
      if (horizontal && mid.y == 0.0 && mid.x > 0.0) return BoundaryTag::Dirichlet;
      if (vertical && mid.x == 0.0 && mid.y < 0.0) return BoundaryTag::Dirichlet;
      return BoundaryTag::Control;
    case Domain::MixedSquare:
      // control on the left side, Neumann on the right, Dirichlet top/bottom
      if (vertical && mid.x == 0.0) return BoundaryTag::Control;
      if (vertical && mid.x == 1.0) return BoundaryTag::Neumann;
      return BoundaryTag::Dirichlet;
  }
  throw std::logic_error("unreachable");
}

}  // namespace

BoundaryInfo classify_boundary(const TwoLevelMesh& mesh) {
  BoundaryInfo b;
  int nv = (int)mesh.verts.size();
  b.on_dirichlet.assign(nv, false);
  b.on_control.assign(nv, false);
  b.on_neumann.assign(nv, false);
  for (const Edge& e : mesh.boundary_edges) {
    BoundaryTag tag = tag_edge(mesh.domain, mesh.verts[e.a], mesh.verts[e.b]);
    b.edge_tag.push_back(tag);
    auto& mask = tag == BoundaryTag::Dirichlet ? b.on_dirichlet
               : tag == BoundaryTag::Control   ? b.on_control
                                               : b.on_neumann;
    mask[e.a] = mask[e.b] = true;
  }
  for (int v = 0; v < nv; ++v)
    if (b.on_control[v] && !b.on_dirichlet[v] && !b.on_neumann[v])
      b.control_verts.push_back(v);
  return b;
}

namespace {

double max_diameter(const std::vector<Vec2>& verts, const std::vector<Tri>& tris) {
  double d = 0.0;
  for (const Tri& t : tris)
    for (int e = 0; e < 3; ++e) {
      const Vec2& a = verts[t[e]];
      const Vec2& b = verts[t[(e + 1) % 3]];
      d = std::max(d, std::hypot(b.x - a.x, b.y - a.y));
    }
  return d;
}

}  // namespace

MeshSizes mesh_sizes(const TwoLevelMesh& mesh) {
  MeshSizes s;
  s.h = max_diameter(mesh.verts, mesh.tris);
  s.H = max_diameter(mesh.cverts, mesh.ctris);
  double mn = s.h;
  for (const Tri& t : mesh.tris)
    for (int e = 0; e < 3; ++e) {
      const Vec2& a = mesh.verts[t[e]];
      const Vec2& b = mesh.verts[t[(e + 1) % 3]];
      mn = std::min(mn, std::hypot(b.x - a.x, b.y - a.y));
    }
  s.spacing = mn;
  return s;
}

void write_vtk_mesh(const TwoLevelMesh& mesh, const BoundaryInfo& binfo,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "# vtk DataFile Version 3.0\ntwo-level mesh\nASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.verts.size() << " double\n";
  for (const Vec2& v : mesh.verts) out << v.x << " " << v.y << " 0\n";
  out << "CELLS " << mesh.tris.size() << " " << 4 * mesh.tris.size() << "\n";
  for (const Tri& t : mesh.tris) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "CELL_TYPES " << mesh.tris.size() << "\n";
  for (size_t i = 0; i < mesh.tris.size(); ++i) out << "5\n";
  out << "CELL_DATA " << mesh.tris.size() << "\nSCALARS parent int 1\nLOOKUP_TABLE default\n";
  for (int p : mesh.parent) out << p << "\n";
  out << "POINT_DATA " << mesh.verts.size() << "\nSCALARS boundary_tag int 1\nLOOKUP_TABLE default\n";
  std::vector<bool> is_ctrl(mesh.verts.size(), false);
  for (int v : binfo.control_verts) is_ctrl[v] = true;
  for (size_t v = 0; v < mesh.verts.size(); ++v) {
    int tag = binfo.on_dirichlet[v] ? 1 : is_ctrl[v] ? 2 : binfo.on_neumann[v] ? 3 : 0;
    out << tag << "\n";
  }
}

}  // namespace stokesctrl
