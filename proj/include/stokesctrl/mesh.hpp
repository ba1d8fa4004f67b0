#pragma once
// Structured two-level triangulations: a coarse mesh of one of the preset
// polygonal domains and its red (midpoint) refinement, plus boundary tagging.

#include <array>
#include <map>
#include <string>
#include <vector>

namespace stokesctrl {

enum class Domain { UnitSquare, LShape, MixedSquare };

// Boundary roles: Dirichlet (velocity pinned to zero), Control (boundary
// control acts here), Neumann (do-nothing).
enum class BoundaryTag { Dirichlet, Control, Neumann };

struct Vec2 {
  double x = 0.0, y = 0.0;
};

using Tri = std::array<int, 3>;  // CCW vertex indices

struct CoarseMesh {
  Domain domain;
  int n = 0;  // subdivision count per unit (square) or half-unit (L) side
  std::vector<Vec2> verts;
  std::vector<Tri> tris;
};

struct Edge {
  int a, b;  // a < b
  bool operator<(const Edge& o) const { return a < o.a || (a == o.a && b < o.b); }
};

struct TwoLevelMesh {
  Domain domain;
  int n = 0;
  // coarse level
  std::vector<Vec2> cverts;
  std::vector<Tri> ctris;
  // fine level; fine vertex ids 0..cverts.size()-1 coincide with coarse ids,
  // midpoints are appended after them
  std::vector<Vec2> verts;
  std::vector<Tri> tris;
  std::vector<int> parent;          // fine tri -> coarse tri (4 children each)
  std::map<Edge, int> midpoint;     // coarse edge -> fine vertex id
  std::vector<Edge> boundary_edges; // fine boundary edges (each in 1 triangle)
};

// Per-vertex boundary classification of the fine mesh.
struct BoundaryInfo {
  std::vector<BoundaryTag> edge_tag;   // parallel to mesh.boundary_edges
  std::vector<bool> on_dirichlet;      // vertex touches a Dirichlet edge
  std::vector<bool> on_control;        // vertex touches a Control edge
  std::vector<bool> on_neumann;        // vertex touches a Neumann edge
  // Control vertices: on Gamma_C and not an endpoint of any Dirichlet or
  // Neumann edge (junction vertices stay pinned). Sorted ascending.
  std::vector<int> control_verts;
};

struct MeshSizes {
  double h;        // max fine triangle diameter
  double H;        // max coarse triangle diameter
  double spacing;  // axis-aligned fine cell side (min fine edge length)
};

CoarseMesh build_coarse(Domain domain, int n);
TwoLevelMesh refine_red(const CoarseMesh& coarse);
BoundaryInfo classify_boundary(const TwoLevelMesh& mesh);
MeshSizes mesh_sizes(const TwoLevelMesh& mesh);

double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c);
double domain_area(Domain domain);

// Legacy ASCII VTK dump of the fine mesh with integer point tags
// (0 interior, 1 Dirichlet-touching, 2 control vertex, 3 Neumann-touching)
// and the parent coarse cell as cell data.
void write_vtk_mesh(const TwoLevelMesh& mesh, const BoundaryInfo& binfo,
                    const std::string& path);

}  // namespace stokesctrl
