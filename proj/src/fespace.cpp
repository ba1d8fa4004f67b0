#include "stokesctrl/fespace.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace stokesctrl {

void ControlBounds::validate(bool has_dirichlet) const {
  for (int c = 0; c < 2; ++c) {
    if (!(ya[c] <= yb[c])) throw std::invalid_argument("ControlBounds: ya > yb");
    if (has_dirichlet && !(ya[c] <= 0.0 && 0.0 <= yb[c]))
      throw std::invalid_argument("ControlBounds: zero trace infeasible (need ya <= 0 <= yb)");
  }
}

FunctionSpaces build_spaces(const TwoLevelMesh& mesh, const BoundaryInfo& binfo) {
  FunctionSpaces s;
  s.mesh = &mesh;
  int nv = (int)mesh.verts.size();
  s.n_vdofs = 2 * nv;
  s.n_pressure = (int)mesh.ctris.size();
  s.v_free.assign(s.n_vdofs, false);
  s.q_free.assign(s.n_vdofs, false);
  bool any_neumann = false;
  for (BoundaryTag t : binfo.edge_tag) any_neumann |= (t == BoundaryTag::Neumann);
  s.pressure_zero_mean = !any_neumann;
  for (BoundaryTag t : binfo.edge_tag)
    s.has_dirichlet |= (t == BoundaryTag::Dirichlet);
  for (int v = 0; v < nv; ++v) {
    bool vfree = !binfo.on_dirichlet[v] && !binfo.on_control[v];
    bool qfree = !binfo.on_dirichlet[v] && !binfo.on_neumann[v];
    for (int c = 0; c < 2; ++c) {
      s.v_free[2 * v + c] = vfree;
      s.q_free[2 * v + c] = qfree;
    }
  }
  for (int d = 0; d < s.n_vdofs; ++d) {
    if (s.v_free[d]) s.v_free_idx.push_back(d);
    if (s.q_free[d]) s.q_free_idx.push_back(d);
  }
  s.control_verts = binfo.control_verts;
  for (int v : s.control_verts) {
    s.control_dofs.push_back(2 * v);
    s.control_dofs.push_back(2 * v + 1);
  }
  for (int d : s.control_dofs)
    if (!s.q_free[d]) throw std::logic_error("control DOF outside Q_h-free set");
  return s;
}

Eigen::VectorXd interpolate_nodal(const VecFn& field, const FunctionSpaces& spaces,
                                  VelocitySubspace sub) {
  const auto& verts = spaces.mesh->verts;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(spaces.n_vdofs);
  for (int v = 0; v < (int)verts.size(); ++v) {
    Vec2 val = field(verts[v].x, verts[v].y);
    u[2 * v] = val.x;
    u[2 * v + 1] = val.y;
  }
  if (sub != VelocitySubspace::Full) {
    const auto& mask = sub == VelocitySubspace::Vh ? spaces.v_free : spaces.q_free;
    for (int d = 0; d < spaces.n_vdofs; ++d)
      if (!mask[d]) u[d] = 0.0;
  }
  return u;
}

std::vector<ElementGeometry> element_geometry(const TwoLevelMesh& mesh) {
  std::vector<ElementGeometry> g(mesh.tris.size());
  for (size_t t = 0; t < mesh.tris.size(); ++t) {
    const Tri& tri = mesh.tris[t];
    const Vec2 &a = mesh.verts[tri[0]], &b = mesh.verts[tri[1]], &c = mesh.verts[tri[2]];
    double area = triangle_area(a, b, c);
    if (area <= 0.0) throw std::runtime_error("degenerate triangle");
    g[t].area = area;
    // grad lambda_i = perpendicular of the opposite edge / (2 area)
    double s = 1.0 / (2.0 * area);
    g[t].grad[0] = {s * (b.y - c.y), s * (c.x - b.x)};
    g[t].grad[1] = {s * (c.y - a.y), s * (a.x - c.x)};
    g[t].grad[2] = {s * (a.y - b.y), s * (b.x - a.x)};
  }
  return g;
}

Vec2 evaluate_p1(const FunctionSpaces& spaces, const Eigen::VectorXd& coef,
                 int tri, const std::array<double, 3>& bary) {
  const Tri& t = spaces.mesh->tris.at(tri);
  Vec2 out{0.0, 0.0};
  for (int i = 0; i < 3; ++i) {
    out.x += bary[i] * coef[2 * t[i]];
    out.y += bary[i] * coef[2 * t[i] + 1];
  }
  return out;
}

Eigen::Matrix2d p1_gradient(const FunctionSpaces& spaces, const Eigen::VectorXd& coef,
                            int tri, const std::vector<ElementGeometry>& geom) {
  const Tri& t = spaces.mesh->tris.at(tri);
  Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 2; ++c) {
      g(c, 0) += coef[2 * t[i] + c] * geom[tri].grad[i].x;
      g(c, 1) += coef[2 * t[i] + c] * geom[tri].grad[i].y;
    }
  return g;
}

double evaluate_p0(const Eigen::VectorXd& coef, int coarse_tri) {
  return coef[coarse_tri];
}

void write_csv_point_fields(
    const FunctionSpaces& spaces,
    const std::vector<std::pair<std::string, const Eigen::VectorXd*>>& fields,
    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "#schema=1\nvertex,x,y";
  for (const auto& [name, _] : fields) out << "," << name << "1," << name << "2";
  out << "\n";
  // full precision: field dumps must reproduce recomputed functionals exactly
  char buf[96];
  const auto& verts = spaces.mesh->verts;
  for (int v = 0; v < (int)verts.size(); ++v) {
    out << v;
    snprintf(buf, sizeof buf, ",%.17g,%.17g", verts[v].x, verts[v].y);
    out << buf;
    for (const auto& [_, vec] : fields) {
      snprintf(buf, sizeof buf, ",%.17g,%.17g", (*vec)[2 * v], (*vec)[2 * v + 1]);
      out << buf;
    }
    out << "\n";
  }
}

void write_csv_cell_fields(
    const FunctionSpaces& spaces,
    const std::vector<std::pair<std::string, const Eigen::VectorXd*>>& fields,
    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "#schema=1\ncell";
  for (const auto& [name, _] : fields) out << "," << name;
  out << "\n";
  char buf[48];
  for (int k = 0; k < spaces.n_pressure; ++k) {
    out << k;
    for (const auto& [_, vec] : fields) {
      snprintf(buf, sizeof buf, ",%.17g", (*vec)[k]);
      out << buf;
    }
    out << "\n";
  }
}

void write_vtk_solution(
    const FunctionSpaces& spaces,
    const std::vector<std::pair<std::string, const Eigen::VectorXd*>>& point_fields,
    const std::vector<std::pair<std::string, const Eigen::VectorXd*>>& cell_fields,
    const std::string& path) {
  const TwoLevelMesh& mesh = *spaces.mesh;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "# vtk DataFile Version 3.0\ndiscrete fields\nASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.verts.size() << " double\n";
  for (const Vec2& v : mesh.verts) out << v.x << " " << v.y << " 0\n";
  out << "CELLS " << mesh.tris.size() << " " << 4 * mesh.tris.size() << "\n";
  for (const Tri& t : mesh.tris) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "CELL_TYPES " << mesh.tris.size() << "\n";
  for (size_t i = 0; i < mesh.tris.size(); ++i) out << "5\n";
  if (!point_fields.empty()) {
    out << "POINT_DATA " << mesh.verts.size() << "\n";
    for (const auto& [name, vec] : point_fields) {
      out << "VECTORS " << name << " double\n";
      for (size_t v = 0; v < mesh.verts.size(); ++v)
        out << (*vec)[2 * v] << " " << (*vec)[2 * v + 1] << " 0\n";
    }
  }
  if (!cell_fields.empty()) {
    // coarse cell data expanded to the fine cells through the parent map
    out << "CELL_DATA " << mesh.tris.size() << "\n";
    for (const auto& [name, vec] : cell_fields) {
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (size_t t = 0; t < mesh.tris.size(); ++t)
        out << (*vec)[mesh.parent[t]] << "\n";
    }
  }
}

}  // namespace stokesctrl
