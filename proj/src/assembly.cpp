#include "stokesctrl/assembly.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace stokesctrl {

namespace {

void push_symmetric_permutations(QuadratureRule& r, double a, double b, double c, double w) {
  std::array<std::array<double, 3>, 6> perms = {{{a, b, c}, {a, c, b}, {b, a, c},
                                                 {b, c, a}, {c, a, b}, {c, b, a}}};
  for (int i = 0; i < 6; ++i) {
    bool dup = false;
    for (int j = 0; j < i && !dup; ++j) dup = perms[i] == perms[j];
    if (!dup) {
      r.points.push_back(perms[i]);
      r.weights.push_back(w);
    }
  }
}

}  // namespace

QuadratureRule triangle_quadrature(int degree) {
  QuadratureRule r;
  r.degree = degree;
  switch (degree) {
    case 1:
      push_symmetric_permutations(r, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0);
      break;
    case 2:
      push_symmetric_permutations(r, 2.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 3);
      break;
    case 4:
      push_symmetric_permutations(r, 0.108103018168070, 0.445948490915965,
                                  0.445948490915965, 0.223381589678011);
      push_symmetric_permutations(r, 0.816847572980459, 0.091576213509771,
                                  0.091576213509771, 0.109951743655322);
      break;
    case 6:
      push_symmetric_permutations(r, 0.501426509658179, 0.249286745170910,
                                  0.249286745170910, 0.116786275726379);
      push_symmetric_permutations(r, 0.873821971016996, 0.063089014491502,
                                  0.063089014491502, 0.050844906370207);
      push_symmetric_permutations(r, 0.053145049844816, 0.310352451033785,
                                  0.636502499121399, 0.082851075618374);
      break;
    case 8:
      push_symmetric_permutations(r, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0.1443156076777872);
      push_symmetric_permutations(r, 0.0814148234145540, 0.4592925882927231,
                                  0.4592925882927231, 0.0950916342672846);
      push_symmetric_permutations(r, 0.6588613844964797, 0.1705693077517602,
                                  0.1705693077517602, 0.1032173705347182);
      push_symmetric_permutations(r, 0.8989055433659379, 0.0505472283170310,
                                  0.0505472283170310, 0.0324584976231980);
      push_symmetric_permutations(r, 0.0083947774099576, 0.2631128296346381,
                                  0.7284923929554043, 0.0272303141744349);
      break;
    default:
      throw std::invalid_argument("triangle_quadrature: degree must be one of {1,2,4,6,8}");
  }
  return r;
}

double symmetry_defect(const SparseMatrix& K) {
  SparseMatrix D = SparseMatrix(K.transpose()) - K;
  double defect = 0.0;
  for (int k = 0; k < D.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(D, k); it; ++it)
      defect = std::max(defect, std::abs(it.value()));
  return defect;
}

namespace {

double max_abs(const SparseMatrix& K) {
  double m = 0.0;
  for (int k = 0; k < K.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(K, k); it; ++it)
      m = std::max(m, std::abs(it.value()));
  return m;
}

void assert_symmetric(const SparseMatrix& K, const char* what) {
  if (symmetry_defect(K) > 1e-13 * std::max(max_abs(K), 1e-300))
    throw std::logic_error(std::string(what) + ": assembled operator not symmetric");
}

}  // namespace

SparseMatrix assemble_stiffness(const FunctionSpaces& spaces) {
  const TwoLevelMesh& mesh = *spaces.mesh;
  auto geom = element_geometry(mesh);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(18 * mesh.tris.size());
  for (size_t t = 0; t < mesh.tris.size(); ++t) {
    const Tri& tri = mesh.tris[t];
    const auto& g = geom[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double a = g.area * (g.grad[i].x * g.grad[j].x + g.grad[i].y * g.grad[j].y);
        for (int c = 0; c < 2; ++c)
          trip.emplace_back(2 * tri[i] + c, 2 * tri[j] + c, a);
      }
  }
  SparseMatrix A(spaces.n_vdofs, spaces.n_vdofs);
  A.setFromTriplets(trip.begin(), trip.end());
  assert_symmetric(A, "stiffness");
  return A;
}

SparseMatrix assemble_mass(const FunctionSpaces& spaces) {
  const TwoLevelMesh& mesh = *spaces.mesh;
  auto geom = element_geometry(mesh);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(18 * mesh.tris.size());
  for (size_t t = 0; t < mesh.tris.size(); ++t) {
    const Tri& tri = mesh.tris[t];
    // exact P1 block: (area/12) * [[2,1,1],[1,2,1],[1,1,2]]
    double s = geom[t].area / 12.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double m = s * (i == j ? 2.0 : 1.0);
        for (int c = 0; c < 2; ++c)
          trip.emplace_back(2 * tri[i] + c, 2 * tri[j] + c, m);
      }
  }
  SparseMatrix M(spaces.n_vdofs, spaces.n_vdofs);
  M.setFromTriplets(trip.begin(), trip.end());
  assert_symmetric(M, "mass");
  return M;
}

SparseMatrix assemble_divergence(const FunctionSpaces& spaces) {
  const TwoLevelMesh& mesh = *spaces.mesh;
  auto geom = element_geometry(mesh);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(6 * mesh.tris.size());
  for (size_t t = 0; t < mesh.tris.size(); ++t) {
    const Tri& tri = mesh.tris[t];
    int K = mesh.parent[t];
    for (int i = 0; i < 3; ++i) {
      trip.emplace_back(K, 2 * tri[i], -geom[t].area * geom[t].grad[i].x);
      trip.emplace_back(K, 2 * tri[i] + 1, -geom[t].area * geom[t].grad[i].y);
    }
  }
  SparseMatrix B(spaces.n_pressure, spaces.n_vdofs);
  B.setFromTriplets(trip.begin(), trip.end());
  return B;
}

Eigen::VectorXd assemble_load(const VecFn& f, const FunctionSpaces& spaces,
                              const QuadratureRule& quad) {
  const TwoLevelMesh& mesh = *spaces.mesh;
  auto geom = element_geometry(mesh);
  Eigen::VectorXd F = Eigen::VectorXd::Zero(spaces.n_vdofs);
  for (size_t t = 0; t < mesh.tris.size(); ++t) {
    const Tri& tri = mesh.tris[t];
    const Vec2 &a = mesh.verts[tri[0]], &b = mesh.verts[tri[1]], &c = mesh.verts[tri[2]];
    for (size_t q = 0; q < quad.points.size(); ++q) {
      const auto& l = quad.points[q];
      double x = l[0] * a.x + l[1] * b.x + l[2] * c.x;
      double y = l[0] * a.y + l[1] * b.y + l[2] * c.y;
      Vec2 v = f(x, y);
      double wq = quad.weights[q] * geom[t].area;
      for (int i = 0; i < 3; ++i) {
        F[2 * tri[i]] += wq * l[i] * v.x;
        F[2 * tri[i] + 1] += wq * l[i] * v.y;
      }
    }
  }
  return F;
}

Eigen::VectorXd assemble_grad_load(const VecFn& grad1, const VecFn& grad2,
                                   const FunctionSpaces& spaces,
                                   const QuadratureRule& quad) {
  const TwoLevelMesh& mesh = *spaces.mesh;
  auto geom = element_geometry(mesh);
  Eigen::VectorXd F = Eigen::VectorXd::Zero(spaces.n_vdofs);
  for (size_t t = 0; t < mesh.tris.size(); ++t) {
    const Tri& tri = mesh.tris[t];
    const Vec2 &a = mesh.verts[tri[0]], &b = mesh.verts[tri[1]], &c = mesh.verts[tri[2]];
    Vec2 mean1{0, 0}, mean2{0, 0};  // quadrature average of each row of grad g
    for (size_t q = 0; q < quad.points.size(); ++q) {
      const auto& l = quad.points[q];
      double x = l[0] * a.x + l[1] * b.x + l[2] * c.x;
      double y = l[0] * a.y + l[1] * b.y + l[2] * c.y;
      Vec2 g1 = grad1(x, y), g2 = grad2(x, y);
      mean1.x += quad.weights[q] * g1.x;
      mean1.y += quad.weights[q] * g1.y;
      mean2.x += quad.weights[q] * g2.x;
      mean2.y += quad.weights[q] * g2.y;
    }
    for (int i = 0; i < 3; ++i) {
      // test-function gradients are constant per triangle
      F[2 * tri[i]] += geom[t].area * (mean1.x * geom[t].grad[i].x + mean1.y * geom[t].grad[i].y);
      F[2 * tri[i] + 1] += geom[t].area * (mean2.x * geom[t].grad[i].x + mean2.y * geom[t].grad[i].y);
    }
  }
  return F;
}

Eigen::VectorXd pressure_areas(const FunctionSpaces& spaces) {
  const TwoLevelMesh& mesh = *spaces.mesh;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(spaces.n_pressure);
  for (size_t t = 0; t < mesh.ctris.size(); ++t) {
    const Tri& tri = mesh.ctris[t];
    m[t] = triangle_area(mesh.cverts[tri[0]], mesh.cverts[tri[1]], mesh.cverts[tri[2]]);
  }
  return m;
}

void dump_operator(std::ostream& out, const SparseMatrix& K) {
  for (int k = 0; k < K.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(K, k); it; ++it)
      out << it.row() << " " << it.col() << " " << it.value() << "\n";
}

}  // namespace stokesctrl
