#include "stokesctrl/manufactured.hpp"

#include <cmath>
#include <stdexcept>

#include "stokesctrl/optimizer.hpp"

namespace stokesctrl {

namespace {
constexpr double PI = 3.141592653589793238462643383279502884;
}

ExactCase make_case(Domain domain) {
  ExactCase c;
  c.domain = domain;
  c.rho = 1e-2;
  if (domain == Domain::UnitSquare) {
    c.bounds.ya = {-4.0, 0.0};
    c.bounds.yb = {0.0, 2.5};
    c.u = [](double x, double y) {
      return Vec2{-std::exp(x) * (y * std::cos(y) + std::sin(y)),
                  std::exp(x) * y * std::sin(y)};
    };
    c.grad_u1 = [](double x, double y) {
      return Vec2{-std::exp(x) * (y * std::cos(y) + std::sin(y)),
                  -std::exp(x) * (2 * std::cos(y) - y * std::sin(y))};
    };
    c.grad_u2 = [](double x, double y) {
      return Vec2{std::exp(x) * y * std::sin(y),
                  std::exp(x) * (std::sin(y) + y * std::cos(y))};
    };
    c.p = [](double x, double y) { return std::sin(2 * PI * x) * std::sin(2 * PI * y); };
    c.phi = [](double x, double y) {
      double sx = std::sin(PI * x), sy = std::sin(PI * y);
      return Vec2{0.5 * sx * sx * std::sin(2 * PI * y),
                  -0.5 * sy * sy * std::sin(2 * PI * x)};
    };
    c.grad_phi1 = [](double x, double y) {
      double sx = std::sin(PI * x);
      return Vec2{0.5 * PI * std::sin(2 * PI * x) * std::sin(2 * PI * y),
                  PI * sx * sx * std::cos(2 * PI * y)};
    };
    c.grad_phi2 = [](double x, double y) {
      double sy = std::sin(PI * y);
      return Vec2{-PI * sy * sy * std::cos(2 * PI * x),
                  -0.5 * PI * std::sin(2 * PI * y) * std::sin(2 * PI * x)};
    };
    c.r = c.p;
    // f = -lap(u) + grad p with lap(u) = (2 e^x sin y, 2 e^x cos y)
    c.f = [](double x, double y) {
      return Vec2{-2 * std::exp(x) * std::sin(y) + 2 * PI * std::cos(2 * PI * x) * std::sin(2 * PI * y),
                  -2 * std::exp(x) * std::cos(y) + 2 * PI * std::sin(2 * PI * x) * std::cos(2 * PI * y)};
    };
    // u_d = u + lap(phi) + grad r with lap(phi1) = pi^2 sin(2 pi y)(2 cos(2 pi x) - 1)
    auto u = c.u;
    c.u_d = [u](double x, double y) {
      Vec2 v = u(x, y);
      double lap1 = PI * PI * std::sin(2 * PI * y) * (2 * std::cos(2 * PI * x) - 1);
      double lap2 = -PI * PI * std::sin(2 * PI * x) * (2 * std::cos(2 * PI * y) - 1);
      return Vec2{v.x + lap1 + 2 * PI * std::cos(2 * PI * x) * std::sin(2 * PI * y),
                  v.y + lap2 + 2 * PI * std::sin(2 * PI * x) * std::cos(2 * PI * y)};
    };
  } else if (domain == Domain::LShape) {
    c.bounds.ya = {-0.6, -0.6};
    c.bounds.yb = {0.6, 0.6};
    c.u = [](double x, double y) {
      double sx = std::sin(PI * x), sy = std::sin(PI * y);
      return Vec2{0.5 * sx * sx * std::sin(2 * PI * y),
                  -0.5 * sy * sy * std::sin(2 * PI * x)};
    };
    c.grad_u1 = [](double x, double y) {
      double sx = std::sin(PI * x);
      return Vec2{0.5 * PI * std::sin(2 * PI * x) * std::sin(2 * PI * y),
                  PI * sx * sx * std::cos(2 * PI * y)};
    };
    c.grad_u2 = [](double x, double y) {
      double sy = std::sin(PI * y);
      return Vec2{-PI * sy * sy * std::cos(2 * PI * x),
                  -0.5 * PI * std::sin(2 * PI * y) * std::sin(2 * PI * x)};
    };
    c.p = [](double x, double y) { return std::sin(2 * PI * x) * std::sin(2 * PI * y); };
    c.r = c.p;
    c.phi = [](double x, double y) {
      double sx = std::sin(2 * PI * x), sy = std::sin(2 * PI * y);
      return Vec2{0.5 * sx * sx * std::sin(4 * PI * y),
                  -0.5 * sy * sy * std::sin(4 * PI * x)};
    };
    c.grad_phi1 = [](double x, double y) {
      double sx = std::sin(2 * PI * x);
      return Vec2{PI * std::sin(4 * PI * x) * std::sin(4 * PI * y),
                  2 * PI * sx * sx * std::cos(4 * PI * y)};
    };
    c.grad_phi2 = [](double x, double y) {
      double sy = std::sin(2 * PI * y);
      return Vec2{-2 * PI * sy * sy * std::cos(4 * PI * x),
                  -PI * std::sin(4 * PI * y) * std::sin(4 * PI * x)};
    };
    // lap(u1) = pi^2 sin(2 pi y)(2 cos(2 pi x) - 1), mirrored for u2
    c.f = [](double x, double y) {
      return Vec2{-PI * PI * std::sin(2 * PI * y) * (2 * std::cos(2 * PI * x) - 1)
                      + 2 * PI * std::cos(2 * PI * x) * std::sin(2 * PI * y),
                  PI * PI * std::sin(2 * PI * x) * (2 * std::cos(2 * PI * y) - 1)
                      + 2 * PI * std::sin(2 * PI * x) * std::cos(2 * PI * y)};
    };
    // lap(phi1) = 4 pi^2 sin(4 pi y)(2 cos(4 pi x) - 1), mirrored for phi2
    auto u = c.u;
    c.u_d = [u](double x, double y) {
      Vec2 v = u(x, y);
      double lap1 = 4 * PI * PI * std::sin(4 * PI * y) * (2 * std::cos(4 * PI * x) - 1);
      double lap2 = -4 * PI * PI * std::sin(4 * PI * x) * (2 * std::cos(4 * PI * y) - 1);
      return Vec2{v.x + lap1 + 2 * PI * std::cos(2 * PI * x) * std::sin(2 * PI * y),
                  v.y + lap2 + 2 * PI * std::sin(2 * PI * x) * std::cos(2 * PI * y)};
    };
  } else {
    throw std::invalid_argument("make_case: no manufactured solution for this domain");
  }
  c.bounds.validate(true);
  return c;
}

namespace {

struct QuadPoints {
  // physical quadrature points and P1 basis values per fine triangle
  const TwoLevelMesh& mesh;
  const QuadratureRule& quad;
  std::vector<ElementGeometry> geom;
  QuadPoints(const FunctionSpaces& spaces, const QuadratureRule& q)
      : mesh(*spaces.mesh), quad(q), geom(element_geometry(mesh)) {}

  template <class Fn>
  void each(Fn&& fn) const {
    for (size_t t = 0; t < mesh.tris.size(); ++t) {
      const Tri& tri = mesh.tris[t];
      const Vec2 &a = mesh.verts[tri[0]], &b = mesh.verts[tri[1]], &c = mesh.verts[tri[2]];
      for (size_t q = 0; q < quad.points.size(); ++q) {
        const auto& l = quad.points[q];
        double x = l[0] * a.x + l[1] * b.x + l[2] * c.x;
        double y = l[0] * a.y + l[1] * b.y + l[2] * c.y;
        fn((int)t, tri, l, x, y, quad.weights[q] * geom[t].area);
      }
    }
  }
};

}  // namespace

double h1_error(const FunctionSpaces& spaces, const QuadratureRule& quad,
                const Eigen::VectorXd& uh, const VecFn& grad1, const VecFn& grad2) {
  QuadPoints qp(spaces, quad);
  double e2 = 0.0;
  qp.each([&](int t, const Tri& tri, const std::array<double, 3>&, double x, double y, double w) {
    Vec2 gh1{0, 0}, gh2{0, 0};
    for (int i = 0; i < 3; ++i) {
      gh1.x += uh[2 * tri[i]] * qp.geom[t].grad[i].x;
      gh1.y += uh[2 * tri[i]] * qp.geom[t].grad[i].y;
      gh2.x += uh[2 * tri[i] + 1] * qp.geom[t].grad[i].x;
      gh2.y += uh[2 * tri[i] + 1] * qp.geom[t].grad[i].y;
    }
    Vec2 g1 = grad1(x, y), g2 = grad2(x, y);
    e2 += w * ((g1.x - gh1.x) * (g1.x - gh1.x) + (g1.y - gh1.y) * (g1.y - gh1.y) +
               (g2.x - gh2.x) * (g2.x - gh2.x) + (g2.y - gh2.y) * (g2.y - gh2.y));
  });
  return std::sqrt(e2);
}

double l2_error(const FunctionSpaces& spaces, const QuadratureRule& quad,
                const Eigen::VectorXd& uh, const VecFn& g) {
  QuadPoints qp(spaces, quad);
  double e2 = 0.0;
  qp.each([&](int, const Tri& tri, const std::array<double, 3>& l, double x, double y, double w) {
    Vec2 vh{0, 0};
    for (int i = 0; i < 3; ++i) {
      vh.x += l[i] * uh[2 * tri[i]];
      vh.y += l[i] * uh[2 * tri[i] + 1];
    }
    Vec2 v = g(x, y);
    e2 += w * ((v.x - vh.x) * (v.x - vh.x) + (v.y - vh.y) * (v.y - vh.y));
  });
  return std::sqrt(e2);
}

double l2_norm(const FunctionSpaces& spaces, const QuadratureRule& quad,
               const Eigen::VectorXd& uh) {
  return l2_error(spaces, quad, uh, [](double, double) { return Vec2{0, 0}; });
}

double h1_seminorm(const FunctionSpaces& spaces, const Eigen::VectorXd& uh) {
  auto geom = element_geometry(*spaces.mesh);
  double e2 = 0.0;
  for (size_t t = 0; t < spaces.mesh->tris.size(); ++t) {
    const Tri& tri = spaces.mesh->tris[t];
    Vec2 gh1{0, 0}, gh2{0, 0};
    for (int i = 0; i < 3; ++i) {
      gh1.x += uh[2 * tri[i]] * geom[t].grad[i].x;
      gh1.y += uh[2 * tri[i]] * geom[t].grad[i].y;
      gh2.x += uh[2 * tri[i] + 1] * geom[t].grad[i].x;
      gh2.y += uh[2 * tri[i] + 1] * geom[t].grad[i].y;
    }
    e2 += geom[t].area * (gh1.x * gh1.x + gh1.y * gh1.y + gh2.x * gh2.x + gh2.y * gh2.y);
  }
  return std::sqrt(e2);
}

double pressure_error(const FunctionSpaces& spaces, const QuadratureRule& quad,
                      const Eigen::VectorXd& ph, const ScalarFn& p) {
  QuadPoints qp(spaces, quad);
  double dom_area = 0.0, mean_ex = 0.0;
  Eigen::VectorXd marea = pressure_areas(spaces);
  qp.each([&](int, const Tri&, const std::array<double, 3>&, double x, double y, double w) {
    dom_area += w;
    mean_ex += w * p(x, y);
  });
  mean_ex /= dom_area;
  double mean_h = marea.dot(ph) / dom_area;
  double shift = mean_ex - mean_h;
  const auto& parent = spaces.mesh->parent;
  double e2 = 0.0;
  qp.each([&](int t, const Tri&, const std::array<double, 3>&, double x, double y, double w) {
    double d = p(x, y) - (ph[parent[t]] + shift);
    e2 += w * d * d;
  });
  return std::sqrt(e2);
}

double field_h1_seminorm(const FunctionSpaces& spaces, const QuadratureRule& quad,
                         const VecFn& grad1, const VecFn& grad2) {
  QuadPoints qp(spaces, quad);
  double e2 = 0.0;
  qp.each([&](int, const Tri&, const std::array<double, 3>&, double x, double y, double w) {
    Vec2 g1 = grad1(x, y), g2 = grad2(x, y);
    e2 += w * (g1.x * g1.x + g1.y * g1.y + g2.x * g2.x + g2.y * g2.y);
  });
  return std::sqrt(e2);
}

ErrorRow compute_errors(const OptimalSolution& sol, const ExactCase& c,
                        const FunctionSpaces& spaces, int quad_degree) {
  QuadratureRule quad = triangle_quadrature(quad_degree);
  MeshSizes sz = mesh_sizes(*spaces.mesh);
  ErrorRow row;
  row.h = sz.h;
  row.H = sz.H;
  row.spacing = sz.spacing;
  row.err_u = h1_error(spaces, quad, sol.u, c.grad_u1, c.grad_u2);
  row.err_p = pressure_error(spaces, quad, sol.p, c.p);
  row.err_phi = h1_error(spaces, quad, sol.phi, c.grad_phi1, c.grad_phi2);
  row.err_r = pressure_error(spaces, quad, sol.r, c.r);
  row.err_y = h1_error(spaces, quad, sol.y, c.grad_u1, c.grad_u2);
  return row;
}

void fill_eoc(std::vector<ErrorRow>& rows) {
  for (size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i].h < rows[i - 1].h))
      throw std::invalid_argument("fill_eoc: h must decrease strictly");
    double lr = std::log(rows[i - 1].h / rows[i].h);
    auto ord = [&](double e0, double e1) {
      return (e0 > 0 && e1 > 0) ? std::log(e0 / e1) / lr : 0.0;
    };
    rows[i].ord_u = ord(rows[i - 1].err_u, rows[i].err_u);
    rows[i].ord_p = ord(rows[i - 1].err_p, rows[i].err_p);
    rows[i].ord_phi = ord(rows[i - 1].err_phi, rows[i].err_phi);
    rows[i].ord_r = ord(rows[i - 1].err_r, rows[i].err_r);
    rows[i].ord_y = ord(rows[i - 1].err_y, rows[i].err_y);
  }
}

}  // namespace stokesctrl
