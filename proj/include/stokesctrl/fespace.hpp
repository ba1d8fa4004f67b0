#pragma once
// Discrete spaces on the two-level mesh: vector P1 on the fine mesh for
// velocity-type fields (V_h zero on closure(Gamma_D u Gamma_C), Q_h zero on
// closure(Gamma_D u Gamma_N)), P0 on the coarse mesh for pressures.
// Vector DOF numbering is vertex-major, component-minor: dof = 2*vertex + comp.

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "stokesctrl/mesh.hpp"

namespace stokesctrl {

using ScalarFn = std::function<double(double, double)>;
using VecFn = std::function<Vec2(double, double)>;

enum class SpaceId { VelocityFine, PressureCoarse };

// Dense DOF array over the full layout of its space; pinned DOFs are stored
// as explicit zeros.
struct CoefficientVector {
  SpaceId space;
  Eigen::VectorXd coef;
};

struct FunctionSpaces {
  const TwoLevelMesh* mesh = nullptr;
  int n_vdofs = 0;     // 2 * fine vertices (full velocity layout)
  int n_pressure = 0;  // coarse triangles
  std::vector<bool> v_free, q_free;       // per velocity DOF
  std::vector<int> v_free_idx, q_free_idx;  // ascending
  std::vector<int> control_dofs;          // by vertex index, then component
  std::vector<int> control_verts;
  bool pressure_zero_mean = false;        // true iff Gamma_N is empty
  bool has_dirichlet = false;             // some boundary edge is Dirichlet
};

// Componentwise control bounds applied at control vertices. Infinite entries
// mean unconstrained.
struct ControlBounds {
  std::array<double, 2> ya{-std::numeric_limits<double>::infinity(),
                           -std::numeric_limits<double>::infinity()};
  std::array<double, 2> yb{std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity()};
  // ya <= yb; when Gamma_D is nonempty the zero trace at junction vertices
  // must be feasible, so ya <= 0 <= yb
  void validate(bool has_dirichlet) const;
};

FunctionSpaces build_spaces(const TwoLevelMesh& mesh, const BoundaryInfo& binfo);

// Nodal (Lagrange) interpolation into the chosen velocity-type subspace:
// free DOFs get the field value at their vertex, pinned DOFs are zero.
enum class VelocitySubspace { Vh, Qh, Full };
Eigen::VectorXd interpolate_nodal(const VecFn& field, const FunctionSpaces& spaces,
                                  VelocitySubspace sub);

// Per-fine-triangle geometry: area and constant P1 basis gradients.
struct ElementGeometry {
  double area;
  std::array<Vec2, 3> grad;
};
std::vector<ElementGeometry> element_geometry(const TwoLevelMesh& mesh);

// P1 evaluation at a barycentric point of a fine triangle.
Vec2 evaluate_p1(const FunctionSpaces& spaces, const Eigen::VectorXd& coef,
                 int tri, const std::array<double, 3>& bary);
// Constant gradient of a P1 vector field on a fine triangle; row c holds
// (d/dx, d/dy) of component c.
Eigen::Matrix2d p1_gradient(const FunctionSpaces& spaces, const Eigen::VectorXd& coef,
                            int tri, const std::vector<ElementGeometry>& geom);
// P0 evaluation: value on a coarse cell.
double evaluate_p0(const Eigen::VectorXd& coef, int coarse_tri);

// Field dumps: CSV (vertex id, x, y, components) and legacy VTK point data.
void write_csv_point_fields(
    const FunctionSpaces& spaces,
    const std::vector<std::pair<std::string, const Eigen::VectorXd*>>& fields,
    const std::string& path);
void write_csv_cell_fields(
    const FunctionSpaces& spaces,
    const std::vector<std::pair<std::string, const Eigen::VectorXd*>>& fields,
    const std::string& path);
void write_vtk_solution(
    const FunctionSpaces& spaces,
    const std::vector<std::pair<std::string, const Eigen::VectorXd*>>& point_fields,
    const std::vector<std::pair<std::string, const Eigen::VectorXd*>>& cell_fields,
    const std::string& path);

}  // namespace stokesctrl
