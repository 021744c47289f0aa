#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <cstdint>
#include <vector>

#include "meshsim/mesh.hpp"

namespace meshsim::fem {

struct Material {
  double youngs_modulus = 210000.0;  // MPa
  double poisson_ratio = 0.3;
  double thickness = 1.0;            // mm
};

void validate_material(const Material& material);

/// Plane-stress constitutive matrix D(E, nu) acting on [exx, eyy, gxy].
Eigen::Matrix3d plane_stress_matrix(const Material& material);

/// Constant-strain-triangle strain-displacement matrix for a CCW triangle.
Eigen::Matrix<double, 3, 6> strain_displacement(Vec2 a, Vec2 b, Vec2 c);

/// t * A * B^T D B for one triangle; dof order (u0, v0, u1, v1, u2, v2).
Eigen::Matrix<double, 6, 6> element_stiffness(Vec2 a, Vec2 b, Vec2 c, const Material& material);

/// Global 2|V| x 2|V| stiffness, dof 2i = x, 2i + 1 = y of node i.
Eigen::SparseMatrix<double> assemble(const MeshGraph& graph, const Material& material);

/// Per-dof constraints (zero prescribed displacement) and nodal loads.
struct DofBoundary {
  std::vector<std::uint8_t> fixed;
  std::vector<double> load;
};

/// fixed_flag pins both dofs of a node; applied_force becomes the nodal load.
DofBoundary dof_boundary(const NodeConditions& conditions);

struct SolveOptions {
  int direct_max_nodes = 5000;
  double tolerance = 1e-10;
};

struct FemSolution {
  std::vector<Vec2> displacement;
  std::vector<std::array<double, 3>> element_stress;  // sxx, syy, txy
  std::vector<std::array<double, 3>> nodal_stress;    // area-weighted average
  std::vector<double> von_mises;
  std::vector<double> reaction;  // K u - f, nonzero only on fixed dofs
  int iterations = 0;            // 0 for the direct path
  double residual = 0.0;         // ||K u - f|| / ||f|| on the free dofs
};

double von_mises(const std::array<double, 3>& stress);

FemSolution solve(const MeshGraph& graph, const Eigen::SparseMatrix<double>& stiffness,
                  const DofBoundary& boundary, const Material& material, const SolveOptions& options = {});

FemSolution solve(const MeshGraph& graph, const Eigen::SparseMatrix<double>& stiffness,
                  const NodeConditions& conditions, const Material& material, const SolveOptions& options = {});

}  // namespace meshsim::fem
