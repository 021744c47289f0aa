#include "meshsim/fem.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <numeric>
#include <string>

#include "meshsim/errors.hpp"

namespace meshsim::fem {

void validate_material(const Material& m) {
  if (!(m.youngs_modulus > 0.0) || !(m.poisson_ratio >= 0.0 && m.poisson_ratio < 0.5) || !(m.thickness > 0.0))
    throw InvalidArgument("material: need E > 0, 0 <= nu < 0.5, t > 0");
}

Eigen::Matrix3d plane_stress_matrix(const Material& m) {
  const double nu = m.poisson_ratio;
  const double c = m.youngs_modulus / (1.0 - nu * nu);
  Eigen::Matrix3d d;
  d << c, c * nu, 0.0,
       c * nu, c, 0.0,
       0.0, 0.0, c * (1.0 - nu) / 2.0;
  return d;
}

Eigen::Matrix<double, 3, 6> strain_displacement(Vec2 a, Vec2 b, Vec2 c) {
  const double area2 = signed_area2(a, b, c);
  const double by[3] = {b.y - c.y, c.y - a.y, a.y - b.y};
  const double cx[3] = {c.x - b.x, a.x - c.x, b.x - a.x};
  Eigen::Matrix<double, 3, 6> B = Eigen::Matrix<double, 3, 6>::Zero();
  for (int i = 0; i < 3; ++i) {
    B(0, 2 * i) = by[i];
    B(1, 2 * i + 1) = cx[i];
    B(2, 2 * i) = cx[i];
    B(2, 2 * i + 1) = by[i];
  }
  return B / area2;
}

Eigen::Matrix<double, 6, 6> element_stiffness(Vec2 a, Vec2 b, Vec2 c, const Material& m) {
  const double area = 0.5 * signed_area2(a, b, c);
  const auto B = strain_displacement(a, b, c);
  return m.thickness * area * B.transpose() * plane_stress_matrix(m) * B;
}

Eigen::SparseMatrix<double> assemble(const MeshGraph& graph, const Material& material) {
  validate_material(material);
  const int ndof = 2 * graph.num_nodes();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(graph.elements.size() * 36);
  for (int e = 0; e < graph.num_elements(); ++e) {
    const auto& el = graph.elements[e];
    const Vec2 a = graph.nodes[el[0]], b = graph.nodes[el[1]], c = graph.nodes[el[2]];
    if (!(signed_area2(a, b, c) > 0.0))
      throw DegenerateError("assemble: element " + std::to_string(e) + " has non-positive area");
    const auto ke = element_stiffness(a, b, c, material);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        triplets.emplace_back(2 * el[i / 2] + i % 2, 2 * el[j / 2] + j % 2, ke(i, j));
  }
  Eigen::SparseMatrix<double> K(ndof, ndof);
  K.setFromTriplets(triplets.begin(), triplets.end());
  return K;
}

DofBoundary dof_boundary(const NodeConditions& conditions) {
  DofBoundary b;
  const int n = conditions.size();
  b.fixed.assign(2 * n, 0);
  b.load.assign(2 * n, 0.0);
  for (int i = 0; i < n; ++i) {
    b.fixed[2 * i] = b.fixed[2 * i + 1] = conditions.fixed[i];
    b.load[2 * i] = conditions.force[i].x;
    b.load[2 * i + 1] = conditions.force[i].y;
  }
  return b;
}

double von_mises(const std::array<double, 3>& s) {
  return std::sqrt(std::max(0.0, s[0] * s[0] - s[0] * s[1] + s[1] * s[1] + 3.0 * s[2] * s[2]));
}

FemSolution solve(const MeshGraph& graph, const Eigen::SparseMatrix<double>& K, const DofBoundary& boundary,
                  const Material& material, const SolveOptions& options) {
  const int n = graph.num_nodes();
  const int ndof = 2 * n;
  if (K.rows() != ndof || static_cast<int>(boundary.fixed.size()) != ndof ||
      static_cast<int>(boundary.load.size()) != ndof)
    throw InvalidArgument("fem solve: system size does not match the mesh");
  const int constrained = std::accumulate(boundary.fixed.begin(), boundary.fixed.end(), 0);
  if (constrained < 3)
    throw RigidBodyModeError("fem solve: " + std::to_string(constrained) +
                             " constrained dofs cannot suppress the 3 rigid-body modes");

  std::vector<int> free_index(ndof, -1);
  int nfree = 0;
  for (int d = 0; d < ndof; ++d)
    if (!boundary.fixed[d]) free_index[d] = nfree++;

  std::vector<Eigen::Triplet<double>> triplets;
  for (int col = 0; col < K.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it) {
      const int fr = free_index[it.row()], fc = free_index[it.col()];
      if (fr >= 0 && fc >= 0) triplets.emplace_back(fr, fc, it.value());
    }
  Eigen::SparseMatrix<double> Kff(nfree, nfree);
  Kff.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::VectorXd f(nfree);
  for (int d = 0; d < ndof; ++d)
    if (free_index[d] >= 0) f[free_index[d]] = boundary.load[d];

  FemSolution sol;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(nfree);
  const double fnorm = f.norm();
  if (fnorm > 0.0) {
    if (n <= options.direct_max_nodes) {
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Kff);
      // A rigid-body mode shows up as a pivot at rounding level, not always <= 0.
      const auto& pivots = ldlt.vectorD();
      if (ldlt.info() != Eigen::Success || (pivots.array() <= 1e-12 * pivots.cwiseAbs().maxCoeff()).any())
        throw RigidBodyModeError("fem solve: stiffness is singular (insufficient constraints)");
      u = ldlt.solve(f);
    } else {
      Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                               Eigen::IncompleteCholesky<double>> cg;
      cg.setMaxIterations(10 * nfree);
      cg.setTolerance(0.1 * options.tolerance);
      cg.compute(Kff);
      if (cg.info() != Eigen::Success) throw SolverError("fem solve: preconditioner setup failed");
      u = cg.solve(f);
      sol.iterations = static_cast<int>(cg.iterations());
      if (cg.info() != Eigen::Success)
        throw SolverError("fem solve: conjugate gradient did not converge in " + std::to_string(10 * nfree) +
                          " iterations");
    }
    sol.residual = (Kff * u - f).norm() / fnorm;
    if (!(sol.residual < options.tolerance))
      throw SolverError("fem solve: relative residual " + std::to_string(sol.residual) + " above tolerance");
  }

  Eigen::VectorXd full = Eigen::VectorXd::Zero(ndof);
  for (int d = 0; d < ndof; ++d)
    if (free_index[d] >= 0) full[d] = u[free_index[d]];
  sol.displacement.resize(n);
  for (int i = 0; i < n; ++i) sol.displacement[i] = {full[2 * i], full[2 * i + 1]};

  const Eigen::VectorXd Ku = K * full;
  sol.reaction.assign(ndof, 0.0);
  for (int d = 0; d < ndof; ++d)
    if (boundary.fixed[d]) sol.reaction[d] = Ku[d] - boundary.load[d];

  const Eigen::Matrix3d D = plane_stress_matrix(material);
  sol.element_stress.resize(graph.elements.size());
  sol.nodal_stress.assign(n, {0.0, 0.0, 0.0});
  std::vector<double> weight(n, 0.0);
  for (int e = 0; e < graph.num_elements(); ++e) {
    const auto& el = graph.elements[e];
    const Vec2 a = graph.nodes[el[0]], b = graph.nodes[el[1]], c = graph.nodes[el[2]];
    Eigen::Matrix<double, 6, 1> ue;
    for (int i = 0; i < 3; ++i) {
      ue[2 * i] = full[2 * el[i]];
      ue[2 * i + 1] = full[2 * el[i] + 1];
    }
    const Eigen::Vector3d s = D * strain_displacement(a, b, c) * ue;
    sol.element_stress[e] = {s[0], s[1], s[2]};
    const double area = 0.5 * signed_area2(a, b, c);
    for (int v : el) {
      for (int k = 0; k < 3; ++k) sol.nodal_stress[v][k] += area * s[k];
      weight[v] += area;
    }
  }
  sol.von_mises.resize(n);
  for (int i = 0; i < n; ++i) {
    if (weight[i] > 0.0)
      for (double& s : sol.nodal_stress[i]) s /= weight[i];
    sol.von_mises[i] = von_mises(sol.nodal_stress[i]);
  }
  return sol;
}

FemSolution solve(const MeshGraph& graph, const Eigen::SparseMatrix<double>& K, const NodeConditions& conditions,
                  const Material& material, const SolveOptions& options) {
  return solve(graph, K, dof_boundary(conditions), material, options);
}

}  // namespace meshsim::fem
