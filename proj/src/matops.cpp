#include "dobcoord/matops.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dobcoord::matops {

bool approx_equal(double a, double b, double atol, double rtol) {
  return std::abs(a - b) <= atol + rtol * std::abs(b);
}

bool approx_equal(const Matrix& a, const Matrix& b, double atol, double rtol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (!approx_equal(a(i, j), b(i, j), atol, rtol)) return false;
  return true;
}

namespace {

void require_square_finite(const Matrix& m, const char* op) {
  if (m.rows() != m.cols())
    throw DimensionError(std::string(op) + ": matrix must be square, got " +
                         std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  if (!m.allFinite())
    throw ValidationError(std::string(op) + ": matrix has non-finite entries");
}

}  // namespace

Spectrum eigenvalues(const Matrix& m) {
  require_square_finite(m, "eigenvalues");
  if (m.rows() == 0) return Spectrum(0);
  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw NumericalError(
        "eigenvalues: QR iteration did not converge within " +
        std::to_string(40 * m.rows()) + " iterations");
  Spectrum eigs = solver.eigenvalues();
  std::sort(eigs.data(), eigs.data() + eigs.size(),
            [](const std::complex<double>& a, const std::complex<double>& b) {
              if (a.real() != b.real()) return a.real() < b.real();
              return a.imag() < b.imag();
            });
  return eigs;
}

double spectral_abscissa(const Matrix& m) {
  const Spectrum eigs = eigenvalues(m);
  double worst = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < eigs.size(); ++i)
    worst = std::max(worst, eigs[i].real());
  return worst;
}

bool is_hurwitz(const Matrix& m, double margin) {
  if (margin < 0.0)
    throw ValidationError("is_hurwitz: margin must be nonnegative");
  return spectral_abscissa(m) < -margin;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

namespace {

Eigen::Map<const Vector> vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

}  // namespace

BlockSolution solve_linear_matrix_system(const BlockSystem& system) {
  const std::size_t n_unknowns = system.unknowns.size();
  std::vector<Eigen::Index> offsets(n_unknowns + 1, 0);
  for (std::size_t k = 0; k < n_unknowns; ++k) {
    const auto& d = system.unknowns[k];
    if (d.rows < 0 || d.cols < 0)
      throw DimensionError("solve_linear_matrix_system: negative block dims");
    offsets[k + 1] = offsets[k] + d.rows * d.cols;
  }
  const Eigen::Index n_vars = offsets[n_unknowns];

  Eigen::Index n_rows = 0;
  for (const auto& eq : system.equations) n_rows += eq.rhs.size();

  Matrix coeff = Matrix::Zero(n_rows, n_vars);
  Vector rhs(n_rows);
  Eigen::Index row = 0;
  for (std::size_t e = 0; e < system.equations.size(); ++e) {
    const auto& eq = system.equations[e];
    const Eigen::Index er = eq.rhs.rows(), ec = eq.rhs.cols();
    for (const auto& term : eq.terms) {
      if (term.unknown >= n_unknowns)
        throw DimensionError("solve_linear_matrix_system: bad unknown index");
      const auto& dims = system.unknowns[term.unknown];
      if (term.left.rows() != er || term.left.cols() != dims.rows ||
          term.right.rows() != dims.cols || term.right.cols() != ec)
        throw DimensionError(
            "solve_linear_matrix_system: dimension mismatch in equation " +
            std::to_string(e));
      coeff.block(row, offsets[term.unknown], er * ec,
                  dims.rows * dims.cols) +=
          kron(term.right.transpose(), term.left);
    }
    rhs.segment(row, er * ec) = vec(eq.rhs);
    row += er * ec;
  }

  if (n_vars == 0) {
    const double residual = rhs.norm();
    if (residual > 1e-10 * (1.0 + rhs.norm()))
      throw NoSolutionError(
          "solve_linear_matrix_system: inconsistent system with no unknowns",
          residual);
    BlockSolution out;
    for (const auto& d : system.unknowns)
      out.blocks.emplace_back(Matrix::Zero(d.rows, d.cols));
    out.residual = residual;
    return out;
  }

  // Rank-revealing pivoted orthogonal decomposition; yields the minimum-norm
  // least-squares solution, so rank-deficient consistent systems are handled
  // in the same pass as square ones.
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(coeff);
  const Vector solution = cod.solve(rhs);
  const double residual = (coeff * solution - rhs).norm();
  const double threshold = 1e-10 * (1.0 + rhs.norm());
  if (residual > threshold)
    throw NoSolutionError(
        "solve_linear_matrix_system: inconsistent system, residual " +
            std::to_string(residual),
        residual);

  BlockSolution out;
  out.residual = residual;
  out.unique = cod.rank() == n_vars;
  out.blocks.reserve(n_unknowns);
  for (std::size_t k = 0; k < n_unknowns; ++k) {
    const auto& d = system.unknowns[k];
    out.blocks.emplace_back(
        Eigen::Map<const Matrix>(solution.data() + offsets[k], d.rows, d.cols));
  }
  return out;
}

}  // namespace dobcoord::matops
