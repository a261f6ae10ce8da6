#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <vector>

#include "dobcoord/errors.hpp"

namespace dobcoord::matops {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigenvalues of a real matrix, sorted by (real part, imaginary part).
using Spectrum = Eigen::VectorXcd;

// Default mixed absolute/relative comparison tolerances:
// |a - b| <= atol + rtol * |b|.
inline constexpr double kAtol = 1e-9;
inline constexpr double kRtol = 1e-9;

bool approx_equal(double a, double b, double atol = kAtol, double rtol = kRtol);
bool approx_equal(const Matrix& a, const Matrix& b, double atol = kAtol,
                  double rtol = kRtol);

/// All eigenvalues of a square real matrix, with multiplicity.
Spectrum eigenvalues(const Matrix& m);

/// Largest real part over the spectrum (-inf for a 0x0 matrix).
double spectral_abscissa(const Matrix& m);

/// True iff every eigenvalue has real part < -margin.
bool is_hurwitz(const Matrix& m, double margin = 0.0);

/// Kronecker product, (ra*rb) x (ca*cb).
Matrix kron(const Matrix& a, const Matrix& b);

// ---------------------------------------------------------------------------
// Linear systems over unknown matrix blocks.
//
// A BlockSystem describes equations of the form
//     sum_k  left_k * X_{unknown_k} * right_k  =  rhs
// over a set of unknown matrix blocks X_0, ..., X_{M-1}. The system is
// vectorized via vec(L X R) = (R^T (x) L) vec(X) and solved with a
// rank-revealing pivoted decomposition.
// ---------------------------------------------------------------------------

struct BlockDims {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
};

struct MatrixTerm {
  std::size_t unknown = 0;  // index into BlockSystem::unknowns
  Matrix left;              // rows(eq) x rows(unknown)
  Matrix right;             // cols(unknown) x cols(eq)
};

struct BlockEquation {
  std::vector<MatrixTerm> terms;
  Matrix rhs;
};

struct BlockSystem {
  std::vector<BlockDims> unknowns;
  std::vector<BlockEquation> equations;
};

struct BlockSolution {
  std::vector<Matrix> blocks;
  double residual = 0.0;  // Frobenius norm of the stacked residual
  bool unique = true;     // false if the minimum-norm solution was selected
};

/// Solves the block system. Inconsistent systems raise NoSolutionError
/// carrying the least-squares residual; rank-deficient but consistent
/// systems return the minimum-norm solution with `unique = false`.
BlockSolution solve_linear_matrix_system(const BlockSystem& system);

}  // namespace dobcoord::matops
