#pragma once

#include <cstdint>
#include <functional>

#include "specnet/graph.hpp"

namespace specnet {

inline constexpr Index kDefaultOracleCap = 2048;

/// All eigenpairs of a pencil (W, D), eigenvalues descending.
struct DenseEig {
  Vector eigenvalues;
  Matrix eigenvectors;  // column j pairs with eigenvalues[j]; V^T D V = I
};

/// Eigen-decomposition of a dense symmetric matrix by cyclic Jacobi.
/// Eigenvalues descending; eigenvector signs make the largest-magnitude
/// entry positive.
DenseEig jacobi_eigh(const Matrix& a);

/// Generalized problem W v = lambda D v via D^{-1/2} W D^{-1/2}.
/// Eigenvectors are back-transformed and D-orthonormal.
DenseEig dense_gevp(const Matrix& w, const Vector& d, Index cap = kDefaultOracleCap);

/// Number of qr_tall / cholesky_spd calls made by this process so far.
std::uint64_t factorization_count() noexcept;

struct QrResult {
  Matrix q;  // b x K, orthonormal columns
  Matrix r;  // K x K, upper triangular, nonnegative diagonal
};

/// Thin Householder QR. Throws RankError if |R_kk| < 1e-12 ||A||_F.
QrResult qr_tall(const Matrix& a);

/// Lower-triangular L with A = L L^T. Throws NotSpdError on a pivot that is
/// not positive (relative to the largest diagonal entry).
Matrix cholesky_spd(const Matrix& a);

/// ||psi - beta psi_hat|| / ||psi|| with the least-squares beta; 1 when
/// psi_hat vanishes.
double relative_error(const Vector& psi_ref, const Vector& psi_hat);

/// Sine of the largest principal angle between span(D^{1/2} U_ref) and
/// span(D^{1/2} U_hat).
double subspace_error(const Matrix& u_ref, const Matrix& u_hat, const Vector& d);

/// Entrywise central differences.
Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f, const Matrix& y,
                        double h);

}  // namespace specnet
