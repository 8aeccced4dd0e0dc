#include "specnet/rayleigh_ritz.hpp"

#include <Eigen/Dense>

#include "specnet/errors.hpp"

namespace specnet {

RitzPairs rayleigh_ritz(const Pencil& p, const Matrix& y) {
  if (y.rows() != p.n() || y.cols() < 1) throw InputError("rayleigh_ritz: shape mismatch");
  Matrix a = y.transpose() * apply_operator(p, y);
  a = 0.5 * (a + a.transpose());
  Matrix b = y.transpose() * p.d.asDiagonal() * y;
  b = 0.5 * (b + b.transpose());
  Matrix l;
  try {
    l = cholesky_spd(b);
  } catch (const Error& e) {
    throw DegenerateError(std::string("rayleigh_ritz: Y^T D Y is singular: ") + e.what());
  }
  const auto lower = l.triangularView<Eigen::Lower>();
  Matrix m = lower.solve(a);
  m = lower.solve(Matrix(m.transpose()));
  m = 0.5 * (m + m.transpose());
  const DenseEig eig = jacobi_eigh(m);
  RitzPairs out;
  out.values = eig.eigenvalues;
  out.vectors = y * l.transpose().triangularView<Eigen::Upper>().solve(eig.eigenvectors);
  return out;
}

Vector ritz_relative_errors(const RitzPairs& ritz, const Matrix& reference) {
  const Index k = std::min(ritz.vectors.cols(), reference.cols());
  Vector errs(k);
  for (Index j = 0; j < k; ++j) errs[j] = relative_error(reference.col(j), ritz.vectors.col(j));
  return errs;
}

}  // namespace specnet
