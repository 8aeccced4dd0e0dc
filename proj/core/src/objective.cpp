#include "specnet/objective.hpp"

#include "specnet/errors.hpp"

namespace specnet {

namespace {

void check_shape(const Pencil& p, const Matrix& y) {
  if (y.rows() != p.n() || y.cols() < 1) {
    throw InputError("embedding has " + std::to_string(y.rows()) + " rows, pencil has " +
                     std::to_string(p.n()));
  }
}

}  // namespace

double f2_value(const Pencil& p, const Matrix& y) {
  check_shape(p, y);
  const double n = static_cast<double>(p.n());
  const Matrix wy = apply_operator(p, y);
  const Matrix c = y.transpose() * p.d.asDiagonal() * y;
  return (-2.0 * (y.transpose() * wy).trace() + c.squaredNorm() / (n * n)) / (n * n);
}

Matrix f2_grad_full_matrix(const Pencil& p, const Matrix& y) {
  check_shape(p, y);
  const double n = static_cast<double>(p.n());
  const Matrix c = y.transpose() * p.d.asDiagonal() * y;
  return -4.0 / n * apply_operator(p, y) + 4.0 / (n * n * n) * p.d.asDiagonal() * y * c;
}

double hessian_quadratic_form(const Pencil& p, const Matrix& y, const Matrix& s) {
  check_shape(p, y);
  check_shape(p, s);
  if (s.cols() != y.cols()) throw InputError("direction and iterate widths differ");
  const double n = static_cast<double>(p.n());
  const Matrix sds = s.transpose() * p.d.asDiagonal() * s;
  const Matrix sdy = s.transpose() * p.d.asDiagonal() * y;
  const Matrix ydy = y.transpose() * p.d.asDiagonal() * y;
  const double quad = (s.transpose() * apply_operator(p, s)).trace();
  const double quartic =
      (sds * ydy).trace() + (sdy * sdy).trace() + (sdy * sdy.transpose()).trace();
  return -4.0 * quad / n + 4.0 * quartic / (n * n * n);
}

double f1_value(const Pencil& p, const Matrix& y) {
  check_shape(p, y);
  const double n = static_cast<double>(p.n());
  const double dy = (y.transpose() * p.d.asDiagonal() * y).trace();
  const double wy = (y.transpose() * apply_operator(p, y)).trace();
  return (dy - wy) / (n * n);
}

double f2_optimum(const Vector& eigenvalues, Index k) {
  return -eigenvalues.head(k).squaredNorm();
}

double f1_optimum(const Vector& eigenvalues, Index k) {
  return static_cast<double>(k) - eigenvalues.head(k).sum();
}

}  // namespace specnet
