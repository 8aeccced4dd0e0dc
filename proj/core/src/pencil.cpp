#include "specnet/pencil.hpp"

#include <cmath>

#include "specnet/errors.hpp"

namespace specnet {

Pencil make_pencil(SparseSym w, bool deflate) {
  Pencil p;
  p.d = degree(w);
  if (deflate) p.eta = deflation_vector(p.d);
  p.w = std::move(w);
  return p;
}

Matrix dense_operator(const Pencil& p) {
  Matrix a = p.w.to_dense();
  if (p.deflated()) a -= p.eta * p.eta.transpose();
  return a;
}

DenseEig pencil_oracle(const Pencil& p, Index cap) {
  return dense_gevp(dense_operator(p), p.d, cap);
}

Matrix w_rows_times(const Pencil& p, const IndexSet& rows, const Matrix& y, OpCounter* ops) {
  const Index k = y.cols();
  Matrix out = Matrix::Zero(rows.size(), k);
  std::uint64_t count = 0;
  for (Index r = 0; r < rows.size(); ++r) {
    const Index i = rows[r];
    const auto cols = p.w.row_cols(i);
    const auto vals = p.w.row_values(i);
    for (std::size_t m = 0; m < cols.size(); ++m) {
      out.row(r).noalias() += vals[m] * y.row(cols[m]);
    }
    count += cols.size();
  }
  if (ops) ops->add(count * static_cast<std::uint64_t>(k));
  return out;
}

Matrix apply_operator(const Pencil& p, const Matrix& y) {
  Matrix out = w_rows_times(p, IndexSet::range(0, p.n()), y);
  if (p.deflated()) out -= p.eta * (p.eta.transpose() * y);
  return out;
}

double ball_radius(const Vector& d, const Matrix& y) {
  return (y.rowwise().squaredNorm().array() * d.array()).sqrt().maxCoeff();
}

}  // namespace specnet
