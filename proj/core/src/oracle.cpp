#include "specnet/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "specnet/errors.hpp"

namespace specnet {

namespace {

std::atomic<std::uint64_t> g_factorizations{0};

double off_diagonal_norm2(const Matrix& a) {
  double off = 0.0;
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      if (i != j) off += a(i, j) * a(i, j);
    }
  }
  return off;
}

void fix_signs(Matrix& v) {
  for (Index j = 0; j < v.cols(); ++j) {
    Index arg = 0;
    v.col(j).cwiseAbs().maxCoeff(&arg);
    if (v(arg, j) < 0.0) v.col(j) = -v.col(j);
  }
}

}  // namespace

DenseEig jacobi_eigh(const Matrix& input) {
  if (input.rows() != input.cols()) throw InputError("jacobi_eigh needs a square matrix");
  const Index n = input.rows();
  Matrix a = input;
  Matrix v = Matrix::Identity(n, n);
  const double frob2 = a.squaredNorm();
  const double target2 = 1e-28 * frob2;  // (1e-14 ||A||_F)^2

  for (int sweep = 0; sweep < 100; ++sweep) {
    if (off_diagonal_norm2(a) <= target2) break;
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(q, p);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::hypot(1.0, tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        double* colp = a.col(p).data();
        double* colq = a.col(q).data();
        for (Index k = 0; k < n; ++k) {
          const double akp = colp[k];
          const double akq = colq[k];
          colp[k] = c * akp - s * akq;
          colq[k] = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          a(p, k) = colp[k];
          a(q, k) = colq[k];
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = a(q, p) = 0.0;

        double* vp = v.col(p).data();
        double* vq = v.col(q).data();
        for (Index k = 0; k < n; ++k) {
          const double x = vp[k];
          const double y = vq[k];
          vp[k] = c * x - s * y;
          vq[k] = s * x + c * y;
        }
      }
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return a(i, i) > a(j, j); });
  DenseEig out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]);
    out.eigenvectors.col(k) = v.col(order[k]);
  }
  fix_signs(out.eigenvectors);
  return out;
}

DenseEig dense_gevp(const Matrix& w, const Vector& d, Index cap) {
  const Index n = w.rows();
  if (w.cols() != n || d.size() != n) throw InputError("dense_gevp: shape mismatch");
  if (n > cap) {
    throw InputError("dense_gevp: n = " + std::to_string(n) + " exceeds the oracle cap " +
                     std::to_string(cap));
  }
  if ((d.array() <= 0.0).any() || !d.allFinite()) {
    throw InputError("dense_gevp: degrees must be positive");
  }
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InputError("dense_gevp: W is not symmetric");
  }
  const Vector isd = d.cwiseSqrt().cwiseInverse();
  Matrix a = isd.asDiagonal() * w * isd.asDiagonal();
  a = 0.5 * (a + a.transpose());
  DenseEig eig = jacobi_eigh(a);
  eig.eigenvectors = isd.asDiagonal() * eig.eigenvectors;
  fix_signs(eig.eigenvectors);
  return eig;
}

std::uint64_t factorization_count() noexcept { return g_factorizations.load(); }

QrResult qr_tall(const Matrix& a) {
  ++g_factorizations;
  const Index b = a.rows();
  const Index k = a.cols();
  if (b < k || k < 1) throw InputError("qr_tall needs b >= K >= 1");
  Eigen::HouseholderQR<Matrix> qr(a);
  QrResult out;
  out.r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  out.q = qr.householderQ() * Matrix::Identity(b, k);
  const double tol = 1e-12 * a.norm();
  for (Index j = 0; j < k; ++j) {
    if (std::abs(out.r(j, j)) < tol || a.norm() == 0.0) {
      throw RankError("qr_tall: rank-deficient input (column " + std::to_string(j) + ")");
    }
    if (out.r(j, j) < 0.0) {
      out.r.row(j) = -out.r.row(j);
      out.q.col(j) = -out.q.col(j);
    }
  }
  return out;
}

Matrix cholesky_spd(const Matrix& a) {
  ++g_factorizations;
  if (a.rows() != a.cols() || a.rows() == 0) throw InputError("cholesky_spd: not square");
  const double max_diag = a.diagonal().cwiseAbs().maxCoeff();
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, max_diag)) {
    throw InputError("cholesky_spd: matrix is not symmetric");
  }
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw NotSpdError("cholesky_spd: nonpositive pivot");
  Matrix l = llt.matrixL();
  const double floor2 = 1e-14 * max_diag;
  for (Index j = 0; j < l.rows(); ++j) {
    if (!(l(j, j) * l(j, j) > floor2)) {
      throw NotSpdError("cholesky_spd: pivot " + std::to_string(j) + " is not positive");
    }
  }
  return l;
}

double relative_error(const Vector& psi_ref, const Vector& psi_hat) {
  if (psi_ref.size() != psi_hat.size()) throw InputError("relative_error: length mismatch");
  const double ref_norm = psi_ref.norm();
  if (!(ref_norm > 0.0)) throw InputError("relative_error: zero reference");
  const double hat2 = psi_hat.squaredNorm();
  const double beta = hat2 > 0.0 ? psi_ref.dot(psi_hat) / hat2 : 0.0;
  return (psi_ref - beta * psi_hat).norm() / ref_norm;
}

double subspace_error(const Matrix& u_ref, const Matrix& u_hat, const Vector& d) {
  if (u_ref.rows() != u_hat.rows() || u_ref.cols() != u_hat.cols() ||
      d.size() != u_ref.rows()) {
    throw InputError("subspace_error: shape mismatch");
  }
  const Vector sd = d.cwiseSqrt();
  const Matrix q1 = qr_tall(sd.asDiagonal() * u_ref).q;
  const Matrix q2 = qr_tall(sd.asDiagonal() * u_hat).q;
  const Matrix residual = q2 - q1 * (q1.transpose() * q2);
  Eigen::JacobiSVD<Matrix> svd(residual);
  return std::clamp(svd.singularValues()(0), 0.0, 1.0);
}

Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f, const Matrix& y,
                        double h) {
  if (!(h > 0.0)) throw InputError("finite_diff_grad: h must be positive");
  Matrix g(y.rows(), y.cols());
  Matrix probe = y;
  for (Index k = 0; k < y.cols(); ++k) {
    for (Index i = 0; i < y.rows(); ++i) {
      probe(i, k) = y(i, k) + h;
      const double up = f(probe);
      probe(i, k) = y(i, k) - h;
      const double down = f(probe);
      probe(i, k) = y(i, k);
      g(i, k) = (up - down) / (2.0 * h);
    }
  }
  return g;
}

}  // namespace specnet
