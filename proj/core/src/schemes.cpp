#include "specnet/schemes.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "specnet/errors.hpp"
#include "specnet/oracle.hpp"

namespace specnet {

namespace {

using u64 = std::uint64_t;

u64 as_u64(Index v) { return static_cast<u64>(v); }

Matrix gather_rows(const Matrix& y, const IndexSet& rows) {
  Matrix out(rows.size(), y.cols());
  for (Index r = 0; r < rows.size(); ++r) out.row(r) = y.row(rows[r]);
  return out;
}

void scatter_rows(Matrix& y, const IndexSet& rows, const Matrix& values) {
  for (Index r = 0; r < rows.size(); ++r) y.row(rows[r]) = values.row(r);
}

Vector gather(const Vector& v, const IndexSet& rows) {
  Vector out(rows.size());
  for (Index r = 0; r < rows.size(); ++r) out[r] = v[rows[r]];
  return out;
}

void check_batch(const Pencil& p, const Embedding& emb, const IndexSet& batch) {
  if (emb.n() != p.n()) throw InputError("embedding and pencil sizes differ");
  if (batch.empty()) throw InputError("empty batch");
  if (batch[batch.size() - 1] >= p.n()) throw InputError("batch index out of range");
}

void check_finite(const Matrix& y) {
  if (!y.allFinite()) throw DivergenceError("iterate became non-finite");
}

// Exact C and u, counted.
void exact_caches(const Pencil& p, const Matrix& y, Matrix& c, Vector& u, OpCounter* ops) {
  c = y.transpose() * p.d.asDiagonal() * y;
  u = p.deflated() ? Vector(p.eta.transpose() * y) : Vector::Zero(y.cols());
  if (ops) {
    const u64 n = as_u64(y.rows()), k = as_u64(y.cols());
    ops->add(n * k * k + (p.deflated() ? n * k : 0));
  }
}

// Rows B of (W - eta eta^T) Y using the supplied u = eta^T Y.
Matrix operator_rows(const Pencil& p, const IndexSet& batch, const Matrix& y, const Vector& u,
                     OpCounter* ops) {
  Matrix wy = w_rows_times(p, batch, y, ops);
  if (p.deflated()) {
    wy -= gather(p.eta, batch) * u.transpose();
    if (ops) ops->add(as_u64(batch.size()) * as_u64(y.cols()));
  }
  return wy;
}

// Incremental cache update for rows that changed from `old_rows` to `new_rows`.
void update_caches(const Pencil& p, Embedding& emb, const IndexSet& rows,
                   const Matrix& old_rows, const Matrix& new_rows, OpCounter* ops) {
  const Vector db = gather(p.d, rows);
  emb.c += new_rows.transpose() * db.asDiagonal() * new_rows -
           old_rows.transpose() * db.asDiagonal() * old_rows;
  if (p.deflated()) {
    const Vector eb = gather(p.eta, rows);
    emb.u += new_rows.transpose() * eb - old_rows.transpose() * eb;
  }
  if (ops) {
    const u64 b = as_u64(rows.size()), k = as_u64(emb.k());
    ops->add(2 * b * k * k + (p.deflated() ? 2 * b * k : 0));
  }
}

Matrix f2_local_grad(const Pencil& p, const Matrix& yb, const IndexSet& batch,
                     OpCounter* ops) {
  const LocalPencil lp = local_pencil(p, batch, ops);
  const double b = static_cast<double>(batch.size());
  const Matrix cb = yb.transpose() * lp.d.asDiagonal() * yb;
  if (ops) {
    const u64 bb = as_u64(batch.size()), k = as_u64(yb.cols());
    ops->add(bb * bb * k + 2 * bb * k * k);
  }
  return -4.0 / b * (lp.w * yb) + 4.0 / (b * b * b) * lp.d.asDiagonal() * yb * cb;
}

}  // namespace

const char* to_string(Scheme scheme) noexcept {
  switch (scheme) {
    case Scheme::kLocal: return "local";
    case Scheme::kFull: return "full";
    case Scheme::kNeighbor: return "neighbor";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "local") return Scheme::kLocal;
  if (name == "full") return Scheme::kFull;
  if (name == "neighbor") return Scheme::kNeighbor;
  throw ConfigError("unknown scheme '" + std::string(name) +
                    "' (valid: local, full, neighbor)");
}

Embedding make_embedding(const Pencil& p, Matrix y) {
  if (y.rows() != p.n() || y.cols() < 1) throw InputError("embedding shape mismatch");
  Embedding emb;
  emb.y = std::move(y);
  refresh_caches(p, emb);
  return emb;
}

void refresh_caches(const Pencil& p, Embedding& emb, OpCounter* ops) {
  exact_caches(p, emb.y, emb.c, emb.u, ops);
  emb.fresh = true;
}

LocalPencil local_pencil(const Pencil& p, const IndexSet& batch, OpCounter* ops) {
  const Index b = batch.size();
  LocalPencil lp;
  lp.w = Matrix::Zero(b, b);
  u64 touched = 0;
  for (Index r = 0; r < b; ++r) {
    const auto cols = p.w.row_cols(batch[r]);
    const auto vals = p.w.row_values(batch[r]);
    auto it = batch.begin();
    for (std::size_t m = 0; m < cols.size(); ++m) {
      it = std::lower_bound(it, batch.end(), cols[m]);
      if (it == batch.end()) break;
      if (*it == cols[m]) lp.w(r, it - batch.begin()) = vals[m];
    }
    touched += cols.size();
  }
  lp.d = lp.w.rowwise().sum();
  if (p.deflated()) {
    const double total = lp.d.sum();
    if (total > 0.0) {
      const Vector eta = lp.d / std::sqrt(total);
      lp.w -= eta * eta.transpose();
    }
  }
  if (ops) ops->add(touched);
  return lp;
}

Matrix f2_grad_batch(const Pencil& p, const Embedding& emb, const IndexSet& batch,
                     Scheme scheme, OpCounter* ops) {
  check_batch(p, emb, batch);
  const double n = static_cast<double>(p.n());
  const Matrix yb = gather_rows(emb.y, batch);
  switch (scheme) {
    case Scheme::kLocal:
      return f2_local_grad(p, yb, batch, ops);
    case Scheme::kFull: {
      Matrix c;
      Vector u;
      exact_caches(p, emb.y, c, u, ops);
      const Matrix wy = operator_rows(p, batch, emb.y, u, ops);
      if (ops) ops->add(as_u64(batch.size()) * as_u64(emb.k()) * as_u64(emb.k()));
      return -4.0 / n * wy + 4.0 / (n * n * n) * gather(p.d, batch).asDiagonal() * yb * c;
    }
    case Scheme::kNeighbor: {
      if (!emb.fresh) throw StateError("neighbor scheme needs initialized caches");
      const Matrix wy = operator_rows(p, batch, emb.y, emb.u, ops);
      if (ops) ops->add(as_u64(batch.size()) * as_u64(emb.k()) * as_u64(emb.k()));
      return -4.0 / n * wy +
             4.0 / (n * n * n) * gather(p.d, batch).asDiagonal() * yb * emb.c;
    }
  }
  throw InputError("unknown scheme");
}

void f2_step(const Pencil& p, Embedding& emb, const IndexSet& batch, double alpha,
             Scheme scheme, OpCounter* ops) {
  if (!(alpha >= 0.0)) throw InputError("stepsize must be nonnegative");
  const Matrix grad = f2_grad_batch(p, emb, batch, scheme, ops);
  const Matrix old_rows = gather_rows(emb.y, batch);
  const Matrix new_rows = old_rows - alpha * grad;
  check_finite(new_rows);
  scatter_rows(emb.y, batch, new_rows);
  switch (scheme) {
    case Scheme::kLocal:
      emb.fresh = false;
      break;
    case Scheme::kFull:
      refresh_caches(p, emb, ops);
      break;
    case Scheme::kNeighbor:
      update_caches(p, emb, batch, old_rows, new_rows, ops);
      break;
  }
}

void f1_batch_step(const Pencil& p, Embedding& emb, const IndexSet& batch, double alpha,
                   Scheme scheme, OpCounter* ops) {
  check_batch(p, emb, batch);
  if (!(alpha >= 0.0)) throw InputError("stepsize must be nonnegative");
  const double n = static_cast<double>(p.n());
  const Matrix yb = gather_rows(emb.y, batch);

  if (scheme == Scheme::kLocal) {
    const LocalPencil lp = local_pencil(p, batch, ops);
    if ((lp.d.array() <= 0.0).any()) {
      throw DegenerateError("batch contains a node with zero within-batch degree");
    }
    const double b = static_cast<double>(batch.size());
    const Matrix grad = 2.0 * (yb - lp.d.cwiseInverse().asDiagonal() * (lp.w * yb));
    Matrix stepped = yb - alpha * grad;
    check_finite(stepped);
    QrResult qr;
    try {
      qr = qr_tall(lp.d.cwiseSqrt().asDiagonal() * stepped);
    } catch (const RankError& e) {
      throw DegenerateError(std::string("local normalization failed: ") + e.what());
    }
    stepped = b * qr.r.triangularView<Eigen::Upper>()
                      .solve<Eigen::OnTheRight>(stepped);
    scatter_rows(emb.y, batch, stepped);
    emb.fresh = false;
    return;
  }

  const Vector db = gather(p.d, batch);
  if (scheme == Scheme::kFull) {
    Matrix c;
    Vector u;
    exact_caches(p, emb.y, c, u, ops);
    const Matrix wy = operator_rows(p, batch, emb.y, u, ops);
    const Matrix stepped = yb - alpha * 2.0 * (yb - db.cwiseInverse().asDiagonal() * wy);
    check_finite(stepped);
    scatter_rows(emb.y, batch, stepped);
    QrResult qr;
    try {
      qr = qr_tall(p.d.cwiseSqrt().asDiagonal() * emb.y);
    } catch (const RankError& e) {
      throw DegenerateError(std::string("full normalization failed: ") + e.what());
    }
    emb.y = n * qr.r.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(emb.y);
    refresh_caches(p, emb, ops);
    return;
  }

  if (!emb.fresh) throw StateError("neighbor scheme needs initialized caches");
  const Matrix wy = operator_rows(p, batch, emb.y, emb.u, ops);
  const Matrix stepped = yb - alpha * 2.0 * (yb - db.cwiseInverse().asDiagonal() * wy);
  check_finite(stepped);
  scatter_rows(emb.y, batch, stepped);
  update_caches(p, emb, batch, yb, stepped, ops);
  Matrix l;
  try {
    l = cholesky_spd(0.5 * (emb.c + emb.c.transpose()));
  } catch (const Error& e) {
    throw DegenerateError(std::string("neighbor normalization failed: ") + e.what());
  }
  const auto lower = l.triangularView<Eigen::Lower>();
  // Y <- n Y L^{-T}; the caches transform alongside.
  emb.y = n * l.transpose().triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(emb.y);
  Matrix c = lower.solve(emb.c);
  c = lower.solve(Matrix(c.transpose()));
  emb.c = n * n * 0.5 * (c + c.transpose());
  emb.u = n * lower.solve(emb.u);
  if (ops) ops->add(as_u64(p.n()) * as_u64(emb.k()) * as_u64(emb.k()));
}

}  // namespace specnet
