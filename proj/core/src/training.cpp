#include "specnet/training.hpp"

#include <Eigen/Dense>

#include "specnet/errors.hpp"
#include "specnet/oracle.hpp"

namespace specnet {

namespace {

Matrix gather_rows(const Matrix& y, const IndexSet& rows) {
  Matrix out(rows.size(), y.cols());
  for (Index r = 0; r < rows.size(); ++r) out.row(r) = y.row(rows[r]);
  return out;
}

Vector gather(const Vector& v, const IndexSet& rows) {
  Vector out(rows.size());
  for (Index r = 0; r < rows.size(); ++r) out[r] = v[rows[r]];
  return out;
}

// Position of each batch member inside the (sorted) superset.
std::vector<Index> positions_in(const IndexSet& batch, const IndexSet& superset) {
  std::vector<Index> pos;
  pos.reserve(static_cast<std::size_t>(batch.size()));
  auto it = superset.begin();
  for (Index i : batch) {
    it = std::lower_bound(it, superset.end(), i);
    pos.push_back(it - superset.begin());
  }
  return pos;
}

Matrix rows_at(const Matrix& y, const std::vector<Index>& pos) {
  Matrix out(static_cast<Index>(pos.size()), y.cols());
  for (std::size_t r = 0; r < pos.size(); ++r) out.row(static_cast<Index>(r)) = y.row(pos[r]);
  return out;
}

void check_training_inputs(const MlpParams& params, const Pencil& p, const Matrix& x) {
  if (x.rows() != p.n()) throw InputError("input rows do not match the pencil size");
  if (x.cols() != params.input_dim()) throw InputError("input dimension mismatch");
}

// The neighborhood plus the batch itself (kNN graphs have no self loops).
IndexSet forward_set(const Pencil& p, const IndexSet& batch) {
  return neighborhood(p.w, batch).merged(batch);
}

}  // namespace

void init_caches(const MlpParams& params, const Pencil& p, const Matrix& x,
                 NeighborCaches& caches) {
  check_training_inputs(params, p, x);
  caches.y0 = mlp_forward(params, x);
  caches.c_star = caches.y0.transpose() * p.d.asDiagonal() * caches.y0;
  caches.u_star = p.deflated() ? Vector(p.eta.transpose() * caches.y0)
                               : Vector::Zero(caches.y0.cols());
  caches.initialized = true;
}

void refresh_caches_on(const Pencil& p, NeighborCaches& caches, const IndexSet& rows,
                       const Matrix& y_rows) {
  if (!caches.initialized) throw StateError("neighbor caches are not initialized");
  const Matrix old_rows = gather_rows(caches.y0, rows);
  const Vector dn = gather(p.d, rows);
  caches.c_star += y_rows.transpose() * dn.asDiagonal() * y_rows -
                   old_rows.transpose() * dn.asDiagonal() * old_rows;
  if (p.deflated()) {
    const Vector en = gather(p.eta, rows);
    caches.u_star += (y_rows - old_rows).transpose() * en;
  }
  for (Index r = 0; r < rows.size(); ++r) caches.y0.row(rows[r]) = y_rows.row(r);
}

Matrix specnet2_batch_target(const MlpParams& params, const Pencil& p, const Matrix& x,
                             NeighborCaches& caches, const IndexSet& batch, Scheme scheme) {
  check_training_inputs(params, p, x);
  const double n = static_cast<double>(p.n());
  switch (scheme) {
    case Scheme::kLocal: {
      const Matrix yb = mlp_forward(params, gather_rows(x, batch));
      const LocalPencil lp = local_pencil(p, batch);
      const double b = static_cast<double>(batch.size());
      const Matrix cb = yb.transpose() * lp.d.asDiagonal() * yb;
      return -4.0 / b * (lp.w * yb) + 4.0 / (b * b * b) * lp.d.asDiagonal() * yb * cb;
    }
    case Scheme::kFull: {
      const Matrix y = mlp_forward(params, x);
      Embedding emb = make_embedding(p, y);
      return f2_grad_batch(p, emb, batch, Scheme::kFull);
    }
    case Scheme::kNeighbor: {
      if (!caches.initialized) throw StateError("neighbor caches are not initialized");
      const IndexSet nb = forward_set(p, batch);
      const Matrix yn = mlp_forward(params, gather_rows(x, nb));
      refresh_caches_on(p, caches, nb, yn);
      const Matrix yb = rows_at(yn, positions_in(batch, nb));
      Matrix g = -4.0 / n * w_rows_times(p, batch, caches.y0);
      if (p.deflated()) g += 4.0 / n * gather(p.eta, batch) * caches.u_star.transpose();
      g += 4.0 / (n * n * n) * gather(p.d, batch).asDiagonal() * yb * caches.c_star;
      return g;
    }
  }
  throw InputError("unknown scheme");
}

void specnet2_train_step(MlpParams& params, const Pencil& p, const Matrix& x,
                         NeighborCaches& caches, const IndexSet& batch, Scheme scheme,
                         double lr, AdamState& adam) {
  const Matrix g = specnet2_batch_target(params, p, x, caches, batch, scheme);
  const MlpParams grads = train_grad(params, gather_rows(x, batch), g);
  adam_update(params, adam, grads, lr);
}

void specnet1_train_step(MlpParams& params, OrthLayer& orth, const Pencil& p,
                         const Matrix& x, NeighborCaches& caches, const IndexSet& batch,
                         Scheme scheme, double lr, AdamState& adam, bool xi_grad) {
  check_training_inputs(params, p, x);
  const double n = static_cast<double>(p.n());
  Matrix yb;      // raw network output on the batch
  Matrix target;  // d tr(Ytilde_B^T G) / d Ytilde_B

  try {
    switch (scheme) {
      case Scheme::kLocal: {
        yb = mlp_forward(params, gather_rows(x, batch));
        const LocalPencil lp = local_pencil(p, batch);
        if ((lp.d.array() <= 0.0).any()) {
          throw DegenerateError("batch node without within-batch edges");
        }
        const QrResult qr = qr_tall(lp.d.cwiseSqrt().asDiagonal() * yb);
        const double b = static_cast<double>(batch.size());
        orth.xi = b * qr.r.triangularView<Eigen::Upper>().solve(
                          Matrix::Identity(yb.cols(), yb.cols()));
        const Matrix yt = yb * orth.xi;
        target = 2.0 * (yt - lp.d.cwiseInverse().asDiagonal() * (lp.w * yt));
        break;
      }
      case Scheme::kFull: {
        const Matrix y = mlp_forward(params, x);
        const QrResult qr = qr_tall(p.d.cwiseSqrt().asDiagonal() * y);
        orth.xi = n * qr.r.triangularView<Eigen::Upper>().solve(
                          Matrix::Identity(y.cols(), y.cols()));
        const Matrix yt = y * orth.xi;
        yb = gather_rows(y, batch);
        const Matrix ytb = gather_rows(yt, batch);
        target = 2.0 * (ytb - gather(p.d, batch).cwiseInverse().asDiagonal() *
                                  gather_rows(apply_operator(p, yt), batch));
        break;
      }
      case Scheme::kNeighbor: {
        if (!caches.initialized) throw StateError("neighbor caches are not initialized");
        const IndexSet nb = forward_set(p, batch);
        const Matrix yn = mlp_forward(params, gather_rows(x, nb));
        refresh_caches_on(p, caches, nb, yn);
        const Matrix l = cholesky_spd(0.5 * (caches.c_star + caches.c_star.transpose()));
        const Index k = yn.cols();
        orth.xi = n * l.transpose().triangularView<Eigen::Upper>().solve(Matrix::Identity(k, k));
        // Rows outside N are never read by W_B,N.
        Matrix yt_full = caches.y0 * orth.xi;
        yb = rows_at(yn, positions_in(batch, nb));
        const Matrix ytb = yb * orth.xi;
        Matrix wy = w_rows_times(p, batch, yt_full);
        if (p.deflated()) {
          wy -= gather(p.eta, batch) * (orth.xi.transpose() * caches.u_star).transpose();
        }
        target = 2.0 * (ytb - gather(p.d, batch).cwiseInverse().asDiagonal() * wy);
        break;
      }
    }
  } catch (const RankError& e) {
    throw DegenerateError(std::string("orthogonalization failed: ") + e.what());
  } catch (const NotSpdError& e) {
    throw DegenerateError(std::string("orthogonalization failed: ") + e.what());
  }

  const MlpParams grads = train_grad(params, gather_rows(x, batch), target * orth.xi.transpose());
  adam_update(params, adam, grads, lr);
  if (xi_grad) orth.adam.update(orth.xi, yb.transpose() * target, lr);
}

Matrix network_output(const MlpParams& params, const Matrix& x, const Matrix* xi) {
  Matrix y = mlp_forward(params, x);
  if (xi && xi->size() > 0) y = y * (*xi);
  return y;
}

Vector evaluate_embedding(const MlpParams& params, const Matrix& x, const Pencil& p,
                          const Matrix& reference, const Matrix* xi) {
  if (reference.rows() != p.n()) throw InputError("reference rows do not match the pencil");
  const Matrix y = network_output(params, x, xi);
  if (y.cols() < reference.cols()) {
    throw InputError("network output has fewer columns than the reference");
  }
  RitzPairs ritz;
  try {
    ritz = rayleigh_ritz(p, y);
  } catch (const DegenerateError& e) {
    throw RankError(std::string("degenerate network output: ") + e.what());
  }
  return ritz_relative_errors(ritz, reference);
}

void train_network(MlpParams& params, OrthLayer& orth, const Pencil& p, const Matrix& x,
                   const TrainOptions& options) {
  check_training_inputs(params, p, x);
  if (options.epochs < 0) throw InputError("epochs must be nonnegative");
  BatchPlan plan = BatchPlan::random(p.n(), options.batch_size, options.seed,
                                     BatchOrder::kReshuffle);
  AdamState adam = AdamState::for_params(params);
  NeighborCaches caches;
  if (options.scheme == Scheme::kNeighbor) init_caches(params, p, x, caches);
  if (options.on_epoch) options.on_epoch(0, params, orth);
  for (Index epoch = 1; epoch <= options.epochs; ++epoch) {
    for (const IndexSet& batch : plan.next_epoch()) {
      if (options.objective == Objective::kF2) {
        specnet2_train_step(params, p, x, caches, batch, options.scheme, options.lr, adam);
      } else {
        specnet1_train_step(params, orth, p, x, caches, batch, options.scheme, options.lr,
                            adam, options.xi_grad);
      }
    }
    if (!params.weights.back().allFinite()) {
      throw DivergenceError("network parameters became non-finite at epoch " +
                            std::to_string(epoch));
    }
    if (options.on_epoch) options.on_epoch(epoch, params, orth);
  }
}

}  // namespace specnet
