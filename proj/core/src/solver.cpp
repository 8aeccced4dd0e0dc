#include "specnet/solver.hpp"

#include <chrono>

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <sstream>

#include "specnet/errors.hpp"
#include "specnet/format.hpp"
#include "specnet/objective.hpp"

namespace specnet {

const char* to_string(Objective objective) noexcept {
  return objective == Objective::kF1 ? "f1" : "f2";
}

Objective parse_objective(std::string_view name) {
  if (name == "f1") return Objective::kF1;
  if (name == "f2") return Objective::kF2;
  throw ConfigError("unknown objective '" + std::string(name) + "' (valid: f1, f2)");
}

namespace {

std::vector<IndexSet> chunk(const std::vector<Index>& order, Index n, Index batch_size) {
  std::vector<IndexSet> out;
  for (Index start = 0; start < static_cast<Index>(order.size()); start += batch_size) {
    const Index stop = std::min<Index>(start + batch_size, static_cast<Index>(order.size()));
    out.push_back(IndexSet::from_unsorted(
        std::vector<Index>(order.begin() + start, order.begin() + stop), n));
  }
  return out;
}

std::vector<Index> permutation(Index n, Rng& rng) {
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);
  return order;
}

}  // namespace

BatchPlan::BatchPlan(Index n, std::vector<IndexSet> batches, BatchOrder order,
                     std::uint64_t seed)
    : n_(n), batches_(std::move(batches)), order_(order), rng_(seed) {
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  Index total = 0;
  for (const IndexSet& b : batches_) {
    if (b.empty()) throw InputError("batch plan contains an empty batch");
    for (Index i : b) {
      if (i < 0 || i >= n) throw InputError("batch index out of range");
      if (seen[i]) throw InputError("batches overlap at index " + std::to_string(i));
      seen[i] = 1;
      ++total;
    }
    batch_size_ = std::max(batch_size_, b.size());
  }
  if (total != n) throw InputError("batches do not cover [0, n)");
}

BatchPlan BatchPlan::random(Index n, Index batch_size, std::uint64_t seed, BatchOrder order) {
  if (batch_size < 1 || n < 1) throw InputError("batch size and n must be positive");
  Rng rng(seed);
  BatchPlan plan(n, chunk(permutation(n, rng), n, batch_size), order, seed ^ 0x9e3779b97f4a7c15ULL);
  plan.batch_size_ = batch_size;
  return plan;
}

BatchPlan BatchPlan::contiguous(Index n, Index batch_size, BatchOrder order) {
  if (batch_size < 1 || n < 1) throw InputError("batch size and n must be positive");
  std::vector<Index> order_vec(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order_vec[i] = i;
  BatchPlan plan(n, chunk(order_vec, n, batch_size), order, 0);
  plan.batch_size_ = batch_size;
  return plan;
}

Index BatchPlan::max_batch_size() const {
  Index m = 0;
  for (const IndexSet& b : batches_) m = std::max(m, b.size());
  return m;
}

const std::vector<IndexSet>& BatchPlan::next_epoch() {
  if (started_ && order_ == BatchOrder::kReshuffle) {
    batches_ = chunk(permutation(n_, rng_), n_, batch_size_);
  }
  started_ = true;
  return batches_;
}

namespace {

double objective_value(const Pencil& p, const Matrix& y, Objective objective) {
  return objective == Objective::kF2 ? f2_value(p, y) : f1_value(p, y);
}

double gradient_norm(const Pencil& p, const Matrix& y, Objective objective) {
  if (objective == Objective::kF2) return f2_grad_full_matrix(p, y).norm();
  return (2.0 * (y - p.d.cwiseInverse().asDiagonal() * apply_operator(p, y))).norm();
}

}  // namespace

SolveResult run_solver(const Pencil& p, Embedding init, BatchPlan& plan,
                       const SolverOptions& options) {
  if (plan.n() != p.n()) throw InputError("batch plan size does not match the pencil");
  if (!(options.alpha > 0.0) && options.epochs > 0) throw InputError("stepsize must be positive");
  if (options.epochs < 0) throw InputError("epochs must be nonnegative");
  if (init.n() != p.n()) throw InputError("initial embedding size mismatch");

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  SolveResult result{std::move(init), {}};
  Embedding& emb = result.embedding;
  if (!emb.fresh) refresh_caches(p, emb);

  EpochRecord rec;
  rec.objective = objective_value(p, emb.y, options.objective);
  rec.grad_norm = gradient_norm(p, emb.y, options.objective);
  rec.ball_radius = ball_radius(p.d, emb.y);
  rec.wall_time_s = elapsed();
  result.report.epochs.push_back(rec);
  if (options.on_epoch) options.on_epoch(rec, emb);

  for (Index epoch = 1; epoch <= options.epochs; ++epoch) {
    const Matrix before = options.objective == Objective::kF1 ? emb.y : Matrix();
    OpCounter ops;
    double nbh_total = 0.0;
    if (options.scheme == Scheme::kNeighbor) refresh_caches(p, emb, &ops);
    const auto& batches = plan.next_epoch();
    try {
      for (const IndexSet& batch : batches) {
        if (options.objective == Objective::kF2) {
          f2_step(p, emb, batch, options.alpha, options.scheme, &ops);
        } else {
          f1_batch_step(p, emb, batch, options.alpha, options.scheme, &ops);
        }
        nbh_total += static_cast<double>(neighborhood(p.w, batch).size());
      }
    } catch (const DivergenceError& e) {
      throw SolverDivergence(std::string(e.what()) + " at epoch " + std::to_string(epoch),
                             result.report);
    }
    rec = EpochRecord{};
    rec.epoch = epoch;
    rec.objective = objective_value(p, emb.y, options.objective);
    rec.grad_norm = gradient_norm(p, emb.y, options.objective);
    rec.ball_radius = ball_radius(p.d, emb.y);
    rec.wall_time_s = elapsed();
    rec.mean_neighborhood = nbh_total / static_cast<double>(batches.size());
    rec.macs = ops.macs;
    if (!std::isfinite(rec.objective)) {
      throw SolverDivergence("objective became non-finite at epoch " + std::to_string(epoch),
                             result.report);
    }
    result.report.epochs.push_back(rec);
    if (options.on_epoch) options.on_epoch(rec, emb);

    if (options.tol > 0.0) {
      if (options.objective == Objective::kF2 && rec.grad_norm < options.tol) {
        result.report.converged = true;
        break;
      }
      if (options.objective == Objective::kF1 &&
          (emb.y - before).norm() < options.tol * emb.y.norm()) {
        result.report.converged = true;
        break;
      }
    }
  }
  if (!emb.fresh) refresh_caches(p, emb);
  return result;
}

Matrix init_embedding(const Pencil& p, Index k, double radius, std::uint64_t seed) {
  if (k < 1) throw InputError("K must be positive");
  if (!(radius > 0.0)) throw InputError("radius must be positive");
  // ||D_i^{1/2} Y_i|| <= sqrt(d_max K) r; keep it a hair under radius / 2.
  const double r = 0.999 * radius / (2.0 * std::sqrt(p.d.maxCoeff() * static_cast<double>(k)));
  Rng rng(seed);
  Matrix y(p.n(), k);
  for (Index i = 0; i < p.n(); ++i) {
    for (Index j = 0; j < k; ++j) y(i, j) = rng.uniform(-r, r);
  }
  return y;
}

Matrix init_orthonormal(const Pencil& p, Index k, std::uint64_t seed) {
  Rng rng(seed);
  Matrix y(p.n(), k);
  for (Index i = 0; i < p.n(); ++i) {
    for (Index j = 0; j < k; ++j) y(i, j) = rng.uniform(-1.0, 1.0);
  }
  const QrResult qr = qr_tall(p.d.cwiseSqrt().asDiagonal() * y);
  return static_cast<double>(p.n()) *
         qr.r.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(y);
}

void save_embedding(const Matrix& y, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << y.rows() << ' ' << y.cols() << '\n';
  for (Index i = 0; i < y.rows(); ++i) {
    for (Index j = 0; j < y.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(y(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Matrix load_embedding(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("line 1: missing header");
  std::istringstream header(line);
  std::string a, b;
  long long n = 0, k = 0;
  if (!(header >> a >> b) || !parse_int(a, n) || !parse_int(b, k) || n < 1 || k < 1) {
    throw ParseError("line 1: malformed header, expected \"n K\"");
  }
  Matrix y(n, k);
  for (long long i = 0; i < n; ++i) {
    if (!std::getline(in, line)) {
      throw ParseError("line " + std::to_string(i + 2) + ": unexpected end of file");
    }
    std::istringstream row(line);
    std::string field;
    for (long long j = 0; j < k; ++j) {
      double v = 0.0;
      if (!(row >> field) || !parse_double(field, v)) {
        throw ParseError("line " + std::to_string(i + 2) + ": expected " + std::to_string(k) +
                         " values");
      }
      y(i, j) = v;
    }
    if (row >> field) throw ParseError("line " + std::to_string(i + 2) + ": extra values");
  }
  return y;
}

}  // namespace specnet
