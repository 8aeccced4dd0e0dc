#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "specnet/errors.hpp"
#include "specnet/random.hpp"
#include "specnet/schemes.hpp"

namespace specnet {

enum class Objective { kF1, kF2 };
const char* to_string(Objective objective) noexcept;
Objective parse_objective(std::string_view name);

enum class BatchOrder { kFixedCyclic, kReshuffle };

/// Partition S_1..S_b of [0, n). With kReshuffle a fresh random partition of
/// the same batch size is drawn at every epoch after the first.
class BatchPlan {
 public:
  /// Random partition into batches of `batch_size` (last one may be short).
  static BatchPlan random(Index n, Index batch_size, std::uint64_t seed,
                          BatchOrder order = BatchOrder::kFixedCyclic);
  /// Consecutive index blocks.
  static BatchPlan contiguous(Index n, Index batch_size,
                              BatchOrder order = BatchOrder::kFixedCyclic);
  /// Validates that `batches` partition [0, n).
  BatchPlan(Index n, std::vector<IndexSet> batches, BatchOrder order, std::uint64_t seed);

  Index n() const { return n_; }
  BatchOrder order() const { return order_; }
  const std::vector<IndexSet>& batches() const { return batches_; }
  Index max_batch_size() const;

  /// Batches of the next epoch.
  const std::vector<IndexSet>& next_epoch();

 private:
  Index n_ = 0;
  Index batch_size_ = 0;
  std::vector<IndexSet> batches_;
  BatchOrder order_ = BatchOrder::kFixedCyclic;
  Rng rng_{0};
  bool started_ = false;
};

struct EpochRecord {
  Index epoch = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  double ball_radius = 0.0;
  double wall_time_s = 0.0;
  double mean_neighborhood = 0.0;  // mean |N(B)| over the epoch's batches
  std::uint64_t macs = 0;          // multiply-adds spent in the epoch
};

struct SolveReport {
  std::vector<EpochRecord> epochs;  // epoch 0 is the initial iterate
  bool converged = false;
};

struct SolverOptions {
  Objective objective = Objective::kF2;
  Scheme scheme = Scheme::kFull;
  double alpha = 0.0;
  Index epochs = 0;
  double tol = 0.0;
  /// Called after every record (including the initial one).
  std::function<void(const EpochRecord&, const Embedding&)> on_epoch;
};

struct SolveResult {
  Embedding embedding;
  SolveReport report;
};

/// Raised when an iterate becomes non-finite; carries the records so far.
class SolverDivergence : public DivergenceError {
 public:
  SolverDivergence(const std::string& message, SolveReport report)
      : DivergenceError(message), report_(std::move(report)) {}
  const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

/// Cyclic mini-batch iteration. f2 stops when ||grad||_F < tol, f1 when the
/// relative change of the iterate over an epoch drops below tol.
SolveResult run_solver(const Pencil& p, Embedding init, BatchPlan& plan,
                       const SolverOptions& options);

/// Entries uniform on [-r, r] with r chosen so that
/// max_i ||D_i^{1/2} Y_i|| < radius / 2.
Matrix init_embedding(const Pencil& p, Index k, double radius, std::uint64_t seed);

/// f1 starting point: random entries normalized to Y^T D Y = n^2 I.
Matrix init_orthonormal(const Pencil& p, Index k, std::uint64_t seed);

/// Text checkpoint: "n K" header then n rows of K values.
void save_embedding(const Matrix& y, const std::filesystem::path& path);
Matrix load_embedding(const std::filesystem::path& path);

}  // namespace specnet
