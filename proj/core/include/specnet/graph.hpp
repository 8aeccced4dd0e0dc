#pragma once

#include <cstdint>
#include <iosfwd>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace specnet {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// n samples in R^m, stored one sample per row. Labels are optional.
struct PointCloud {
  Matrix points;
  std::vector<int> labels;

  Index size() const { return points.rows(); }
  Index dim() const { return points.cols(); }

  /// Throws InputError on an empty cloud, label count mismatch or
  /// non-finite coordinates.
  void validate() const;
};

/// Sorted, duplicate-free node indices. Used for batches and neighborhoods.
class IndexSet {
 public:
  IndexSet() = default;

  /// Sorts and deduplicates; throws InputError if any index is outside [0, n).
  static IndexSet from_unsorted(std::vector<Index> indices, Index n);
  static IndexSet range(Index begin, Index end);

  std::span<const Index> indices() const { return indices_; }
  Index size() const { return static_cast<Index>(indices_.size()); }
  bool empty() const { return indices_.empty(); }
  Index operator[](Index k) const { return indices_[static_cast<std::size_t>(k)]; }
  bool contains(Index i) const;

  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

  /// Sorted union.
  IndexSet merged(const IndexSet& other) const;

 private:
  explicit IndexSet(std::vector<Index> sorted) : indices_(std::move(sorted)) {}
  std::vector<Index> indices_;
};

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Symmetric sparse affinity matrix in compressed-row form.
///
/// Invariants (checked on construction): values are finite and positive (no
/// explicit zeros), column indices strictly increase within a row, and every
/// stored (i, j) has a stored (j, i) with the identical value.
class SparseSym {
 public:
  SparseSym() = default;

  /// Takes ownership of CSR arrays and validates them.
  SparseSym(Index n, std::vector<Index> row_ptr, std::vector<Index> col_idx,
            std::vector<double> values);

  /// Builds from unordered triplets. Entries with value 0 are dropped,
  /// duplicates are rejected, and symmetry is validated (not enforced).
  static SparseSym from_triplets(Index n, std::vector<Triplet> triplets);

  /// Keeps entries with |value| > 0 of a dense symmetric matrix.
  static SparseSym from_dense(const Matrix& dense);

  Index size() const { return n_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }

  std::span<const Index> row_cols(Index i) const {
    return {col_idx_.data() + row_ptr_[i], col_idx_.data() + row_ptr_[i + 1]};
  }
  std::span<const double> row_values(Index i) const {
    return {values_.data() + row_ptr_[i], values_.data() + row_ptr_[i + 1]};
  }
  Index row_nnz(Index i) const { return row_ptr_[i + 1] - row_ptr_[i]; }

  /// Stored value or 0.
  double at(Index i, Index j) const;
  double diagonal(Index i) const { return at(i, i); }
  double max_value() const;

  std::span<const Index> row_ptr() const { return row_ptr_; }
  std::span<const Index> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }

  Matrix to_dense() const;

  friend bool operator==(const SparseSym&, const SparseSym&) = default;

 private:
  void validate() const;

  Index n_ = 0;
  std::vector<Index> row_ptr_{0};
  std::vector<Index> col_idx_;
  std::vector<double> values_;
};

/// exp(-|x-y|^2 / (2 sigma^2)) (kHalf) or exp(-|x-y|^2 / sigma^2) (kUnit).
enum class KernelConvention { kHalf, kUnit };

/// Truncated Gaussian affinity. Entries whose kernel value is not strictly
/// above `threshold` are dropped; the diagonal (value 1) is always kept.
SparseSym build_gaussian_affinity(const PointCloud& pc, double sigma,
                                  double threshold,
                                  KernelConvention convention = KernelConvention::kHalf);

/// W = (A + A^T) / 2 with A_ij = 1 iff j is among the k nearest neighbors of
/// i (self excluded, ties to the smaller index). Exact brute-force scan.
SparseSym build_knn_affinity(const PointCloud& pc, Index k);

/// Row sums. Throws DegenerateError naming the first isolated node.
Vector degree(const SparseSym& w);

/// eta_i = d_i / sqrt(sum_j d_j).
Vector deflation_vector(const Vector& d);

/// Union of the column supports of the rows in `batch`.
IndexSet neighborhood(const SparseSym& w, const IndexSet& batch);

/// Connected component id per node (ids ordered by smallest member).
std::vector<Index> connected_components(const SparseSym& w);

/// Textual COO: "n nnz" header, then "i j w" per stored entry in row-major
/// order, weights printed in shortest round-trip form.
void save_coo(const SparseSym& w, const std::filesystem::path& path);
void write_coo(const SparseSym& w, std::ostream& out);
SparseSym load_coo(const std::filesystem::path& path);
SparseSym read_coo(std::istream& in);

}  // namespace specnet
