#include "specnet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "specnet/errors.hpp"
#include "specnet/format.hpp"

namespace specnet {

void PointCloud::validate() const {
  if (points.rows() < 1 || points.cols() < 1) {
    throw InputError("point cloud must contain at least one point of dimension >= 1");
  }
  if (!labels.empty() && static_cast<Index>(labels.size()) != points.rows()) {
    throw InputError("label count " + std::to_string(labels.size()) +
                     " does not match point count " + std::to_string(points.rows()));
  }
  if (!points.allFinite()) throw InputError("point cloud has non-finite coordinates");
}

// ---------------------------------------------------------------------------
// IndexSet

IndexSet IndexSet::from_unsorted(std::vector<Index> indices, Index n) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  if (!indices.empty() && (indices.front() < 0 || indices.back() >= n)) {
    throw InputError("index set entry out of range [0, " + std::to_string(n) + ")");
  }
  return IndexSet(std::move(indices));
}

IndexSet IndexSet::range(Index begin, Index end) {
  std::vector<Index> v(static_cast<std::size_t>(std::max<Index>(0, end - begin)));
  std::iota(v.begin(), v.end(), begin);
  return IndexSet(std::move(v));
}

bool IndexSet::contains(Index i) const {
  return std::binary_search(indices_.begin(), indices_.end(), i);
}

IndexSet IndexSet::merged(const IndexSet& other) const {
  std::vector<Index> out;
  out.reserve(indices_.size() + other.indices_.size());
  std::set_union(indices_.begin(), indices_.end(), other.indices_.begin(),
                 other.indices_.end(), std::back_inserter(out));
  return IndexSet(std::move(out));
}

// ---------------------------------------------------------------------------
// SparseSym

SparseSym::SparseSym(Index n, std::vector<Index> row_ptr, std::vector<Index> col_idx,
                     std::vector<double> values)
    : n_(n),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  validate();
}

void SparseSym::validate() const {
  if (n_ < 0) throw InputError("negative matrix size");
  if (static_cast<Index>(row_ptr_.size()) != n_ + 1 || row_ptr_.front() != 0 ||
      row_ptr_.back() != static_cast<Index>(col_idx_.size()) ||
      col_idx_.size() != values_.size()) {
    throw InputError("inconsistent CSR arrays");
  }
  for (Index i = 0; i < n_; ++i) {
    if (row_ptr_[i + 1] < row_ptr_[i]) throw InputError("row_ptr is not monotone");
    Index prev = -1;
    for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const Index j = col_idx_[k];
      if (j < 0 || j >= n_) {
        throw InputError("column index " + std::to_string(j) + " out of range in row " +
                         std::to_string(i));
      }
      if (j <= prev) {
        throw InputError("column indices not strictly increasing in row " +
                         std::to_string(i));
      }
      prev = j;
      const double v = values_[k];
      if (!std::isfinite(v) || v < 0.0) {
        throw InputError("entry (" + std::to_string(i) + ", " + std::to_string(j) +
                         ") is negative or non-finite");
      }
      if (v == 0.0) {
        throw InputError("explicit zero stored at (" + std::to_string(i) + ", " +
                         std::to_string(j) + ")");
      }
    }
  }
  for (Index i = 0; i < n_; ++i) {
    for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const Index j = col_idx_[k];
      if (at(j, i) != values_[k]) {
        throw InputError("matrix is not symmetric at (" + std::to_string(i) + ", " +
                         std::to_string(j) + ")");
      }
    }
  }
}

SparseSym SparseSym::from_triplets(Index n, std::vector<Triplet> triplets) {
  std::erase_if(triplets, [](const Triplet& t) { return t.value == 0.0; });
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<Index> row_ptr(static_cast<std::size_t>(n) + 1, 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  cols.reserve(triplets.size());
  vals.reserve(triplets.size());
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const Triplet& t = triplets[k];
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n) {
      throw InputError("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                       ") out of range");
    }
    if (k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
      throw InputError("duplicate triplet (" + std::to_string(t.row) + ", " +
                       std::to_string(t.col) + ")");
    }
    ++row_ptr[static_cast<std::size_t>(t.row) + 1];
    cols.push_back(t.col);
    vals.push_back(t.value);
  }
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  return SparseSym(n, std::move(row_ptr), std::move(cols), std::move(vals));
}

SparseSym SparseSym::from_dense(const Matrix& dense) {
  if (dense.rows() != dense.cols()) throw InputError("dense matrix must be square");
  const Index n = dense.rows();
  std::vector<Index> row_ptr{0};
  std::vector<Index> cols;
  std::vector<double> vals;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (dense(i, j) != 0.0) {
        cols.push_back(j);
        vals.push_back(dense(i, j));
      }
    }
    row_ptr.push_back(static_cast<Index>(cols.size()));
  }
  return SparseSym(n, std::move(row_ptr), std::move(cols), std::move(vals));
}

double SparseSym::at(Index i, Index j) const {
  const auto cols = row_cols(i);
  const auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(row_ptr_[i] + (it - cols.begin()))];
}

double SparseSym::max_value() const {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

Matrix SparseSym::to_dense() const {
  Matrix dense = Matrix::Zero(n_, n_);
  for (Index i = 0; i < n_; ++i) {
    const auto cols = row_cols(i);
    const auto vals = row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) dense(i, cols[k]) = vals[k];
  }
  return dense;
}

// ---------------------------------------------------------------------------
// Builders

SparseSym build_gaussian_affinity(const PointCloud& pc, double sigma, double threshold,
                                  KernelConvention convention) {
  pc.validate();
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("sigma must be positive");
  if (!(threshold >= 0.0 && threshold < 1.0)) {
    throw InputError("threshold must lie in [0, 1)");
  }
  const Index n = pc.size();
  const double scale = convention == KernelConvention::kHalf ? 1.0 / (2.0 * sigma * sigma)
                                                             : 1.0 / (sigma * sigma);
  std::vector<std::vector<std::pair<Index, double>>> rows(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    rows[i].emplace_back(i, 1.0);
    for (Index j = i + 1; j < n; ++j) {
      const double dist2 = (pc.points.row(i) - pc.points.row(j)).squaredNorm();
      const double w = std::exp(-dist2 * scale);
      if (w > threshold) {
        rows[i].emplace_back(j, w);
        rows[j].emplace_back(i, w);
      }
    }
  }
  std::vector<Index> row_ptr{0};
  std::vector<Index> cols;
  std::vector<double> vals;
  for (auto& row : rows) {
    std::sort(row.begin(), row.end());
    for (const auto& [j, w] : row) {
      cols.push_back(j);
      vals.push_back(w);
    }
    row_ptr.push_back(static_cast<Index>(cols.size()));
  }
  return SparseSym(n, std::move(row_ptr), std::move(cols), std::move(vals));
}

SparseSym build_knn_affinity(const PointCloud& pc, Index k) {
  pc.validate();
  const Index n = pc.size();
  if (k < 1 || k >= n) {
    throw InputError("knn requires 1 <= k < n (k = " + std::to_string(k) +
                     ", n = " + std::to_string(n) + ")");
  }
  // Squared norms let each distance cost one dot product.
  const Vector sq = pc.points.rowwise().squaredNorm();
  std::vector<std::pair<double, Index>> candidates(static_cast<std::size_t>(n - 1));
  std::map<std::pair<Index, Index>, double> entries;
  for (Index i = 0; i < n; ++i) {
    const Vector dots = pc.points * pc.points.row(i).transpose();
    std::size_t c = 0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      candidates[c++] = {std::max(0.0, sq[i] + sq[j] - 2.0 * dots[j]), j};
    }
    std::partial_sort(candidates.begin(), candidates.begin() + k, candidates.end());
    for (Index m = 0; m < k; ++m) {
      const Index j = candidates[m].second;
      entries[{i, j}] += 0.5;
      entries[{j, i}] += 0.5;
    }
  }
  std::vector<Triplet> triplets;
  triplets.reserve(entries.size());
  for (const auto& [ij, v] : entries) triplets.push_back({ij.first, ij.second, v});
  return SparseSym::from_triplets(n, std::move(triplets));
}

Vector degree(const SparseSym& w) {
  Vector d(w.size());
  for (Index i = 0; i < w.size(); ++i) {
    double sum = 0.0;
    for (double v : w.row_values(i)) sum += v;
    if (sum <= 0.0) {
      throw DegenerateError("isolated node " + std::to_string(i) + " has zero degree");
    }
    d[i] = sum;
  }
  return d;
}

Vector deflation_vector(const Vector& d) {
  if (d.size() == 0 || (d.array() <= 0.0).any() || !d.allFinite()) {
    throw InputError("deflation vector requires positive finite degrees");
  }
  return d / std::sqrt(d.sum());
}

IndexSet neighborhood(const SparseSym& w, const IndexSet& batch) {
  std::vector<Index> out;
  for (Index i : batch) {
    if (i < 0 || i >= w.size()) throw InputError("batch index out of range");
    const auto cols = w.row_cols(i);
    out.insert(out.end(), cols.begin(), cols.end());
  }
  return IndexSet::from_unsorted(std::move(out), w.size());
}

std::vector<Index> connected_components(const SparseSym& w) {
  const Index n = w.size();
  std::vector<Index> comp(static_cast<std::size_t>(n), -1);
  Index next = 0;
  std::vector<Index> stack;
  for (Index s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const Index i = stack.back();
      stack.pop_back();
      for (Index j : w.row_cols(i)) {
        if (comp[j] < 0) {
          comp[j] = next;
          stack.push_back(j);
        }
      }
    }
    ++next;
  }
  return comp;
}

// ---------------------------------------------------------------------------
// COO text format

void write_coo(const SparseSym& w, std::ostream& out) {
  out << w.size() << ' ' << w.nnz() << '\n';
  for (Index i = 0; i < w.size(); ++i) {
    const auto cols = w.row_cols(i);
    const auto vals = w.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      out << i << ' ' << cols[k] << ' ' << format_double(vals[k]) << '\n';
    }
  }
}

void save_coo(const SparseSym& w, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_coo(w, out);
  if (!out) throw IoError("failed writing " + path.string());
}

SparseSym read_coo(std::istream& in) {
  std::string line;
  long long line_no = 1;
  if (!std::getline(in, line)) throw ParseError("line 1: missing header");
  long long n = 0, nnz = 0;
  {
    std::istringstream header(line);
    std::string a, b, extra;
    if (!(header >> a >> b) || (header >> extra) || !parse_int(a, n) ||
        !parse_int(b, nnz) || n < 0 || nnz < 0) {
      throw ParseError("line 1: malformed header, expected \"n nnz\"");
    }
  }
  std::vector<Triplet> triplets;
  std::vector<long long> lines;
  triplets.reserve(static_cast<std::size_t>(nnz));
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::istringstream fields(line);
    std::string si, sj, sv, extra;
    long long i = 0, j = 0;
    double v = 0.0;
    if (!(fields >> si >> sj >> sv) || (fields >> extra) || !parse_int(si, i) ||
        !parse_int(sj, j) || !parse_double(sv, v)) {
      throw ParseError("line " + std::to_string(line_no) + ": expected \"i j w\"");
    }
    if (i < 0 || i >= n || j < 0 || j >= n) {
      throw ParseError("line " + std::to_string(line_no) + ": index out of range [0, " +
                       std::to_string(n) + ")");
    }
    if (!std::isfinite(v) || v <= 0.0) {
      throw ParseError("line " + std::to_string(line_no) + ": weight must be positive");
    }
    triplets.push_back({static_cast<Index>(i), static_cast<Index>(j), v});
    lines.push_back(line_no);
  }
  if (static_cast<long long>(triplets.size()) != nnz) {
    throw ParseError("line " + std::to_string(line_no) + ": header announces " +
                     std::to_string(nnz) + " entries, found " +
                     std::to_string(triplets.size()));
  }
  std::map<std::pair<Index, Index>, std::pair<double, long long>> lookup;
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const auto key = std::make_pair(triplets[k].row, triplets[k].col);
    if (!lookup.emplace(key, std::make_pair(triplets[k].value, lines[k])).second) {
      throw ParseError("line " + std::to_string(lines[k]) + ": duplicate entry");
    }
  }
  for (const auto& [key, value_line] : lookup) {
    const auto mirror = lookup.find({key.second, key.first});
    if (mirror == lookup.end() || mirror->second.first != value_line.first) {
      throw ParseError("line " + std::to_string(value_line.second) + ": entry (" +
                       std::to_string(key.first) + ", " + std::to_string(key.second) +
                       ") has no matching symmetric entry");
    }
  }
  return SparseSym::from_triplets(static_cast<Index>(n), std::move(triplets));
}

SparseSym load_coo(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_coo(in);
}

}  // namespace specnet
