#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "specnet/errors.hpp"
#include "specnet/graph.hpp"
#include "specnet/random.hpp"
#include "support.hpp"

namespace specnet {
namespace {

PointCloud cloud(std::initializer_list<std::initializer_list<double>> rows) {
  PointCloud pc;
  pc.points.resize(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (double v : r) pc.points(i, j++) = v;
    ++i;
  }
  return pc;
}

TEST(GaussianAffinity, CoincidentPoints) {
  const SparseSym w = build_gaussian_affinity(cloud({{0.3, 0.3}, {0.3, 0.3}}), 0.7, 0.6);
  EXPECT_DOUBLE_EQ(w.at(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(w.at(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(w.at(1, 1), 1.0);
}

TEST(GaussianAffinity, KernelValueAboveThreshold) {
  const SparseSym w = build_gaussian_affinity(cloud({{0.0, 0.0}, {0.1, 0.0}}), 0.1, 0.6);
  EXPECT_NEAR(w.at(0, 1), std::exp(-0.5), 1e-15);
  EXPECT_NEAR(w.at(0, 1), 0.6065, 1e-4);
}

TEST(GaussianAffinity, KernelValueBelowThresholdDropped) {
  const SparseSym w = build_gaussian_affinity(cloud({{0.0, 0.0}, {0.11, 0.0}}), 0.1, 0.6);
  EXPECT_EQ(w.at(0, 1), 0.0);
  EXPECT_EQ(w.nnz(), 2);
}

TEST(GaussianAffinity, UnitConvention) {
  const SparseSym w = build_gaussian_affinity(cloud({{0.0, 0.0}, {0.1, 0.0}}), 0.1, 0.3,
                                              KernelConvention::kUnit);
  EXPECT_NEAR(w.at(0, 1), std::exp(-1.0), 1e-15);
}

TEST(GaussianAffinity, ThresholdFaithfulBruteForce) {
  const PointCloud pc = gen_one_moon(150, 0.01, 5);
  const double sigma = 0.2, thr = 0.6;
  const SparseSym w = build_gaussian_affinity(pc, sigma, thr);
  for (Index i = 0; i < pc.size(); ++i) {
    for (Index j = 0; j < pc.size(); ++j) {
      const double k = std::exp(-(pc.points.row(i) - pc.points.row(j)).squaredNorm() /
                                (2 * sigma * sigma));
      if (i == j) {
        EXPECT_EQ(w.at(i, j), 1.0);
      } else if (k > thr) {
        EXPECT_NEAR(w.at(i, j), k, 1e-15);
      } else {
        EXPECT_EQ(w.at(i, j), 0.0);
      }
      EXPECT_EQ(w.at(i, j), w.at(j, i));
    }
  }
}

TEST(GaussianAffinity, RejectsBadArguments) {
  const PointCloud pc = cloud({{0.0}, {1.0}});
  EXPECT_THROW(build_gaussian_affinity(pc, 0.0, 0.5), InputError);
  EXPECT_THROW(build_gaussian_affinity(pc, 1.0, 1.0), InputError);
  EXPECT_THROW(build_gaussian_affinity(pc, 1.0, -0.1), InputError);
}

TEST(KnnAffinity, CollinearExample) {
  const SparseSym w = build_knn_affinity(cloud({{0.0}, {1.0}, {10.0}}), 1);
  EXPECT_DOUBLE_EQ(w.at(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(w.at(1, 2), 0.5);
  EXPECT_DOUBLE_EQ(w.at(2, 1), 0.5);
  EXPECT_EQ(w.at(0, 2), 0.0);
  EXPECT_EQ(w.at(0, 0), 0.0);
}

TEST(KnnAffinity, TwoPoints) {
  const SparseSym w = build_knn_affinity(cloud({{0.0, 1.0}, {2.0, 3.0}}), 1);
  Matrix expected(2, 2);
  expected << 0, 1, 1, 0;
  EXPECT_EQ(w.to_dense(), expected);
}

TEST(KnnAffinity, TiesGoToLowerIndex) {
  // Node 0 is equidistant from 1, 2 and 3.
  const PointCloud pc = cloud({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}});
  const SparseSym w = build_knn_affinity(pc, 2);
  EXPECT_GT(w.at(0, 1), 0.0);
  EXPECT_GT(w.at(0, 2), 0.0);
  // 3 chose 0 but 0 did not choose 3.
  EXPECT_DOUBLE_EQ(w.at(0, 3), 0.5);
  EXPECT_EQ(build_knn_affinity(pc, 2), w);
}

TEST(KnnAffinity, DuplicatePointsDeterministic) {
  const PointCloud pc = cloud({{1.0}, {1.0}, {1.0}, {5.0}});
  const SparseSym a = build_knn_affinity(pc, 1);
  EXPECT_EQ(a, build_knn_affinity(pc, 1));
  EXPECT_DOUBLE_EQ(a.at(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(a.at(2, 0), 0.5);
}

TEST(KnnAffinity, ValuesAndOutDegree) {
  const PointCloud pc = gen_two_moons(120, 3);
  const Index k = 7;
  const SparseSym w = build_knn_affinity(pc, k);
  // Reconstruct A: row i of A has exactly k ones.
  for (Index i = 0; i < w.size(); ++i) {
    const auto vals = w.row_values(i);
    for (double v : vals) EXPECT_TRUE(v == 0.5 || v == 1.0);
    EXPECT_EQ(w.at(i, i), 0.0);
  }
  // Brute force A rows.
  Index total = 0;
  for (Index i = 0; i < pc.size(); ++i) {
    std::vector<std::pair<double, Index>> dist;
    for (Index j = 0; j < pc.size(); ++j) {
      if (j != i) dist.push_back({(pc.points.row(i) - pc.points.row(j)).squaredNorm(), j});
    }
    std::sort(dist.begin(), dist.end());
    for (Index m = 0; m < k; ++m) {
      const Index j = dist[static_cast<std::size_t>(m)].second;
      EXPECT_GE(w.at(i, j), 0.5);
      ++total;
    }
  }
  double sum = 0.0;
  for (double v : w.values()) sum += v;
  EXPECT_DOUBLE_EQ(sum, static_cast<double>(total));
}

TEST(KnnAffinity, RejectsKTooLarge) {
  EXPECT_THROW(build_knn_affinity(cloud({{0.0}, {1.0}}), 2), InputError);
  EXPECT_THROW(build_knn_affinity(cloud({{0.0}, {1.0}}), 0), InputError);
}

TEST(Degree, Examples) {
  Matrix two(2, 2);
  two << 0, 1, 1, 0;
  EXPECT_EQ(degree(SparseSym::from_dense(two)), Vector::Ones(2));
  const Vector d = degree(testing::path3());
  EXPECT_EQ(d, (Vector(3) << 1, 2, 1).finished());
}

TEST(Degree, IsolatedNode) {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 1) = m(1, 0) = 1.0;
  EXPECT_THROW(degree(SparseSym::from_dense(m)), DegenerateError);
}

TEST(Deflation, Examples) {
  const Vector eta = deflation_vector((Vector(3) << 1, 2, 1).finished());
  EXPECT_NEAR(eta[0], 0.5, 1e-15);
  EXPECT_NEAR(eta[1], 1.0, 1e-15);
  EXPECT_NEAR(eta[2], 0.5, 1e-15);
  const Vector e2 = deflation_vector(Vector::Ones(2));
  EXPECT_NEAR(e2[0], 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_THROW(deflation_vector((Vector(2) << 1, 0).finished()), InputError);
}

TEST(Deflation, AnnihilatesConstants) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SparseSym w = testing::random_affinity(40, seed);
    const Vector d = degree(w);
    const Vector eta = deflation_vector(d);
    EXPECT_NEAR(eta.sum(), std::sqrt(d.sum()), 1e-12 * std::sqrt(d.sum()));
    const Vector ones = Vector::Ones(40);
    const Vector r = w.to_dense() * ones - eta * eta.dot(ones);
    EXPECT_LT(r.norm(), 1e-12 * d.norm());
  }
}

TEST(Neighborhood, PathGraph) {
  const SparseSym w = testing::path3();
  EXPECT_EQ(neighborhood(w, IndexSet::from_unsorted({0}, 3)),
            IndexSet::from_unsorted({1}, 3));
  Matrix m = w.to_dense();
  m(0, 0) = 1.0;
  EXPECT_EQ(neighborhood(SparseSym::from_dense(m), IndexSet::from_unsorted({0}, 3)),
            IndexSet::from_unsorted({0, 1}, 3));
}

TEST(Neighborhood, AllAndDense) {
  const SparseSym w = testing::path3();
  EXPECT_EQ(neighborhood(w, IndexSet::range(0, 3)), IndexSet::range(0, 3));
  const SparseSym dense = SparseSym::from_dense(Matrix::Ones(5, 5));
  EXPECT_EQ(neighborhood(dense, IndexSet::from_unsorted({3}, 5)), IndexSet::range(0, 5));
}

TEST(Neighborhood, MatchesBruteForce) {
  const SparseSym w = testing::random_affinity(60, 9, 0.05, false);
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Index> b;
    for (int k = 0; k < 4; ++k) b.push_back(static_cast<Index>(rng.below(60)));
    const IndexSet batch = IndexSet::from_unsorted(b, 60);
    std::set<Index> expect;
    for (Index i : batch) {
      for (Index j = 0; j < 60; ++j) {
        if (w.at(i, j) != 0.0) expect.insert(j);
      }
    }
    const IndexSet got = neighborhood(w, batch);
    EXPECT_EQ(std::vector<Index>(got.begin(), got.end()),
              std::vector<Index>(expect.begin(), expect.end()));
  }
}

TEST(IndexSetTest, SortsAndValidates) {
  const IndexSet s = IndexSet::from_unsorted({3, 1, 3, 0}, 4);
  EXPECT_EQ(s.size(), 3);
  EXPECT_TRUE(s.contains(3));
  EXPECT_FALSE(s.contains(2));
  EXPECT_THROW(IndexSet::from_unsorted({4}, 4), InputError);
  EXPECT_EQ(s.merged(IndexSet::from_unsorted({2}, 4)), IndexSet::range(0, 4));
}

TEST(SparseSymTest, RejectsAsymmetricAndNonPositive) {
  EXPECT_THROW(SparseSym::from_triplets(2, {{0, 1, 1.0}}), InputError);
  EXPECT_THROW(SparseSym::from_triplets(2, {{0, 1, 1.0}, {1, 0, 2.0}}), InputError);
  EXPECT_THROW(SparseSym::from_triplets(2, {{0, 1, -1.0}, {1, 0, -1.0}}), InputError);
  EXPECT_THROW(SparseSym::from_triplets(2, {{0, 2, 1.0}, {2, 0, 1.0}}), InputError);
}

TEST(Coo, WritesNormalizedFormat) {
  std::ostringstream out;
  write_coo(SparseSym::from_triplets(2, {{1, 0, 1.0}, {0, 1, 1.0}}), out);
  EXPECT_EQ(out.str(), "2 2\n0 1 1\n1 0 1\n");
}

TEST(Coo, RoundTripBitExact) {
  const SparseSym w = testing::random_affinity(100, 17, 0.1);
  const auto dir = testing::fresh_dir("coo");
  save_coo(w, dir / "g.coo");
  const SparseSym back = load_coo(dir / "g.coo");
  EXPECT_EQ(back, w);
}

TEST(Coo, ParseErrors) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_coo(in);
  };
  EXPECT_THROW(parse("2 1\n0 1 1\n"), ParseError);
  EXPECT_THROW(parse("two 2\n"), ParseError);
  EXPECT_THROW(parse("2 2\n0 1 1\n1 5 1\n"), ParseError);
  EXPECT_THROW(parse("2 3\n0 1 1\n1 0 1\n"), ParseError);
  try {
    parse("2 2\n0 1 1\n1 0 x\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_coo("/nonexistent/graph.coo"), IoError);
}

TEST(Components, CountsPieces) {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 1) = m(1, 0) = 1.0;
  m(2, 3) = m(3, 2) = 1.0;
  const auto c = connected_components(SparseSym::from_dense(m));
  EXPECT_EQ(c, (std::vector<Index>{0, 0, 1, 1}));
}

}  // namespace
}  // namespace specnet
