#include <gtest/gtest.h>

#include <random>

#include "autoalpha/linalg.hpp"
#include "../oracles.hpp"

using namespace autoalpha;

namespace {

Eigen::VectorXd random_vec(Eigen::Index d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = n(rng);
  return v;
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(SpdMatrix, Identity) {
  const auto m = SpdMatrix::identity(3);
  EXPECT_EQ(m.entries(), Eigen::MatrixXd::Identity(3, 3));
  EXPECT_EQ(m.inverse(), Eigen::MatrixXd::Identity(3, 3));
  EXPECT_EQ(SpdMatrix::identity(1).entries()(0, 0), 1.0);
  EXPECT_THROW(SpdMatrix::identity(0), std::invalid_argument);
  EXPECT_THROW(SpdMatrix::identity(-2), std::invalid_argument);
}

TEST(SpdMatrix, QuadFormOfIdentityIsSquaredNorm) {
  std::mt19937_64 rng(1);
  const auto m = SpdMatrix::identity(5);
  for (int i = 0; i < 20; ++i) {
    const auto x = random_vec(5, rng);
    EXPECT_NEAR(m.quad_form_inverse(x), x.squaredNorm(), 1e-12);
  }
  Eigen::VectorXd x(2);
  x << 3, 4;
  EXPECT_DOUBLE_EQ(SpdMatrix::identity(2).quad_form_inverse(x), 25.0);
}

TEST(SpdMatrix, DiagonalUpdate) {
  auto m = SpdMatrix::identity(2);
  Eigen::VectorXd x(2);
  x << 1, 0;
  m.rank_one_update(x);
  Eigen::MatrixXd a(2, 2), ainv(2, 2);
  a << 2, 0, 0, 1;
  ainv << 0.5, 0, 0, 1;
  EXPECT_EQ(m.entries(), a);
  EXPECT_LT(max_abs(m.inverse() - ainv), 1e-15);
  EXPECT_NEAR(m.quad_form_inverse(x), 0.5, 1e-15);
  Eigen::VectorXd b(2);
  b << 1, 0;
  EXPECT_LT((m.solve(b) - Eigen::Vector2d(0.5, 0)).norm(), 1e-15);
  Eigen::VectorXd b2(2);
  b2 << 2, -1;
  EXPECT_LT((SpdMatrix::identity(2).solve(b2) - b2).norm(), 1e-15);
}

TEST(SpdMatrix, ZeroUpdateLeavesMatrixUnchanged) {
  std::mt19937_64 rng(2);
  auto m = SpdMatrix::identity(4);
  m.rank_one_update(random_vec(4, rng));
  const Eigen::MatrixXd before = m.entries();
  const Eigen::MatrixXd inv_before = m.inverse();
  m.rank_one_update(Eigen::VectorXd::Zero(4));
  EXPECT_EQ(m.entries(), before);
  EXPECT_LT(max_abs(m.inverse() - inv_before), 1e-15);
}

TEST(SpdMatrix, DimensionMismatch) {
  auto m = SpdMatrix::identity(3);
  EXPECT_THROW(m.rank_one_update(Eigen::VectorXd::Zero(2)), std::invalid_argument);
  EXPECT_THROW(m.quad_form_inverse(Eigen::VectorXd::Zero(4)), std::invalid_argument);
  EXPECT_THROW(m.solve(Eigen::VectorXd::Zero(1)), std::invalid_argument);
}

TEST(SpdMatrix, FiftyUpdatesMatchDirectInverse) {
  std::mt19937_64 rng(5);
  auto m = SpdMatrix::identity(8);
  for (int i = 0; i < 50; ++i) m.rank_one_update(random_vec(8, rng));
  EXPECT_LT(max_abs(m.inverse() - oracle::direct_inverse(m.entries())), 1e-8);
  EXPECT_LT(max_abs(m.entries() * m.inverse() - Eigen::MatrixXd::Identity(8, 8)), 1e-8);
}

TEST(SpdMatrix, InvariantsAlongRandomSequences) {
  std::mt19937_64 rng(6);
  for (int seq = 0; seq < 30; ++seq) {
    const Eigen::Index d = 1 + seq % 7;
    auto m = SpdMatrix::identity(d, 13);
    const auto probe = random_vec(d, rng);
    double last = m.quad_form_inverse(probe);
    for (int i = 0; i < 60; ++i) {
      m.rank_one_update(random_vec(d, rng, 2.0));
      const double q = m.quad_form_inverse(probe);
      ASSERT_LE(q, last * (1 + 1e-12) + 1e-15);
      ASSERT_GE(q, 0.0);
      last = q;
      ASSERT_TRUE(m.cholesky_succeeds());
      const Eigen::MatrixXd& a = m.entries();
      ASSERT_LE(max_abs(a - a.transpose()), 1e-12 * max_abs(a));
      ASSERT_LT(max_abs(a * m.inverse() - Eigen::MatrixXd::Identity(d, d)), 1e-8);
    }
    EXPECT_GT(m.quad_form_inverse(probe), 0.0);
    EXPECT_EQ(m.quad_form_inverse(Eigen::VectorXd::Zero(d)), 0.0);
  }
}

TEST(SpdMatrix, PeriodicRecompute) {
  std::mt19937_64 rng(7);
  auto m = SpdMatrix::identity(6, 10);
  for (int i = 0; i < 9; ++i) m.rank_one_update(random_vec(6, rng));
  EXPECT_EQ(m.updates_since_recompute(), 9u);
  m.rank_one_update(random_vec(6, rng));
  EXPECT_EQ(m.updates_since_recompute(), 0u);
  EXPECT_LT(max_abs(m.inverse() - oracle::direct_inverse(m.entries())), 1e-8);
}

TEST(SpdMatrix, SolveResidual) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    auto m = SpdMatrix::identity(10);
    for (int i = 0; i < 40; ++i) m.rank_one_update(random_vec(10, rng, 3.0));
    const auto b = random_vec(10, rng);
    const auto y = m.solve(b);
    EXPECT_LE((m.entries() * y - b).norm(), 1e-8 * b.norm());
  }
}

TEST(SpdMatrix, FromPartsValidatesShapes) {
  EXPECT_THROW(SpdMatrix::from_parts(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(3, 3), 0, 10),
               std::invalid_argument);
  const auto m = SpdMatrix::from_parts(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2), 4, 10);
  EXPECT_EQ(m.updates_since_recompute(), 4u);
}
