#include <gtest/gtest.h>

#include <random>

#include "qclose/density_fit.hpp"
#include "qclose/quaternion.hpp"

using namespace qclose;

namespace {

Quaternion random_q(std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(-1, 1);
  return {u(g), u(g), u(g), u(g)};
}

double dist(const Quaternion& a, const Quaternion& b) { return (a - b).norm(); }

}  // namespace

TEST(Quaternion, UnitsMultiplyLikeHamilton) {
  const Quaternion i(0, 1, 0, 0), j(0, 0, 1, 0), k(0, 0, 0, 1), one(1, 0, 0, 0);
  EXPECT_EQ(dist(i * j, k), 0.0);
  EXPECT_EQ(dist(j * k, i), 0.0);
  EXPECT_EQ(dist(k * i, j), 0.0);
  EXPECT_EQ(dist(j * i, -k), 0.0);
  EXPECT_EQ(dist(i * i, -one), 0.0);
  EXPECT_EQ(dist(i * j * k, -one), 0.0);
}

TEST(Quaternion, AssociativeAndNormMultiplicative) {
  std::mt19937_64 g(3);
  for (int it = 0; it < 100; ++it) {
    const Quaternion a = random_q(g), b = random_q(g), c = random_q(g);
    EXPECT_LT(dist((a * b) * c, a * (b * c)), 1e-14);
    EXPECT_NEAR((a * b).norm(), a.norm() * b.norm(), 1e-14);
    EXPECT_LT(dist(conjugate(a * b), conjugate(b) * conjugate(a)), 1e-14);
    EXPECT_NEAR(scalar_of_product(a, b), (a * b).s, 1e-15);
  }
}

TEST(Quaternion, PureProductIsMinusDotPlusCross) {
  const Vec3 a(0.3, -1.2, 2.0), b(1.5, 0.1, -0.7);
  const Quaternion p = Quaternion::pure(a) * Quaternion::pure(b);
  EXPECT_NEAR(p.s, -a.dot(b), 1e-15);
  EXPECT_LT((p.v - a.cross(b)).norm(), 1e-15);
}

TEST(Quaternion, LeftMultiplicationBlock) {
  std::mt19937_64 g(5);
  for (int it = 0; it < 20; ++it) {
    const Quaternion f = random_q(g), c = random_q(g);
    const Eigen::Vector4d cv(c.s, c.v[0], c.v[1], c.v[2]);
    const Eigen::Vector4d out = quaternion_matrix_block(f) * cv;
    const Quaternion ref = f * c;
    for (int m = 0; m < 4; ++m) EXPECT_NEAR(out[m], ref[m], 1e-15);
  }
}
