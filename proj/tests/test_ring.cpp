#include "banach/function_space.hpp"
#include "banach/random_fields.hpp"
#include "banach/ring.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace banach;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kPi = std::numbers::pi;

double rel(double a, double b)
{
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

BanachRing b_and_twice_b(const BanachField& b)
{
  return BanachRing({b, combine({{2.0, b}})}, {"B", "2B"});
}

}  // namespace

TEST(Monomials, Enumeration)
{
  EXPECT_EQ(enumerate_monomials(3, 0).size(), 1u);
  EXPECT_EQ(enumerate_monomials(3, 2).size(), 6u);
  EXPECT_EQ(enumerate_monomials(4, 3).size(), 20u);
  const auto m = enumerate_monomials(2, 2);
  EXPECT_EQ(m[0], (Monomial{0, 0}));
  EXPECT_EQ(m[1], (Monomial{0, 1}));
  EXPECT_EQ(m[2], (Monomial{1, 1}));
}

TEST(Ring, Construction)
{
  const QuadratureGrid g = build_grid(Manifold::torus2(), 4);
  const BanachField b = BanachField::constant(g, ConvexBody::ball(2));
  EXPECT_THROW(BanachRing({}), InvalidArgument);
  EXPECT_THROW(BanachRing({b, b}, {"only-one"}), InvalidArgument);
  EXPECT_THROW(BanachRing({b, BanachField::constant(build_grid(Manifold::torus2(), 5), ConvexBody::ball(2))}),
               InvalidArgument);
  const BanachRing ring({b, b});
  EXPECT_EQ(ring.names()[1], "B2");
  EXPECT_EQ(ring.monomial_name({0, 1}), "B1*B2");
  EXPECT_EQ(ring.monomial_name({}), "1");
}

TEST(Ring, FunctionalI)
{
  std::mt19937_64 rng(1);
  const QuadratureGrid g = build_grid(Manifold::torus2(), 5);
  const BanachField b = random_ellipsoid_field(g, rng), c = random_ellipsoid_field(g, rng);
  const BanachRing ring({b, c});
  EXPECT_EQ(ring.functional_I(ring.unit()), 0.0);
  EXPECT_EQ(ring.functional_I(ring.generator(0)), 0.0);
  EXPECT_LE(rel(ring.functional_I(ring.monomial_element({0, 0})), banach_volume(b)), 1e-12);
  EXPECT_DOUBLE_EQ(ring.functional_I(ring.monomial_element({1, 0})), banach_mixed_volume({b, c}));
  const RingElement x = ring.monomial_element({0, 1}) * 2.0 - ring.monomial_element({1, 1});
  EXPECT_NEAR(ring.functional_I(x), 2 * banach_mixed_volume({b, c}) - banach_volume(c), 1e-10 * banach_volume(c));
}

TEST(Ring, MultiplyAndErrors)
{
  const QuadratureGrid g = build_grid(Manifold::torus2(), 4);
  const BanachField b = BanachField::constant(g, ConvexBody::ball(2));
  const BanachRing ring({b, b});
  const RingElement p = ring.multiply(ring.generator(0) + ring.generator(1), ring.generator(1));
  EXPECT_EQ(p.degree, 2);
  EXPECT_DOUBLE_EQ(p.coefficients(static_cast<Eigen::Index>(ring.monomial_index({0, 1}))), 1.0);
  EXPECT_DOUBLE_EQ(p.coefficients(static_cast<Eigen::Index>(ring.monomial_index({1, 1}))), 1.0);
  EXPECT_THROW(ring.multiply(p, ring.generator(0)), InvalidArgument);
  EXPECT_THROW(ring.monomials(3), InvalidArgument);
  EXPECT_THROW(ring.functional_I(RingElement{2, VectorXd::Ones(2)}), InvalidArgument);
  EXPECT_THROW(ring.generator(0) + ring.unit(), InvalidArgument);
  EXPECT_EQ(ring.multiply(ring.unit(), ring.generator(1)).coefficients, ring.generator(1).coefficients);
}

TEST(Pairing, CircleSegment)
{
  const QuadratureGrid g = build_grid(Manifold::circle(), 16);
  const BanachField b = BanachField::constant(g, ConvexBody::segment(VectorXd::Ones(1)));
  const BanachRing single({b});
  ASSERT_EQ(single.pairing_matrix(1).size(), 1);
  EXPECT_NEAR(single.pairing_matrix(1)(0, 0), 4 * kPi, 1e-13);

  const BanachRing ring = b_and_twice_b(b);
  const MatrixXd l1 = ring.pairing_matrix(1);
  ASSERT_EQ(l1.rows(), 2);
  ASSERT_EQ(l1.cols(), 1);
  EXPECT_NEAR(l1(0, 0), 4 * kPi, 1e-13);
  EXPECT_NEAR(l1(1, 0), 8 * kPi, 1e-13);
  EXPECT_EQ(ring.pairing_rank(1), 1);
  const auto kernel = ring.kernel_basis(1);
  ASSERT_EQ(kernel.size(), 1u);
  // proportional to (2B) - 2 (B)
  EXPECT_NEAR(std::abs(kernel[0].coefficients(0) / kernel[0].coefficients(1)), 2.0, 1e-12);
  EXPECT_LT(kernel[0].coefficients(0) * kernel[0].coefficients(1), 0.0);
  EXPECT_EQ(ring.quotient_dimension(1), 1);
}

TEST(Pairing, TransposeSymmetryAndRanks)
{
  std::mt19937_64 rng(2);
  const QuadratureGrid g = build_grid(Manifold::torus2(), 4);
  std::vector<BanachField> gens;
  for (int i = 0; i < 3; ++i) gens.push_back(random_ellipsoid_field(g, rng));
  const BanachRing ring(gens);
  for (int p = 0; p <= 2; ++p) {
    EXPECT_EQ(ring.pairing_matrix(p), ring.pairing_matrix(2 - p).transpose());
    EXPECT_EQ(ring.pairing_rank(p), ring.pairing_rank(2 - p));
  }
  // generic family: no degree-1 kernel
  EXPECT_TRUE(ring.kernel_basis(1).empty());
  EXPECT_EQ(ring.quotient_dimension(2), 1);
  EXPECT_EQ(ring.quotient_dimension(0), 1);
}

TEST(Pairing, ZeroFamilyHasTrivialQuotient)
{
  const QuadratureGrid g = build_grid(Manifold::torus2(), 4);
  const BanachField zero = ellipsoid_field(FunctionSpace::trig(Manifold::torus2(), {0, 0}, true), g);
  const BanachRing ring({zero});
  EXPECT_EQ(ring.quotient_dimension(2), 0);
  EXPECT_EQ(ring.kernel_basis(0).size(), 1u);
}

TEST(Pairing, HomogeneityInAGenerator)
{
  std::mt19937_64 rng(3);
  const QuadratureGrid g = build_grid(Manifold::torus2(), 4);
  const BanachField b = random_ellipsoid_field(g, rng), c = random_ellipsoid_field(g, rng);
  const double s = 1.7;
  const BanachRing base({b, c}), scaled({combine({{s, b}}), c});
  const MatrixXd l0 = base.pairing_matrix(2), l1 = scaled.pairing_matrix(2);
  const auto& mons = base.monomials(2);
  for (std::size_t i = 0; i < mons.size(); ++i) {
    const int k = static_cast<int>(std::count(mons[i].begin(), mons[i].end(), 0));
    EXPECT_LE(rel(l1(static_cast<Eigen::Index>(i), 0), std::pow(s, k) * l0(static_cast<Eigen::Index>(i), 0)), 1e-12);
  }
}

TEST(Pairing, ThreadCountDoesNotChangeValues)
{
  std::mt19937_64 rng(4);
  const QuadratureGrid g = build_grid(Manifold::torus2(), 6);
  std::vector<BanachField> gens;
  for (int i = 0; i < 4; ++i) gens.push_back(random_ellipsoid_field(g, rng));
  EXPECT_EQ(BanachRing(gens, {}, {}, 1).pairing_matrix(1), BanachRing(gens, {}, {}, 4).pairing_matrix(1));
}

TEST(IdealCheck, BAndTwiceBOnTorus)
{
  const QuadratureGrid g = build_grid(Manifold::torus2(), 8);
  const BanachField b = ellipsoid_field(FunctionSpace::trig(Manifold::torus2(), 1, true), g);
  const BanachRing ring = b_and_twice_b(b);
  const auto kernel = ring.kernel_basis(1);
  ASSERT_EQ(kernel.size(), 1u);
  const IdealCheckReport r = ring.ideal_check(kernel[0], 1e-10);
  EXPECT_TRUE(r.in_kernel);
  ASSERT_EQ(r.product_residuals.size(), 2u);
  for (double x : r.product_residuals) EXPECT_LE(x, 1e-10);
  EXPECT_TRUE(r.passed);
  // ((2B) - 2B) * B pairs to zero with everything
  const RingElement v = ring.generator(1) - ring.generator(0) * 2.0;
  const RingElement vb = ring.multiply(v, ring.generator(0));
  EXPECT_LE(std::abs(ring.functional_I(vb)), 1e-10 * ring.top_value({0, 0}));
}

TEST(IdealCheck, RandomRankDeficientFamilies)
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coef(0.2, 2.0);
  const QuadratureGrid g = build_grid(Manifold::torus2(), 4);
  for (int f = 0; f < 20; ++f) {
    const BanachField a = random_ellipsoid_field(g, rng), b = random_ellipsoid_field(g, rng);
    const BanachRing ring({a, b, combine({{coef(rng), a}, {coef(rng), b}})});
    const auto kernel = ring.kernel_basis(1);
    ASSERT_EQ(kernel.size(), 1u);
    const IdealCheckReport r = ring.ideal_check(kernel[0], 1e-8);
    EXPECT_TRUE(r.passed) << "family " << f << " self " << r.self_residual;
    for (const auto& v : ring.kernel_basis(2)) EXPECT_TRUE(ring.ideal_check(v, 1e-8).passed);
  }
}

TEST(IdealCheck, FlagsNonKernelVectors)
{
  std::mt19937_64 rng(6);
  const QuadratureGrid g = build_grid(Manifold::torus2(), 4);
  const BanachRing ring({random_ellipsoid_field(g, rng), random_ellipsoid_field(g, rng)});
  const IdealCheckReport r = ring.ideal_check(ring.generator(0), 1e-8);
  EXPECT_FALSE(r.in_kernel);
  EXPECT_FALSE(r.passed);
  EXPECT_GT(r.self_residual, 1e-3);
}
