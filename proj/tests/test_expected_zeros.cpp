#include "banach/expected_zeros.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace banach;

namespace {

double circle_value(int m) { return 2.0 * std::sqrt(m * (m + 1) / 3.0); }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST(ExpectedZeros, ConstantsHaveNoZeros)
{
  EXPECT_EQ(expected_zeros(FunctionSpace::trig(Manifold::circle(), 0, true), build_grid(Manifold::circle(), 64)), 0.0);
  const FunctionSpace c = FunctionSpace::trig(Manifold::torus2(), 0, true);
  EXPECT_EQ(expected_zeros(c, build_grid(Manifold::torus2(), 16)), 0.0);
}

TEST(ExpectedZeros, CircleTable)
{
  const QuadratureGrid g = build_grid(Manifold::circle(), 1024);
  for (int m = 1; m <= 5; ++m) {
    EXPECT_LE(rel(expected_zeros(FunctionSpace::trig(Manifold::circle(), m, true), g), circle_value(m)), 1e-12) << m;
  }
  // without the constant every sample of degree 1 has exactly two zeros
  EXPECT_NEAR(expected_zeros(FunctionSpace::trig(Manifold::circle(), 1, false), g), 2.0, 1e-12);
  // the value does not depend on the inner product rule scale
  EXPECT_LE(rel(expected_zeros(FunctionSpace::trig(Manifold::circle(), 3, true, InnerProductRule::PlainL2), g),
                circle_value(3)),
            1e-12);
}

TEST(ExpectedZeros, StableUnderGridDoubling)
{
  const FunctionSpace circle = FunctionSpace::trig(Manifold::circle(), 4, true);
  EXPECT_LE(rel(expected_zeros(circle, build_grid(Manifold::circle(), 64)),
                expected_zeros(circle, build_grid(Manifold::circle(), 128))),
            1e-12);
  const std::vector<FunctionSpace> torus{FunctionSpace::trig(Manifold::torus2(), {2, 1}, true),
                                         FunctionSpace::trig(Manifold::torus2(), {1, 3}, false)};
  EXPECT_LE(rel(expected_zeros(torus, build_grid(Manifold::torus2(), 16)),
                expected_zeros(torus, build_grid(Manifold::torus2(), 32))),
            1e-10);
}

TEST(ExpectedZeros, ProductSpacesFactorize)
{
  const QuadratureGrid g = build_grid(Manifold::torus2(), 24);
  for (int d1 = 1; d1 <= 3; ++d1)
    for (int d2 = 1; d2 <= 3; ++d2) {
      const std::vector<FunctionSpace> spaces{FunctionSpace::trig(Manifold::torus2(), {d1, 0}, true),
                                              FunctionSpace::trig(Manifold::torus2(), {0, d2}, true)};
      EXPECT_LE(rel(expected_zeros(spaces, g), circle_value(d1) * circle_value(d2)), 1e-6) << d1 << " " << d2;
    }
  const std::vector<FunctionSpace> pure{FunctionSpace::trig(Manifold::torus2(), {1, 0}, false),
                                        FunctionSpace::trig(Manifold::torus2(), {0, 1}, false)};
  EXPECT_NEAR(expected_zeros(pure, g), 4.0, 1e-10);
}

TEST(ExpectedZeros, EqualSpacesReduceToVolume)
{
  const QuadratureGrid g = build_grid(Manifold::torus2(), 16);
  const FunctionSpace s = FunctionSpace::trig(Manifold::torus2(), {2, 1}, true);
  const std::vector<FunctionSpace> twice{s, s};
  EXPECT_LE(rel(expected_zeros(s, g), expected_zeros(twice, g)), 1e-12);
}

TEST(ExpectedZeros, SubdomainsAddUp)
{
  const QuadratureGrid g = build_grid(Manifold::circle(), 256);
  const FunctionSpace s = FunctionSpace::trig(Manifold::circle(), 3, true);
  const double full = expected_zeros(s, g);
  const double left = expected_zeros(s, g, SubdomainBox{{{0.0, std::numbers::pi}}});
  const double right = expected_zeros(s, g, SubdomainBox{{{std::numbers::pi, 2 * std::numbers::pi}}});
  EXPECT_NEAR(left + right, full, 1e-12 * full);
  // homogeneous ensemble: the density is uniform
  EXPECT_NEAR(left, 0.5 * full, 1e-12 * full);

  const QuadratureGrid t = build_grid(Manifold::torus2(), 16);
  const std::vector<FunctionSpace> spaces{FunctionSpace::trig(Manifold::torus2(), {2, 1}, true),
                                          FunctionSpace::trig(Manifold::torus2(), {1, 2}, true)};
  const double tfull = expected_zeros(spaces, t);
  double sum = 0.0;
  for (double x0 : {0.0, std::numbers::pi})
    for (double y0 : {0.0, std::numbers::pi})
      sum += expected_zeros(spaces, t, SubdomainBox{{{x0, x0 + std::numbers::pi}, {y0, y0 + std::numbers::pi}}});
  EXPECT_NEAR(sum, tfull, 1e-12 * tfull);
}

TEST(ExpectedZeros, Errors)
{
  const QuadratureGrid t = build_grid(Manifold::torus2(), 8);
  const std::vector<FunctionSpace> one{FunctionSpace::trig(Manifold::torus2(), 1, true)};
  EXPECT_THROW(expected_zeros(one, t), InvalidArgument);
  EXPECT_THROW(expected_zeros(FunctionSpace::trig(Manifold::torus2(), 1, true), t, SubdomainBox{{{0.0, 1.0}}}),
               InvalidArgument);
  EXPECT_THROW(expected_zeros(FunctionSpace::trig(Manifold::circle(), 1, true), t), InvalidArgument);
}
