#include "banach/function_space.hpp"
#include "banach/function_space_io.hpp"
#include "banach/random_fields.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace banach;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kPi = std::numbers::pi;

double max_field_difference(const BanachField& a, const BanachField& b)
{
  double worst = 0.0;
  for (std::size_t i = 0; i < a.fibers().size(); ++i) {
    const MatrixXd& ma = a.fiber(i).terms().front().body.shape_matrix();
    const MatrixXd& mb = b.fiber(i).terms().front().body.shape_matrix();
    worst = std::max(worst, (ma - mb).cwiseAbs().maxCoeff() / std::max(1.0, ma.cwiseAbs().maxCoeff()));
  }
  return worst;
}

// span{sin} tabulated on a grid: vanishes at theta = 0.
FunctionSpace sine_only(const QuadratureGrid& grid)
{
  MatrixXd values(1, grid.size()), grads(1, grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    values(0, i) = std::sin(grid.point(i)(0));
    grads(0, i) = std::cos(grid.point(i)(0));
  }
  values(0, 0) = 0.0;
  return FunctionSpace(std::make_shared<const TabulatedBasis>(grid, values, grads), MatrixXd::Identity(1, 1) * 0.5);
}

}  // namespace

TEST(TrigSpace, SpecExamples)
{
  const FunctionSpace a = FunctionSpace::trig(Manifold::circle(), 1, true, InnerProductRule::NormalizedL2);
  ASSERT_EQ(a.size(), 3);
  EXPECT_TRUE(a.gram().isApprox(VectorXd(Eigen::Vector3d(1, 0.5, 0.5)).asDiagonal().toDenseMatrix()));
  const FunctionSpace b = FunctionSpace::trig(Manifold::circle(), 2, false, InnerProductRule::CoefficientWise);
  EXPECT_EQ(b.size(), 4);
  EXPECT_EQ(b.gram(), MatrixXd::Identity(4, 4));
  EXPECT_EQ(FunctionSpace::trig(Manifold::torus2(), 1, true).size(), 9);
  EXPECT_EQ(FunctionSpace::trig(Manifold::torus2(), 1, false).size(), 8);
  EXPECT_EQ(FunctionSpace::trig(Manifold::torus2(), {2, 0}, true).size(), 5);
}

TEST(TrigSpace, PlainL2Gram)
{
  const FunctionSpace s = FunctionSpace::trig(Manifold::torus2(), 1, true, InnerProductRule::PlainL2);
  EXPECT_NEAR(s.gram()(0, 0), 4 * kPi * kPi, 1e-12);
  EXPECT_NEAR(s.gram()(4, 4), kPi * kPi, 1e-12);  // cos * cos
}

TEST(TrigSpace, GramMatchesQuadrature)
{
  // closed-form Gram against a fine-grid inner product
  const FunctionSpace s = FunctionSpace::trig(Manifold::torus2(), {2, 1}, true, InnerProductRule::NormalizedL2);
  const QuadratureGrid g = build_grid(Manifold::torus2(), 16);
  MatrixXd gram = MatrixXd::Zero(s.size(), s.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const VectorXd v = s.basis().jet(g.point(i)).value;
    gram += g.weight(i) * v * v.transpose();
  }
  gram /= 4 * kPi * kPi;
  EXPECT_LE((gram - s.gram()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(TrigSpace, EmptySpaceRejected)
{
  EXPECT_THROW(FunctionSpace::trig(Manifold::circle(), 0, false), InvalidArgument);
  EXPECT_THROW(FunctionSpace::trig(Manifold::torus2(), {0, 0}, false), InvalidArgument);
  EXPECT_THROW(FunctionSpace::trig(Manifold::circle(), -1, true), InvalidArgument);
  EXPECT_THROW(FunctionSpace::trig(Manifold::circle(), std::vector<int>{1, 1}, true), InvalidArgument);
}

TEST(TrigSpace, InnerProductNames)
{
  EXPECT_EQ(inner_product_from_name("plain_l2"), InnerProductRule::PlainL2);
  EXPECT_EQ(inner_product_from_name("coefficient_wise"), InnerProductRule::CoefficientWise);
  EXPECT_THROW(inner_product_from_name("sobolev"), InvalidArgument);
}

TEST(Basis, DerivativesMatchFiniteDifferences)
{
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> angle(0.0, 2 * kPi);
  const double h = 1e-5;
  for (const auto& space : {FunctionSpace::trig(Manifold::circle(), 5, true),
                            FunctionSpace::trig(Manifold::torus2(), {3, 2}, true)}) {
    const int n = space.manifold().dim();
    for (int trial = 0; trial < 20; ++trial) {
      VectorXd p(n);
      for (int c = 0; c < n; ++c) p(c) = angle(rng);
      const Jet jet = space.basis().jet(p);
      for (int c = 0; c < n; ++c) {
        VectorXd pp = p, pm = p;
        pp(c) += h;
        pm(c) -= h;
        const VectorXd fd = (space.basis().jet(pp).value - space.basis().jet(pm).value) / (2 * h);
        for (int j = 0; j < space.size(); ++j) {
          const double d = jet.gradient(c, j);
          EXPECT_LE(std::abs(fd(j) - d), 1e-6 * std::max(1.0, std::abs(d)));
        }
      }
    }
  }
}

TEST(Orthonormal, FactorWhitensGram)
{
  std::mt19937_64 rng(2);
  const FunctionSpace base = FunctionSpace::trig(Manifold::torus2(), 1, true);
  const MatrixXd g = random_spd(base.size(), rng, 0.5);
  const FunctionSpace s = base.with_gram(g);
  const MatrixXd& r = s.orthonormal_factor();
  EXPECT_LE((r * g * r.transpose() - MatrixXd::Identity(s.size(), s.size())).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Orthonormal, GramValidation)
{
  const FunctionSpace base = FunctionSpace::trig(Manifold::circle(), 1, true);
  MatrixXd g = MatrixXd::Identity(3, 3);
  g(2, 2) = -1e-3;
  EXPECT_THROW(base.with_gram(g), NumericError);
  g(2, 2) = 1.0;
  g(0, 1) = 0.5;
  EXPECT_THROW(base.with_gram(g), NumericError);  // asymmetric
  g(0, 1) = 0.0;
  g(2, 2) = 1e-13;
  EXPECT_THROW(base.with_gram(g), NumericError);  // condition number
  EXPECT_THROW(base.with_gram(MatrixXd::Identity(2, 2)), InvalidArgument);
}

TEST(EllipsoidField, CircleDegreeOne)
{
  const QuadratureGrid g = build_grid(Manifold::circle(), 32);
  const FunctionSpace s = FunctionSpace::trig(Manifold::circle(), 1, true);
  const BanachField f = ellipsoid_field(s, g);
  // lambda0 = 1 + 2m = 3, lambda2 = 2
  for (std::size_t i = 0; i < f.fibers().size(); ++i)
    EXPECT_NEAR(f.fiber(i).terms().front().body.shape_matrix()(0, 0), 2.0 / 3.0, 1e-14);
  EXPECT_NEAR(banach_volume(f), 2 * kPi * 2 * std::sqrt(2.0 / 3.0), 1e-12);
}

TEST(EllipsoidField, KacRiceCircleValues)
{
  // lambda0 = 1 + 2m, lambda2 = sum 2 k^2
  const QuadratureGrid g = build_grid(Manifold::circle(), 64);
  for (int m = 1; m <= 6; ++m) {
    double l2 = 0.0;
    for (int k = 1; k <= m; ++k) l2 += 2.0 * k * k;
    const double expect = l2 / (1 + 2 * m);
    const BanachField f = ellipsoid_field(FunctionSpace::trig(Manifold::circle(), m, true), g);
    EXPECT_NEAR(f.fiber(5).terms().front().body.shape_matrix()(0, 0), expect, 1e-12 * expect);
  }
}

TEST(EllipsoidField, ConstantsGiveZeroBodies)
{
  const QuadratureGrid g = build_grid(Manifold::torus2(), 8);
  const BanachField f = ellipsoid_field(FunctionSpace::trig(Manifold::torus2(), {0, 0}, true), g);
  for (const auto& fiber : f.fibers()) EXPECT_EQ(fiber.terms().front().body.shape_matrix().norm(), 0.0);
  EXPECT_EQ(banach_volume(f), 0.0);
}

TEST(EllipsoidField, ProductSpaceIsDegenerate)
{
  const QuadratureGrid g = build_grid(Manifold::torus2(), 8);
  const BanachField f = ellipsoid_field(FunctionSpace::trig(Manifold::torus2(), {2, 0}, true), g);
  for (const auto& fiber : f.fibers()) {
    const MatrixXd& m = fiber.terms().front().body.shape_matrix();
    EXPECT_GT(m(0, 0), 0.1);
    EXPECT_NEAR(m(1, 1), 0.0, 1e-15);
    EXPECT_NEAR(m(0, 1), 0.0, 1e-15);
  }
  EXPECT_NEAR(banach_volume(f), 0.0, 1e-12);
}

TEST(EllipsoidField, VanishingEvaluationNamesNode)
{
  const QuadratureGrid g = build_grid(Manifold::circle(), 8);
  try {
    ellipsoid_field(sine_only(g), g);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("node 0"), std::string::npos) << e.what();
  }
}

TEST(EllipsoidField, InvariantUnderBasisChange)
{
  std::mt19937_64 rng(3);
  const QuadratureGrid g = build_grid(Manifold::torus2(), 8);
  const FunctionSpace s = FunctionSpace::trig(Manifold::torus2(), {1, 2}, true);
  MatrixXd a = random_spd(s.size(), rng, 0.3) + MatrixXd::Identity(s.size(), s.size());
  a(0, 3) += 0.7;
  EXPECT_LE(max_field_difference(ellipsoid_field(s, g), ellipsoid_field(s.transformed(a), g)), 1e-10);
}

TEST(EllipsoidField, InvariantUnderGramScaling)
{
  const QuadratureGrid g = build_grid(Manifold::torus2(), 8);
  const FunctionSpace s = FunctionSpace::trig(Manifold::torus2(), {2, 1}, false);
  EXPECT_LE(max_field_difference(ellipsoid_field(s, g), ellipsoid_field(s.with_gram(7.5 * s.gram()), g)), 1e-10);
}

TEST(EllipsoidField, RotationEquivariantOnCircle)
{
  const QuadratureGrid g = build_grid(Manifold::circle(), 37);
  const BanachField f = ellipsoid_field(FunctionSpace::trig(Manifold::circle(), 4, false), g);
  const double m0 = f.fiber(0).terms().front().body.shape_matrix()(0, 0);
  for (const auto& fiber : f.fibers()) EXPECT_NEAR(fiber.terms().front().body.shape_matrix()(0, 0), m0, 1e-10 * m0);
}

TEST(Tabulated, RoundTripMatchesClosedForm)
{
  for (const auto& [space, grid] :
       {std::pair{FunctionSpace::trig(Manifold::circle(), 1, true), build_grid(Manifold::circle(), 16)},
        std::pair{FunctionSpace::trig(Manifold::torus2(), {1, 2}, true), build_grid(Manifold::torus2(), 32)}}) {
    const nlohmann::json doc = tabulated_space_to_json(space, grid);
    const FunctionSpace loaded = tabulated_space_from_json(nlohmann::json::parse(doc.dump()), grid);
    EXPECT_TRUE(loaded.warnings().empty());
    EXPECT_LE(max_field_difference(ellipsoid_field(space, grid), ellipsoid_field(loaded, grid)), 1e-10);
  }
}

TEST(Tabulated, FileRoundTrip)
{
  const QuadratureGrid grid = build_grid(Manifold::circle(), 16);
  const FunctionSpace space = FunctionSpace::trig(Manifold::circle(), 2, true);
  const std::string path = ::testing::TempDir() + "tabulated_roundtrip.json";
  write_tabulated_space(space, grid, path);
  const FunctionSpace loaded = load_tabulated_space(path, grid);
  EXPECT_LE(max_field_difference(ellipsoid_field(space, grid), ellipsoid_field(loaded, grid)), 1e-10);
  EXPECT_THROW(load_tabulated_space(path + ".missing", grid), ConfigError);
}

TEST(Tabulated, Rejections)
{
  const QuadratureGrid grid = build_grid(Manifold::circle(), 8);
  const nlohmann::json good = tabulated_space_to_json(FunctionSpace::trig(Manifold::circle(), 1, true), grid);

  nlohmann::json bad_gram = good;
  bad_gram["gram"] = {1, 0, 0, 0, 0.5, 0, 0, 0, -1e-3};
  EXPECT_THROW(tabulated_space_from_json(bad_gram, grid), NumericError);

  EXPECT_THROW(tabulated_space_from_json(good, build_grid(Manifold::circle(), 16)), ConfigError);
  nlohmann::json short_nodes = good;
  short_nodes["nodes"].erase(short_nodes["nodes"].size() - 1);
  EXPECT_THROW(tabulated_space_from_json(short_nodes, grid), ConfigError);

  nlohmann::json no_deriv = good;
  no_deriv["nodes"][3]["derivatives"] = {0.0};
  EXPECT_THROW(tabulated_space_from_json(no_deriv, grid), ConfigError);
  no_deriv["nodes"][3].erase("derivatives");
  EXPECT_THROW(tabulated_space_from_json(no_deriv, grid), ConfigError);

  nlohmann::json wrong_manifold = good;
  wrong_manifold["manifold"] = "torus2";
  EXPECT_THROW(tabulated_space_from_json(wrong_manifold, grid), ConfigError);
  nlohmann::json wrong_format = good;
  wrong_format["format"] = "something/2";
  EXPECT_THROW(tabulated_space_from_json(wrong_format, grid), ConfigError);
}

TEST(Tabulated, InconsistentDerivativesWarn)
{
  const QuadratureGrid grid = build_grid(Manifold::circle(), 32);
  nlohmann::json doc = tabulated_space_to_json(FunctionSpace::trig(Manifold::circle(), 1, true), grid);
  for (auto& node : doc["nodes"]) node["derivatives"][1] = node["derivatives"][1].get<double>() * 1.5;
  const FunctionSpace s = tabulated_space_from_json(doc, grid);
  ASSERT_EQ(s.warnings().size(), 1u);
}

TEST(Tabulated, OnlyEvaluableOnItsGrid)
{
  const QuadratureGrid grid = build_grid(Manifold::circle(), 8);
  const FunctionSpace s = tabulated_space_from_json(
    tabulated_space_to_json(FunctionSpace::trig(Manifold::circle(), 1, true), grid), grid);
  EXPECT_FALSE(s.basis().evaluable_anywhere());
  EXPECT_THROW(s.basis().jet(VectorXd::Constant(1, 0.1)), NumericError);
  EXPECT_THROW(s.basis().scan(VectorXd::Ones(3), {16}, {0.0}), NumericError);
  EXPECT_THROW(ellipsoid_field(s, build_grid(Manifold::circle(), 16)), InvalidArgument);
}

TEST(GaussianSample, ConstantSpace)
{
  std::mt19937_64 rng(4);
  const FunctionSpace s = FunctionSpace::trig(Manifold::circle(), 0, true);
  const SampledFunction f = gaussian_sample(s, rng);
  EXPECT_DOUBLE_EQ(f.value(0.3), f.value(2.9));
  EXPECT_EQ(f.gradient(VectorXd::Constant(1, 1.0))(0), 0.0);
}

TEST(GaussianSample, CoefficientWiseIsIid)
{
  std::mt19937_64 rng(5);
  const FunctionSpace s = FunctionSpace::trig(Manifold::circle(), 1, true, InnerProductRule::CoefficientWise);
  const int draws = 20000;
  MatrixXd cov = MatrixXd::Zero(3, 3);
  for (int i = 0; i < draws; ++i) {
    const VectorXd c = gaussian_sample(s, rng).coefficients();
    cov += c * c.transpose();
  }
  cov /= draws;
  // entries have standard error about 1/sqrt(draws) (diagonal sqrt(2) of that)
  EXPECT_LE((cov - MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 4.0 * std::sqrt(2.0 / draws));
}

TEST(GaussianSample, VarianceAtAPoint)
{
  std::mt19937_64 rng(6);
  const FunctionSpace s = FunctionSpace::trig(Manifold::circle(), 1, true);
  const int draws = 100000;
  double ss = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double v = gaussian_sample(s, rng).value(0.0);
    ss += v * v;
  }
  const double var = ss / draws;
  const double se = 3.0 * std::sqrt(2.0 / draws);
  EXPECT_LE(std::abs(var - 3.0), 3 * se);
}

TEST(GaussianSample, CovarianceMatchesKernel)
{
  std::mt19937_64 rng(7);
  const FunctionSpace s = FunctionSpace::trig(Manifold::torus2(), {1, 2}, true);
  std::uniform_real_distribution<double> angle(0.0, 2 * kPi);
  std::vector<std::pair<VectorXd, VectorXd>> pairs;
  for (int i = 0; i < 5; ++i) pairs.emplace_back(Eigen::Vector2d(angle(rng), angle(rng)), Eigen::Vector2d(angle(rng), angle(rng)));
  const int draws = 40000;
  std::vector<double> acc(5, 0.0);
  for (int d = 0; d < draws; ++d) {
    const SampledFunction f = gaussian_sample(s, rng);
    for (int i = 0; i < 5; ++i) acc[i] += f.value(pairs[i].first) * f.value(pairs[i].second);
  }
  for (int i = 0; i < 5; ++i) {
    const VectorXd ex = s.orthonormal_jet(pairs[i].first).value;
    const VectorXd ey = s.orthonormal_jet(pairs[i].second).value;
    const double k = ex.dot(ey);
    const double se = std::sqrt((ex.squaredNorm() * ey.squaredNorm() + k * k) / draws);
    EXPECT_LE(std::abs(acc[i] / draws - k), 3 * se) << "pair " << i;
  }
}
