#pragma once

// End-to-end verification suite: eight criteria, each with a pinned tolerance
// that can be overridden from the config (tolerances) or scaled (--tol-scale).

#include "banach/app/commands.hpp"
#include "banach/app/config.hpp"
#include "banach/app/report.hpp"
#include "banach/densities.hpp"
#include "banach/expected_zeros.hpp"
#include "banach/random_fields.hpp"
#include "banach/ring.hpp"
#include "banach/zero_count.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace banach::app {

struct CriterionResult
{
  int id = 0;
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::vector<std::string> details;
  double seconds = 0.0;
};

inline CriterionResult make_result(int id, std::string name)
{
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  return r;
}

namespace verify_detail {

inline long scaled(const RunConfig& c, long base, long floor = 10)
{
  return std::max(floor, std::lround(static_cast<double>(base) * c.verify.scale));
}

inline double rel(double a, double b)
{
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

inline std::mt19937_64 rng_for(const RunConfig& c, int criterion)
{
  return std::mt19937_64(mix_seed(c.monte_carlo.seed ^ mix_seed(0x1000u + static_cast<std::uint64_t>(criterion))));
}

inline const QuadratureGrid& circle_grid()
{
  static const QuadratureGrid g = build_grid(Manifold::circle(), 1024);
  return g;
}

inline const QuadratureGrid& torus_grid()
{
  static const QuadratureGrid g = build_grid(Manifold::torus2(), 128);
  return g;
}

inline double circle_value(int m, const GeometryOptions& opts)
{
  return expected_zeros(FunctionSpace::trig(Manifold::circle(), m, true), circle_grid(), std::nullopt, opts);
}

inline double z_score(const ZeroCountEstimate& est, double target)
{
  if (est.standard_error == 0.0) return est.mean == target ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(est.mean - target) / est.standard_error;
}

}  // namespace verify_detail

// 1. Quadrature against Monte Carlo on the circle, m = 1..5.
inline CriterionResult verify_circle_mc(const RunConfig& c)
{
  using namespace verify_detail;
  CriterionResult r = make_result(1, "circle_mc");
  const auto t0 = std::chrono::steady_clock::now();
  const double sigma = tolerance(c, "circle_mc_sigma");
  const long trials = scaled(c, 20000, 100);
  double worst = 0.0;
  for (int m = 1; m <= 5; ++m) {
    const double q = circle_value(m, geometry_of(c));
    TrialPlan plan;
    plan.spaces = {FunctionSpace::trig(Manifold::circle(), m, true)};
    plan.trials = trials;
    plan.seed = c.monte_carlo.seed + static_cast<std::uint64_t>(m);
    plan.threads = c.threads;
    const ZeroCountEstimate est = estimate_expectation(plan);
    const double z = z_score(est, q);
    worst = std::max(worst, z);
    r.details.push_back("m=" + std::to_string(m) + " quadrature " + format_number(q) + " mc " +
                        format_number(est.mean) + " +- " + format_number(est.standard_error) + " z " +
                        format_number(z) + " trials " + std::to_string(trials));
  }
  r.seconds = detail::seconds_since(t0);
  const double budget = tolerance(c, "circle_mc_runtime_s");
  r.measured = worst;
  r.tolerance = sigma;
  r.passed = worst <= sigma && r.seconds <= budget;
  if (r.seconds > budget) r.details.push_back("runtime budget exceeded");
  return r;
}

// 2. Shape of the circle values: M(m) / sqrt(m(m+1)/3) is constant.
inline CriterionResult verify_shape(const RunConfig& c, double* constant_out = nullptr)
{
  using namespace verify_detail;
  CriterionResult r = make_result(2, "example_shape");
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> ratios;
  for (int m = 1; m <= 8; ++m) {
    const double q = circle_value(m, geometry_of(c));
    ratios.push_back(q / std::sqrt(m * (m + 1) / 3.0));
    r.details.push_back("m=" + std::to_string(m) + " M " + format_number(q) + " ratio " + format_number(ratios.back()));
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  double mean = 0.0;
  for (double x : ratios) mean += x;
  mean /= static_cast<double>(ratios.size());
  r.measured = (*hi - *lo) / mean;
  r.tolerance = tolerance(c, "shape_spread");
  r.passed = r.measured <= r.tolerance;
  r.details.push_back("constant " + format_number(mean) + " (Kac-Rice closed form gives 2)");
  if (constant_out) *constant_out = mean;
  r.seconds = detail::seconds_since(t0);
  return r;
}

// 3. Factorization on the torus for product spaces, plus Monte Carlo.
inline CriterionResult verify_factorization(const RunConfig& c)
{
  using namespace verify_detail;
  CriterionResult r = make_result(3, "torus_factorization");
  const auto t0 = std::chrono::steady_clock::now();
  const GeometryOptions opts = geometry_of(c);
  const double rel_tol = tolerance(c, "factorization_rel");
  const double sigma = tolerance(c, "factorization_sigma");
  auto pair_spaces = [](int m1, int m2) {
    return std::vector<FunctionSpace>{FunctionSpace::trig(Manifold::torus2(), {m1, 0}, true),
                                      FunctionSpace::trig(Manifold::torus2(), {0, m2}, true)};
  };
  bool ok = true;
  double worst_rel = 0.0;
  for (int m1 = 1; m1 <= 3; ++m1) {
    for (int m2 = 1; m2 <= 3; ++m2) {
      const auto spaces = pair_spaces(m1, m2);
      const double q = expected_zeros(std::span<const FunctionSpace>(spaces), torus_grid(), std::nullopt, opts);
      const double product = circle_value(m1, opts) * circle_value(m2, opts);
      const double e = rel(q, product);
      worst_rel = std::max(worst_rel, e);
      ok = ok && e <= rel_tol;
      r.details.push_back("(" + std::to_string(m1) + "," + std::to_string(m2) + ") torus " + format_number(q) +
                          " product " + format_number(product) + " rel " + format_number(e));
    }
  }
  const long trials = scaled(c, 10000, 50);
  double worst_z = 0.0;
  for (const auto& [m1, m2] : c.verify.mc_pairs) {
    if (m1 < 1 || m2 < 1) throw ConfigError("verify.mc_pairs entries must be positive degrees");
    TrialPlan plan;
    plan.spaces = pair_spaces(m1, m2);
    plan.trials = trials;
    plan.seed = c.monte_carlo.seed + static_cast<std::uint64_t>(100 * m1 + m2);
    plan.scan_resolution = {512, 512};
    plan.threads = c.threads;
    const ZeroCountEstimate est = estimate_expectation(plan);
    const double q = circle_value(m1, opts) * circle_value(m2, opts);
    const double z = z_score(est, q);
    worst_z = std::max(worst_z, z);
    ok = ok && z <= sigma;
    r.details.push_back("mc (" + std::to_string(m1) + "," + std::to_string(m2) + ") " + format_number(est.mean) +
                        " +- " + format_number(est.standard_error) + " z " + format_number(z) + " trials " +
                        std::to_string(trials));
  }
  r.measured = worst_rel;
  r.tolerance = rel_tol;
  r.details.push_back("worst mc z " + format_number(worst_z) + " (limit " + format_number(sigma) + ")");
  r.passed = ok;
  r.seconds = detail::seconds_since(t0);
  return r;
}

// 4. Integrated top densities equal mixed volumes.
inline CriterionResult verify_bridge(const RunConfig& c)
{
  using namespace verify_detail;
  CriterionResult r = make_result(4, "bridge_identity");
  const auto t0 = std::chrono::steady_clock::now();
  auto rng = rng_for(c, 4);
  const QuadratureGrid grid = build_grid(Manifold::torus2(), 8);
  std::vector<BanachField> fields;
  for (int i = 0; i < 20; ++i) fields.push_back(random_ellipsoid_field(grid, rng));
  const BanachRing ring(fields, {}, geometry_of(c), c.threads);
  double worst = 0.0;
  for (const auto& m : ring.monomials(2)) {
    const double by_density = density_integrate(ring, ring.monomial_element(m));
    const double direct = banach_mixed_volume({fields[static_cast<std::size_t>(m[0])], fields[static_cast<std::size_t>(m[1])]},
                                              geometry_of(c));
    worst = std::max(worst, rel(by_density, direct));
  }
  r.measured = worst;
  r.tolerance = tolerance(c, "bridge_rel");
  r.passed = worst <= r.tolerance;
  r.details.push_back("20 random ellipsoid fields on an 8x8 torus grid, " +
                      std::to_string(ring.monomials(2).size()) + " degree-2 monomials");
  r.seconds = detail::seconds_since(t0);
  return r;
}

// 5. Mixed volume on the diagonal and the disk / square oracle.
inline CriterionResult verify_polarization(const RunConfig& c)
{
  using namespace verify_detail;
  CriterionResult r = make_result(5, "polarization");
  const auto t0 = std::chrono::steady_clock::now();
  auto rng = rng_for(c, 5);
  const long samples = scaled(c, 200);
  double worst = 0.0;
  for (long i = 0; i < samples; ++i) {
    const ConvexBody k = ConvexBody::ellipsoid(random_spd(2, rng, 1.5));
    worst = std::max(worst, rel(mixed_volume({k, k}, 2), volume(k, 2)));
    BodyCombination sum;
    sum.add(1.0, k);
    sum.add(0.5 + std::abs(random_vector(1, rng)(0)), ConvexBody::segment(random_vector(2, rng)));
    worst = std::max(worst, rel(mixed_volume({sum, sum}, 2), volume(sum, 2)));
  }
  Eigen::MatrixXd dirs(2, 4);
  dirs << 1, 0, -1, 0, 0, 1, 0, -1;
  const ConvexBody square = ConvexBody::from_support_samples(dirs, Eigen::VectorXd::Ones(4));
  const double disk_square = mixed_volume({ConvexBody::ball(2), square}, 2, GeometryOptions{3600, false});
  const double err = std::abs(disk_square - 4.0);
  r.measured = worst;
  r.tolerance = tolerance(c, "polarization_rel");
  r.passed = worst <= r.tolerance && err <= tolerance(c, "disk_square_abs");
  r.details.push_back(std::to_string(2 * samples) + " diagonal checks, worst rel " + format_number(worst));
  r.details.push_back("mixed_volume(disk, square) " + format_number(disk_square) + " abs err " + format_number(err) +
                      " (limit " + format_number(tolerance(c, "disk_square_abs")) + ")");
  r.seconds = detail::seconds_since(t0);
  return r;
}

// 6. Ring structure.
inline CriterionResult verify_ring(const RunConfig& c)
{
  using namespace verify_detail;
  CriterionResult r = make_result(6, "ring_suite");
  const auto t0 = std::chrono::steady_clock::now();
  const double kernel_tol = c.ring.kernel_tol;
  const double check_tol = tolerance(c, "ring_tol_factor") * kernel_tol;
  const GeometryOptions opts = geometry_of(c);
  bool ok = true;
  auto rank_symmetric = [](const BanachRing& ring, double tol) {
    for (int p = 0; p <= ring.dim(); ++p)
      if (ring.pairing_rank(p, tol) != ring.pairing_rank(ring.dim() - p, tol)) return false;
    return true;
  };

  {
    const QuadratureGrid grid = build_grid(Manifold::torus2(), 16);
    const BanachField b = ellipsoid_field(FunctionSpace::trig(Manifold::torus2(), 1, true), grid);
    const BanachRing ring({b, combine({{2.0, b}})}, {"B", "2B"}, opts, c.threads);
    const auto kernel = ring.kernel_basis(1, kernel_tol);
    const bool good = kernel.size() == 1 && ring.quotient_dimension(2, kernel_tol) == 1 && rank_symmetric(ring, kernel_tol);
    ok = ok && good;
    r.details.push_back("{B, 2B}: degree-1 kernel dim " + std::to_string(kernel.size()) + (good ? " ok" : " FAIL"));
  }

  auto rng = rng_for(c, 6);
  const QuadratureGrid grid = build_grid(Manifold::torus2(), 4);
  const long families = scaled(c, 100);
  int quotient_bad = 0, ideal_bad = 0, rank_bad = 0, kernel_missing = 0;
  double worst_residual = 0.0;
  std::uniform_int_distribution<int> count(1, 4);
  std::uniform_real_distribution<double> coef(0.2, 2.0);
  for (long f = 0; f < families; ++f) {
    // nonzero family: degree-n quotient is one-dimensional
    std::vector<BanachField> gens;
    const int g = count(rng);
    for (int i = 0; i < g; ++i) gens.push_back(random_ellipsoid_field(grid, rng));
    const BanachRing free_ring(gens, {}, opts);
    if (free_ring.quotient_dimension(2, kernel_tol) != 1) ++quotient_bad;
    if (!rank_symmetric(free_ring, kernel_tol)) ++rank_bad;

    // rank-deficient family: the last generator is a Minkowski combination
    const BanachField a = random_ellipsoid_field(grid, rng);
    const BanachField b = random_ellipsoid_field(grid, rng);
    const BanachRing ring({a, b, combine({{coef(rng), a}, {coef(rng), b}})}, {}, opts);
    if (!rank_symmetric(ring, kernel_tol)) ++rank_bad;
    bool found = false;
    for (int p = 0; p <= ring.dim(); ++p) {
      for (const auto& v : ring.kernel_basis(p, kernel_tol)) {
        found = found || p == 1;
        const IdealCheckReport check = ring.ideal_check(v, check_tol);
        worst_residual = std::max(worst_residual, check.self_residual);
        for (double pr : check.product_residuals) worst_residual = std::max(worst_residual, pr);
        if (!check.passed) ++ideal_bad;
      }
    }
    if (!found) ++kernel_missing;
  }
  ok = ok && quotient_bad == 0 && ideal_bad == 0 && rank_bad == 0 && kernel_missing == 0;
  r.details.push_back(std::to_string(families) + " random families: quotient failures " + std::to_string(quotient_bad) +
                      ", rank asymmetries " + std::to_string(rank_bad) + ", ideal-check failures " +
                      std::to_string(ideal_bad) + ", missing degree-1 kernels " + std::to_string(kernel_missing));
  r.measured = worst_residual;
  r.tolerance = check_tol;
  r.passed = ok;
  r.seconds = detail::seconds_since(t0);
  return r;
}

// 7. Density axioms and the segment determinant identity.
inline CriterionResult verify_densities(const RunConfig& c)
{
  using namespace verify_detail;
  CriterionResult r = make_result(7, "density_axioms");
  const auto t0 = std::chrono::steady_clock::now();
  auto rng = rng_for(c, 7);
  const QuadratureGrid grid = build_grid(Manifold::torus2(), 4);
  const BanachField b1 = random_ellipsoid_field(grid, rng);
  const BanachField b2 = random_ellipsoid_field(grid, rng);
  const long frames = scaled(c, 1000);
  std::uniform_int_distribution<Eigen::Index> node(0, grid.size() - 1);
  std::uniform_real_distribution<double> scale(-3.0, 3.0);
  double worst_axiom = 0.0, worst_width = 0.0, worst_segment = 0.0;
  for (long i = 0; i < frames; ++i) {
    const Eigen::Index x = node(rng);
    double cs = scale(rng);
    if (std::abs(cs) < 1e-3) cs = 1.0;
    // k = 1 scaling
    const Frame f1{x, random_frame_vectors(1, 2, rng)};
    Frame f1s = f1;
    f1s.vectors *= cs;
    const double d1 = density_eval({b1}, f1);
    worst_axiom = std::max(worst_axiom, rel(density_eval({b1}, f1s), std::abs(cs) * d1));
    // d_1 is twice the support value
    const double h = support_eval(b1.fiber(static_cast<std::size_t>(x)), f1.vectors.row(0).transpose());
    worst_width = std::max(worst_width, rel(d1, 2.0 * h));
    // k = 2 scaling of one vector and change of frame
    const Frame f2{x, random_frame_vectors(2, 2, rng)};
    const double d2 = density_eval({b1, b2}, f2);
    Frame f2s = f2;
    f2s.vectors.row(0) *= cs;
    worst_axiom = std::max(worst_axiom, rel(density_eval({b1, b2}, f2s), std::abs(cs) * d2));
    const Eigen::MatrixXd a = random_frame_vectors(2, 2, rng, 1e2);
    const Frame f2a{x, a * f2.vectors};
    worst_axiom = std::max(worst_axiom, rel(density_eval({b1, b2}, f2a), std::abs(a.determinant()) * d2));
    // decomposable case
    const BanachField s1 = BanachField::constant(grid, ConvexBody::segment(random_vector(2, rng)));
    const BanachField s2 = BanachField::constant(grid, ConvexBody::segment(random_vector(2, rng)));
    worst_segment = std::max(worst_segment, segment_determinant_check({s1, s2}, f2).relative_error);
  }
  const double t_axiom = tolerance(c, "density_rel");
  const double t_width = tolerance(c, "support_width_rel");
  const double t_seg = tolerance(c, "segment_det_rel");
  r.measured = worst_axiom;
  r.tolerance = t_axiom;
  r.passed = worst_axiom <= t_axiom && worst_width <= t_width && worst_segment <= t_seg;
  r.details.push_back(std::to_string(frames) + " frames: scaling / frame change worst rel " + format_number(worst_axiom));
  r.details.push_back("d_1 versus twice the support value worst rel " + format_number(worst_width) + " (limit " +
                      format_number(t_width) + ")");
  r.details.push_back("segment determinant worst rel " + format_number(worst_segment) + " (limit " +
                      format_number(t_seg) + ")");
  r.seconds = detail::seconds_since(t0);
  return r;
}

// 8. Monte Carlo counts do not depend on the thread count.
inline CriterionResult verify_determinism(const RunConfig& c)
{
  using namespace verify_detail;
  CriterionResult r = make_result(8, "determinism");
  const auto t0 = std::chrono::steady_clock::now();
  struct Case
  {
    json doc;
  };
  std::vector<Case> cases;
  {
    json d;
    d["manifold"] = "circle";
    d["spaces"] = json::array({json{{"degree", 3}}});
    d["monte_carlo"] = json{{"trials", scaled(c, 2000)}, {"seed", c.monte_carlo.seed}};
    cases.push_back({d});
  }
  {
    json d;
    d["manifold"] = "torus2";
    d["spaces"] = json::array({json{{"degrees", {2, 2}}}, json{{"degrees", {1, 3}}}});
    d["monte_carlo"] = json{{"trials", scaled(c, 200)}, {"seed", c.monte_carlo.seed}, {"scan_resolution", {128, 128}}};
    cases.push_back({d});
  }
  bool ok = true;
  int mismatches = 0;
  for (const auto& cs : cases) {
    std::string reference;
    for (std::size_t i = 0; i < c.verify.determinism_threads.size(); ++i) {
      RunConfig run = parse_config(cs.doc);
      run.threads = std::max(1, c.verify.determinism_threads[i]);
      const std::string csv = cmd_mc_zeros(run).table.str();
      if (i == 0) reference = csv;
      else if (csv != reference) {
        ok = false;
        ++mismatches;
      }
    }
    r.details.push_back(cs.doc.at("manifold").get<std::string>() + ": per-trial count CSV hash " +
                        hex64(fnv1a(reference)));
  }
  std::string threads = "threads:";
  for (int t : c.verify.determinism_threads) threads += " " + std::to_string(t);
  r.details.push_back(threads);
  r.measured = mismatches;
  r.tolerance = 0.0;
  r.passed = ok;
  r.seconds = detail::seconds_since(t0);
  return r;
}

inline std::vector<std::function<CriterionResult(const RunConfig&)>> criteria(double* example_constant = nullptr)
{
  return {verify_circle_mc,
          [example_constant](const RunConfig& c) { return verify_shape(c, example_constant); },
          verify_factorization,
          verify_bridge,
          verify_polarization,
          verify_ring,
          verify_densities,
          verify_determinism};
}

inline Report cmd_verify(const RunConfig& c, const std::function<void(const CriterionResult&)>& on_result = {})
{
  const auto t0 = std::chrono::steady_clock::now();
  Report r = detail::start_report(c, "verify");
  r.table = CsvTable({"criterion", "name", "status", "measured", "tolerance"});
  bool all = true;
  std::string timings = "timings:";
  double constant = 0.0;
  for (const auto& run : criteria(&constant)) {
    CriterionResult res = run(c);
    if (res.id == 2) r.value("example_constant", constant);
    all = all && res.passed;
    r.table.add_row({res.id, res.name, res.passed ? "pass" : "fail", res.measured, res.tolerance});
    r.lines.push_back("[" + std::to_string(res.id) + "] " + res.name + ": " + (res.passed ? "pass" : "fail"));
    for (const auto& d : res.details) r.lines.push_back("    " + d);
    char buf[64];
    std::snprintf(buf, sizeof buf, " %d=%.2fs", res.id, res.seconds);
    timings += buf;
    if (on_result) on_result(res);
  }
  r.passed = all;
  r.wall_seconds = detail::seconds_since(t0);
  r.timings = timings;
  return r;
}

}  // namespace banach::app
