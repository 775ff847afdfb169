#pragma once

#include "banach/app/config.hpp"
#include "banach/app/report.hpp"
#include "banach/densities.hpp"
#include "banach/expected_zeros.hpp"
#include "banach/ring.hpp"
#include "banach/zero_count.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace banach::app {

namespace detail {

inline Report start_report(const RunConfig& c, const std::string& command)
{
  Report r;
  r.command = command;
  r.config_hash = config_hash(c);
  r.seed = c.monte_carlo.seed;
  r.csv_name = command;
  return r;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::optional<SubdomainBox> box_of(const RunConfig& c)
{
  if (!c.subdomain) return std::nullopt;
  return SubdomainBox{*c.subdomain};
}

// One space per coordinate; a single configured space is used for every equation.
inline std::vector<FunctionSpace> system_spaces(const RunConfig& c, const QuadratureGrid& grid)
{
  std::vector<FunctionSpace> spaces = build_spaces(c, grid);
  const int n = grid.dim();
  if (spaces.size() == 1)
    while (static_cast<int>(spaces.size()) < n) spaces.push_back(spaces.front());
  if (static_cast<int>(spaces.size()) != n)
    throw ConfigError("configure one space, or one space per manifold dimension (" + std::to_string(n) + ")");
  return spaces;
}

inline std::string matrix_lines(const Eigen::MatrixXd& m)
{
  std::ostringstream out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << "  [";
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? ", " : "") << format_number(m(i, j));
    out << "]" << (i + 1 < m.rows() ? "\n" : "");
  }
  return out.str();
}

}  // namespace detail

inline Report cmd_expected_zeros(const RunConfig& c)
{
  const auto t0 = std::chrono::steady_clock::now();
  Report r = detail::start_report(c, "expected-zeros");
  const GeometryOptions opts = geometry_of(c);
  const QuadratureGrid grid = grid_of(c);
  const auto box = detail::box_of(c);

  if (c.table) {
    if (c.manifold != "circle") throw ConfigError("table is only defined on the circle");
    r.table = CsvTable({"m", "M_quad"});
    r.csv_name = "expected_zeros_table";
    for (int m : c.table->degrees) {
      const FunctionSpace space = FunctionSpace::trig(Manifold::circle(), m, c.table->include_constant,
                                                      inner_product_from_name(c.table->inner_product));
      const double value = expected_zeros(space, grid, box, opts);
      r.table.add_row({m, value});
      r.value("M_quad[m=" + std::to_string(m) + "]", value);
    }
  }
  if (!c.spaces.empty()) {
    std::vector<FunctionSpace> spaces = detail::system_spaces(c, grid);
    const bool all_equal = c.spaces.size() == 1;
    const double value = all_equal ? expected_zeros(spaces.front(), grid, box, opts)
                                   : expected_zeros(std::span<const FunctionSpace>(spaces), grid, box, opts);
    if (!c.table) r.table = CsvTable({"label", "value"});
    if (!c.table) r.table.add_row({"expected_zeros", value});
    r.value("expected_zeros", value);
    r.value("method", all_equal ? std::string("volume") : std::string("mixed_volume"));
    for (const auto& s : spaces)
      for (const auto& w : s.warnings()) r.lines.push_back("warning: " + w);
  }
  if (!c.table && c.spaces.empty()) throw ConfigError("expected-zeros needs 'spaces' or 'table'");
  r.value("quadrature_nodes", static_cast<double>(grid.size()));
  r.wall_seconds = detail::seconds_since(t0);
  return r;
}

inline Report cmd_mc_zeros(const RunConfig& c)
{
  const auto t0 = std::chrono::steady_clock::now();
  Report r = detail::start_report(c, "mc-zeros");
  if (c.spaces.empty()) throw ConfigError("mc-zeros needs 'spaces'");
  const QuadratureGrid grid = grid_of(c);
  TrialPlan plan;
  plan.spaces = detail::system_spaces(c, grid);
  plan.trials = c.monte_carlo.trials;
  plan.seed = c.monte_carlo.seed;
  plan.scan_resolution = c.monte_carlo.scan_resolution;
  plan.refine_tol = c.monte_carlo.refine_tol;
  plan.box = detail::box_of(c);
  plan.threads = c.threads;
  const ZeroCountEstimate est = estimate_expectation(plan);
  r.table = CsvTable({"trial", "count"});
  for (std::size_t t = 0; t < est.counts.size(); ++t) r.table.add_row({t, est.counts[t]});
  r.value("mean", est.mean);
  r.value("standard_error", est.standard_error);
  r.value("trials", static_cast<double>(est.trials));
  r.value("seed", std::to_string(plan.seed));
  r.wall_seconds = detail::seconds_since(t0);
  return r;
}

inline BanachRing build_ring(const RunConfig& c, const QuadratureGrid& grid)
{
  if (c.ring.generators.empty()) throw ConfigError("'ring.generators' must list at least one generator");
  const int n = grid.dim();
  std::vector<FunctionSpace> spaces = build_spaces(c, grid);
  std::vector<BanachField> fields;
  std::vector<std::string> names;
  auto vec = [&](const std::vector<double>& v, const std::string& who) {
    if (static_cast<int>(v.size()) != n) throw ConfigError("generator '" + who + "' needs a vector of length n");
    return Eigen::Map<const Eigen::VectorXd>(v.data(), n).eval();
  };
  for (const auto& g : c.ring.generators) {
    names.push_back(g.name);
    if (g.kind == "space") {
      fields.push_back(ellipsoid_field(spaces.at(static_cast<std::size_t>(g.space)), grid));
    } else if (g.kind == "ball") {
      if (!(g.radius > 0.0)) throw ConfigError("generator '" + g.name + "' needs a positive radius");
      fields.push_back(BanachField::constant(grid, ConvexBody::ball(n, g.radius)));
    } else if (g.kind == "segment") {
      fields.push_back(BanachField::constant(grid, ConvexBody::segment(vec(g.axis, g.name))));
    } else if (g.kind == "ellipsoid") {
      if (static_cast<int>(g.matrix.size()) != n) throw ConfigError("generator '" + g.name + "' needs an n x n matrix");
      Eigen::MatrixXd m(n, n);
      for (int i = 0; i < n; ++i) m.row(i) = vec(g.matrix[static_cast<std::size_t>(i)], g.name).transpose();
      try {
        fields.push_back(BanachField::constant(grid, ConvexBody::ellipsoid(m)));
      } catch (const InvalidArgument& e) {
        throw ConfigError("generator '" + g.name + "': " + e.what());
      }
    } else {
      std::vector<std::pair<double, BanachField>> terms;
      for (const auto& [coef, idx] : g.terms) terms.emplace_back(coef, fields.at(static_cast<std::size_t>(idx)));
      fields.push_back(combine(terms));
    }
  }
  return BanachRing(std::move(fields), std::move(names), geometry_of(c), c.threads);
}

inline Report cmd_ring_report(const RunConfig& c)
{
  const auto t0 = std::chrono::steady_clock::now();
  Report r = detail::start_report(c, "ring-report");
  const QuadratureGrid grid = grid_of(c);
  const BanachRing ring = build_ring(c, grid);
  const int n = ring.dim();
  const double tol = c.ring.kernel_tol;
  r.table = CsvTable({"degree", "monomials", "rank", "kernel_dim", "dual_rank", "ideal_checks", "ideal_checks_passed"});
  bool ok = true;
  for (int p = 0; p <= n; ++p) {
    const Eigen::MatrixXd l = ring.pairing_matrix(p);
    const int rank = BanachRing::numerical_rank(l, tol);
    const int dual = ring.pairing_rank(n - p, tol);
    const auto kernel = ring.kernel_basis(p, tol);
    int passed = 0;
    r.lines.push_back("L_" + std::to_string(p) + " (rows S_" + std::to_string(p) + ", cols S_" +
                      std::to_string(n - p) + "):");
    r.lines.push_back(detail::matrix_lines(l));
    std::string rows = "  rows:", cols = "  cols:";
    for (const auto& m : ring.monomials(p)) rows += " " + ring.monomial_name(m);
    for (const auto& m : ring.monomials(n - p)) cols += " " + ring.monomial_name(m);
    r.lines.push_back(rows);
    r.lines.push_back(cols);
    for (std::size_t i = 0; i < kernel.size(); ++i) {
      const IdealCheckReport check = ring.ideal_check(kernel[i], tol);
      passed += check.passed;
      std::string line = "  kernel[" + std::to_string(i) + "] self_residual " + format_number(check.self_residual);
      for (double pr : check.product_residuals) line += " product " + format_number(pr);
      line += check.passed ? " pass" : " fail";
      r.lines.push_back(line);
    }
    ok = ok && passed == static_cast<int>(kernel.size()) && rank == dual;
    r.table.add_row({p, ring.monomials(p).size(), rank, static_cast<int>(kernel.size()), dual,
                     static_cast<int>(kernel.size()), passed});
    r.lines.push_back("rank(L_" + std::to_string(p) + ") = " + std::to_string(rank) + ", rank(L_" +
                      std::to_string(n - p) + ") = " + std::to_string(dual) + (rank == dual ? " equal" : " DIFFER"));
  }
  r.value("kernel_tol", tol);
  r.value("generators", static_cast<double>(ring.generator_count()));
  r.passed = ok;
  r.wall_seconds = detail::seconds_since(t0);
  return r;
}

inline Report cmd_density_eval(const RunConfig& c)
{
  const auto t0 = std::chrono::steady_clock::now();
  Report r = detail::start_report(c, "density-eval");
  if (c.density.terms.empty()) throw ConfigError("density-eval needs 'density.terms'");
  const QuadratureGrid grid = grid_of(c);
  const BanachRing ring = build_ring(c, grid);
  const int n = ring.dim();
  const int k = static_cast<int>(c.density.terms.front().monomial.size());
  if (k > n) throw ConfigError("density degree exceeds the manifold dimension");
  RingElement elem = ring.zero(k);
  for (const auto& t : c.density.terms) {
    if (static_cast<int>(t.monomial.size()) != k) throw ConfigError("density terms must share one degree");
    for (int g : t.monomial)
      if (g < 0 || g >= ring.generator_count()) throw ConfigError("density monomial refers to a missing generator");
    elem.coefficients(static_cast<Eigen::Index>(ring.monomial_index(t.monomial))) += t.coefficient;
  }
  r.table = CsvTable({"frame", "node", "density"});
  for (std::size_t i = 0; i < c.density.frames.size(); ++i) {
    const auto& fc = c.density.frames[i];
    if (fc.node < 0 || fc.node >= grid.size()) throw ConfigError("density frame node outside the grid");
    if (static_cast<int>(fc.vectors.size()) != k) throw ConfigError("a degree-k density needs k frame vectors");
    Frame frame{fc.node, Eigen::MatrixXd(k, n)};
    for (int a = 0; a < k; ++a) {
      if (static_cast<int>(fc.vectors[static_cast<std::size_t>(a)].size()) != n)
        throw ConfigError("frame vectors need n components");
      for (int b = 0; b < n; ++b) frame.vectors(a, b) = fc.vectors[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    }
    double value = 0.0;
    try {
      value = density_eval(ring, elem, frame);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("density frame: ") + e.what());
    }
    r.table.add_row({i, static_cast<long>(fc.node), value});
  }
  if (c.density.integrate) {
    if (k != n) throw ConfigError("density integration needs a degree-n element");
    r.value("density_integral", density_integrate(ring, elem));
    r.value("functional_I", ring.functional_I(elem));
  }
  r.wall_seconds = detail::seconds_since(t0);
  return r;
}

}  // namespace banach::app
