#pragma once

// Monte Carlo zero counting for random Gaussian systems on the circle and
// the 2-torus. Roots are located without derivatives: scan + bisection in
// one dimension, marching-squares segment intersection in two.

#include "banach/error.hpp"
#include "banach/function_space.hpp"
#include "banach/manifold.hpp"
#include "banach/parallel.hpp"

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace banach {

// SplitMix64 finalizer; derives independent per-trial seeds.
inline std::uint64_t mix_seed(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 trial_stream(std::uint64_t master_seed, std::uint64_t trial)
{
  return std::mt19937_64(mix_seed(master_seed ^ mix_seed(trial)));
}

namespace detail {

inline double wrap_period(double x)
{
  x = std::fmod(x, Manifold::period());
  return x < 0.0 ? x + Manifold::period() : x;
}

inline bool has_exact_zero(const Eigen::MatrixXd& v)
{
  return (v.array() == 0.0).any();
}

}  // namespace detail

// Zeros of a sampled function on the circle. Sign changes on a periodic scan
// grid are refined by bisection; an exact zero on the scan grid moves the
// grid by half a step (then a quarter, ...).
class ZeroScanner1D
{
public:
  ZeroScanner1D(const Basis& basis, int resolution, double refine_tol = 1e-10)
    : basis_(&basis), resolution_(resolution), refine_tol_(refine_tol)
  {
    if (basis.manifold().dim() != 1) throw InvalidArgument("ZeroScanner1D needs a circle basis");
    if (resolution < 4) throw InvalidArgument("scan resolution must be at least 4");
    tables_.push_back(basis.prepare_scan({resolution}, {0.0}));
    if (basis.evaluable_anywhere())
      tables_.push_back(basis.prepare_scan({resolution}, {0.5 * step()}));
  }

  double step() const { return Manifold::period() / resolution_; }

  std::vector<double> roots(const SampledFunction& f) const
  {
    for (std::size_t attempt = 0;; ++attempt) {
      double offset = 0.0;
      Eigen::VectorXd values;
      if (attempt < tables_.size()) {
        offset = tables_[attempt].offsets[0];
        values = f.scan(tables_[attempt]);
      } else {
        if (attempt > 40) throw NumericError("function vanishes on every shifted scan grid");
        offset = std::ldexp(step(), -static_cast<int>(attempt));
        values = f.scan({resolution_}, {offset});
      }
      if (detail::has_exact_zero(values)) {
        if (coefficients_vanish(f)) return {};
        if (!basis_->evaluable_anywhere()) throw NumericError("exact zero on a tabulated scan grid");
        continue;
      }
      return refine(f, values, offset);
    }
  }

  std::size_t count(const SampledFunction& f) const { return roots(f).size(); }

private:
  static bool coefficients_vanish(const SampledFunction& f) { return f.coefficients().isZero(0.0); }

  std::vector<double> refine(const SampledFunction& f, const Eigen::VectorXd& values, double offset) const
  {
    std::vector<double> out;
    const double h = step();
    for (int i = 0; i < resolution_; ++i) {
      const double va = values(i);
      const double vb = values((i + 1) % resolution_);
      if ((va < 0.0) == (vb < 0.0)) continue;
      double a = offset + h * i;
      double b = a + h;
      if (!basis_->evaluable_anywhere()) {
        out.push_back(detail::wrap_period(a + h * va / (va - vb)));
        continue;
      }
      double fa = va;
      while (b - a > 2.0 * refine_tol_) {
        const double mid = 0.5 * (a + b);
        const double fm = f.value(mid);
        if (fm == 0.0) {
          a = b = mid;
          break;
        }
        if ((fm < 0.0) == (fa < 0.0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
      }
      out.push_back(detail::wrap_period(0.5 * (a + b)));
    }
    return out;
  }

  const Basis* basis_;
  int resolution_;
  double refine_tol_;
  std::vector<ScanTable> tables_;
};

// Common zeros of two sampled functions on the torus. Each cell of the scan
// grid holds the marching-squares zero segments of both functions under the
// bilinear corner model; transversal segment intersections are the zeros.
class ZeroScanner2D
{
public:
  ZeroScanner2D(const Basis& first, const Basis& second, std::vector<int> cells, double dedupe_radius = 1e-6)
    : first_(&first), second_(&second), cells_(std::move(cells)), dedupe_radius_(dedupe_radius)
  {
    if (first.manifold().dim() != 2 || second.manifold().dim() != 2)
      throw InvalidArgument("ZeroScanner2D needs torus bases");
    if (cells_.size() != 2 || cells_[0] < 4 || cells_[1] < 4)
      throw InvalidArgument("scan grid must have at least 4 x 4 cells");
    const std::vector<double> zero{0.0, 0.0};
    const std::vector<double> half = shift(1);
    first_tables_.push_back(first.prepare_scan(cells_, zero));
    second_tables_.push_back(second.prepare_scan(cells_, zero));
    if (first.evaluable_anywhere() && second.evaluable_anywhere()) {
      first_tables_.push_back(first.prepare_scan(cells_, half));
      second_tables_.push_back(second.prepare_scan(cells_, half));
    }
  }

  double step(int axis) const { return Manifold::period() / cells_[static_cast<std::size_t>(axis)]; }

  std::vector<Eigen::Vector2d> roots(const SampledFunction& f1, const SampledFunction& f2) const
  {
    for (std::size_t attempt = 0;; ++attempt) {
      std::vector<double> offsets;
      // Reused per thread: fresh 512 x 512 grids every trial cost more in
      // page faults than the scan itself.
      thread_local Eigen::MatrixXd a, b;
      if (attempt < first_tables_.size()) {
        offsets = first_tables_[attempt].offsets;
        f1.scan_into(first_tables_[attempt], a);
        f2.scan_into(second_tables_[attempt], b);
      } else {
        if (attempt > 40) throw NumericError("functions vanish on every shifted scan grid");
        if (!first_->evaluable_anywhere() || !second_->evaluable_anywhere())
          throw NumericError("exact zero on a tabulated scan grid");
        offsets = shift(static_cast<int>(attempt));
        a = f1.scan(cells_, offsets);
        b = f2.scan(cells_, offsets);
      }
      if (f1.coefficients().isZero(0.0) || f2.coefficients().isZero(0.0)) return {};
      if (detail::has_exact_zero(a) || detail::has_exact_zero(b)) continue;
      return intersect(a, b, offsets);
    }
  }

  std::size_t count(const SampledFunction& f1, const SampledFunction& f2) const { return roots(f1, f2).size(); }

private:
  // Unequal fractions on the two axes, so a shifted grid never lands on the
  // diagonals theta_1 = +-theta_2 + const that held the exact zero.
  std::vector<double> shift(int attempt) const
  {
    return {std::ldexp(step(0), -attempt), std::ldexp(step(1), -attempt - 1)};
  }

  struct Seg
  {
    Eigen::Vector2d p, q;
  };

  // Corner order: v00 (x=0,y=0), v10, v11, v01; local coordinates in [0,1]^2.
  static int cell_segments(double v00, double v10, double v11, double v01, Seg out[2])
  {
    auto cut = [](double a, double b) { return a / (a - b); };
    const bool s00 = v00 < 0.0, s10 = v10 < 0.0, s11 = v11 < 0.0, s01 = v01 < 0.0;
    Eigen::Vector2d edge[4];
    bool crossed[4] = {s00 != s10, s10 != s11, s01 != s11, s00 != s01};
    if (crossed[0]) edge[0] = {cut(v00, v10), 0.0};
    if (crossed[1]) edge[1] = {1.0, cut(v10, v11)};
    if (crossed[2]) edge[2] = {cut(v01, v11), 1.0};
    if (crossed[3]) edge[3] = {0.0, cut(v00, v01)};
    const int crossings = crossed[0] + crossed[1] + crossed[2] + crossed[3];
    if (crossings == 0) return 0;
    if (crossings == 2) {
      int e[2], k = 0;
      for (int i = 0; i < 4; ++i)
        if (crossed[i]) e[k++] = i;
      out[0] = {edge[e[0]], edge[e[1]]};
      return 1;
    }
    // Saddle: the bilinear center value decides which corners connect.
    const double center = 0.25 * (v00 + v10 + v11 + v01);
    if ((center < 0.0) == s00) {
      out[0] = {edge[0], edge[1]};
      out[1] = {edge[2], edge[3]};
    } else {
      out[0] = {edge[0], edge[3]};
      out[1] = {edge[1], edge[2]};
    }
    return 2;
  }

  static bool segment_intersection(const Seg& s, const Seg& t, Eigen::Vector2d& at)
  {
    const Eigen::Vector2d r = s.q - s.p, u = t.q - t.p, w = t.p - s.p;
    const double denom = r.x() * u.y() - r.y() * u.x();
    if (denom == 0.0) return false;
    const double a = (w.x() * u.y() - w.y() * u.x()) / denom;
    const double b = (w.x() * r.y() - w.y() * r.x()) / denom;
    if (a < 0.0 || a > 1.0 || b < 0.0 || b > 1.0) return false;
    at = s.p + a * r;
    return true;
  }

  std::vector<Eigen::Vector2d> intersect(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                         const std::vector<double>& offsets) const
  {
    const int nx = cells_[0], ny = cells_[1];
    const double hx = step(0), hy = step(1);
    std::vector<Eigen::Vector2d> out;
    std::vector<Eigen::Vector2d> near_edge;  // local-grid coordinates of points close to cell edges
    const double radius = dedupe_radius_;
    // A cell can hold a common zero only if both functions change sign on
    // its corners. Signs of the first function are bit-packed per column
    // (coordinate 0 runs fastest in column-major storage) with one extra
    // wrap-around bit, so candidate cells come out of a few word operations.
    const std::size_t words = (static_cast<std::size_t>(nx) + 1 + 63) / 64;
    thread_local std::vector<std::uint64_t> packed;
    packed.assign(words * static_cast<std::size_t>(ny), 0);
    for (int j = 0; j < ny; ++j) {
      std::uint64_t* col = packed.data() + static_cast<std::size_t>(j) * words;
      const double* v = a.data() + static_cast<std::size_t>(j) * nx;
      for (int i = 0; i < nx; ++i)
        col[static_cast<std::size_t>(i) >> 6] |= static_cast<std::uint64_t>(v[i] < 0.0) << (i & 63);
      col[static_cast<std::size_t>(nx) >> 6] |= static_cast<std::uint64_t>(v[0] < 0.0) << (nx & 63);
    }
    auto next_row = [&](const std::uint64_t* col, std::size_t w) {
      return (col[w] >> 1) | (w + 1 < words ? col[w + 1] << 63 : 0);
    };
    for (int j = 0; j < ny; ++j) {
      const int j1 = (j + 1) % ny;
      const std::uint64_t* c0 = packed.data() + static_cast<std::size_t>(j) * words;
      const std::uint64_t* c1 = packed.data() + static_cast<std::size_t>(j1) * words;
      for (std::size_t w = 0; w < words; ++w) {
        std::uint64_t flag = (c0[w] ^ next_row(c0, w)) | (c0[w] ^ c1[w]) | (c0[w] ^ next_row(c1, w));
        const std::size_t first_row = w * 64;
        if (first_row + 64 > static_cast<std::size_t>(nx)) {
          const std::size_t valid = static_cast<std::size_t>(nx) - first_row;
          flag &= valid >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << valid) - 1);
        }
        while (flag) {
          const int i = static_cast<int>(first_row) + std::countr_zero(flag);
          flag &= flag - 1;
          const int i1 = (i + 1 == nx) ? 0 : i + 1;
          const double b00 = b(i, j), b10 = b(i1, j), b11 = b(i1, j1), b01 = b(i, j1);
          const bool sb = b00 < 0.0;
          if ((b10 < 0.0) == sb && (b11 < 0.0) == sb && (b01 < 0.0) == sb) continue;
          const double a00 = a(i, j), a10 = a(i1, j), a11 = a(i1, j1), a01 = a(i, j1);
          Seg fs[2], gs[2];
          const int nf = cell_segments(a00, a10, a11, a01, fs);
          const int ng = cell_segments(b00, b10, b11, b01, gs);
          for (int p = 0; p < nf; ++p) {
            for (int q = 0; q < ng; ++q) {
              Eigen::Vector2d local;
              if (!segment_intersection(fs[p], gs[q], local)) continue;
              const Eigen::Vector2d cell_point(i + local.x(), j + local.y());
              const bool edge = local.x() < radius || local.x() > 1.0 - radius || local.y() < radius ||
                                local.y() > 1.0 - radius;
              if (edge) {
                bool duplicate = false;
                for (const auto& e : near_edge) {
                  double dx = std::abs(e.x() - cell_point.x()), dy = std::abs(e.y() - cell_point.y());
                  dx = std::min(dx, nx - dx);
                  dy = std::min(dy, ny - dy);
                  if (dx <= radius && dy <= radius) {
                    duplicate = true;
                    break;
                  }
                }
                if (duplicate) continue;
                near_edge.push_back(cell_point);
              }
              out.emplace_back(detail::wrap_period(offsets[0] + hx * cell_point.x()),
                               detail::wrap_period(offsets[1] + hy * cell_point.y()));
            }
          }
        }
      }
    }
    return out;
  }

  const Basis* first_;
  const Basis* second_;
  std::vector<int> cells_;
  double dedupe_radius_;
  std::vector<ScanTable> first_tables_, second_tables_;
};

struct TrialPlan
{
  std::vector<FunctionSpace> spaces;  // one per equation; n = manifold dimension
  long trials = 1000;
  std::uint64_t seed = 1;
  std::vector<int> scan_resolution;   // empty: 4096 on the circle, 512 x 512 on the torus
  double refine_tol = 1e-10;
  double dedupe_radius = 1e-6;        // in cell units
  std::optional<SubdomainBox> box;
  int threads = 1;
};

struct ZeroCountEstimate
{
  double mean = 0.0;
  double standard_error = 0.0;
  long trials = 0;
  std::vector<int> counts;
};

inline ZeroCountEstimate summarize_counts(std::vector<int> counts)
{
  ZeroCountEstimate est;
  est.trials = static_cast<long>(counts.size());
  if (counts.empty()) return est;
  double sum = 0.0;
  for (int c : counts) sum += c;
  est.mean = sum / static_cast<double>(counts.size());
  if (counts.size() > 1) {
    double ss = 0.0;
    for (int c : counts) ss += (c - est.mean) * (c - est.mean);
    const double var = ss / static_cast<double>(counts.size() - 1);
    est.standard_error = std::sqrt(var / static_cast<double>(counts.size()));
  }
  est.counts = std::move(counts);
  return est;
}

// Trial t draws its n functions, in order, from trial_stream(seed, t).
inline ZeroCountEstimate estimate_expectation(const TrialPlan& plan)
{
  if (plan.spaces.empty()) throw InvalidArgument("trial plan has no function spaces");
  if (plan.trials < 1) throw InvalidArgument("trial count must be at least 1");
  const Manifold& manifold = plan.spaces.front().manifold();
  for (const auto& s : plan.spaces)
    if (!(s.manifold() == manifold)) throw InvalidArgument("trial plan spaces live on different manifolds");
  const int n = manifold.dim();
  if (static_cast<int>(plan.spaces.size()) != n)
    throw InvalidArgument("a system on an n-manifold needs n function spaces");
  if (plan.box) plan.box->validate(manifold);

  std::vector<int> resolution = plan.scan_resolution;
  if (resolution.empty()) resolution = n == 1 ? std::vector<int>{4096} : std::vector<int>{512, 512};
  if (static_cast<int>(resolution.size()) != n) throw InvalidArgument("scan resolution needs one entry per coordinate");

  std::vector<int> counts(static_cast<std::size_t>(plan.trials), 0);
  if (n == 1) {
    const ZeroScanner1D scanner(plan.spaces[0].basis(), resolution[0], plan.refine_tol);
    parallel_for(counts.size(), plan.threads, [&](std::size_t t) {
      auto rng = trial_stream(plan.seed, t);
      const SampledFunction f = gaussian_sample(plan.spaces[0], rng);
      int c = 0;
      for (double root : scanner.roots(f)) {
        const double p[1] = {root};
        if (!plan.box || plan.box->contains(p)) ++c;
      }
      counts[t] = c;
    });
  } else {
    const ZeroScanner2D scanner(plan.spaces[0].basis(), plan.spaces[1].basis(), resolution, plan.dedupe_radius);
    parallel_for(counts.size(), plan.threads, [&](std::size_t t) {
      auto rng = trial_stream(plan.seed, t);
      const SampledFunction f1 = gaussian_sample(plan.spaces[0], rng);
      const SampledFunction f2 = gaussian_sample(plan.spaces[1], rng);
      int c = 0;
      for (const auto& root : scanner.roots(f1, f2)) {
        const double p[2] = {root.x(), root.y()};
        if (!plan.box || plan.box->contains(p)) ++c;
      }
      counts[t] = c;
    });
  }
  return summarize_counts(std::move(counts));
}

}  // namespace banach
