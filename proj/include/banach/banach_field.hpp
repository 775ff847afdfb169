#pragma once

// Banach sets sampled on a quadrature grid: one centrally symmetric convex
// body per node, living in the cotangent fiber (dual chart coordinates).

#include "banach/convex.hpp"
#include "banach/error.hpp"
#include "banach/manifold.hpp"

#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace banach {

class BanachField
{
public:
  BanachField(QuadratureGrid grid, std::vector<BodyCombination> fibers)
    : grid_(std::make_shared<const QuadratureGrid>(std::move(grid))), fibers_(std::move(fibers))
  {
    check();
  }

  BanachField(std::shared_ptr<const QuadratureGrid> grid, std::vector<BodyCombination> fibers)
    : grid_(std::move(grid)), fibers_(std::move(fibers))
  {
    check();
  }

  static BanachField constant(const QuadratureGrid& grid, const ConvexBody& body)
  {
    return BanachField(grid, std::vector<BodyCombination>(static_cast<std::size_t>(grid.size()), body));
  }

  const QuadratureGrid& grid() const { return *grid_; }
  const std::shared_ptr<const QuadratureGrid>& grid_ptr() const { return grid_; }
  int dim() const { return grid_->dim(); }
  std::size_t size() const { return fibers_.size(); }
  const BodyCombination& fiber(std::size_t node) const { return fibers_[node]; }
  const std::vector<BodyCombination>& fibers() const { return fibers_; }

private:
  void check() const
  {
    if (static_cast<Eigen::Index>(fibers_.size()) != grid_->size())
      throw InvalidArgument("Banach field needs one fiber per grid node");
    for (const auto& f : fibers_) {
      if (!f.empty() && f.dim() != grid_->dim())
        throw InvalidArgument("fiber dimension must equal manifold dimension");
    }
  }

  std::shared_ptr<const QuadratureGrid> grid_;
  std::vector<BodyCombination> fibers_;
};

inline void require_same_grid(const BanachField& a, const BanachField& b)
{
  if (!(a.grid() == b.grid()))
    throw InvalidArgument("Banach fields live on different grids");
}

// Nodewise Minkowski combination sum_i c_i E_i.
inline BanachField combine(std::span<const std::pair<double, BanachField>> terms)
{
  if (terms.empty()) throw InvalidArgument("combine needs at least one term");
  const BanachField& first = terms.front().second;
  for (const auto& [c, field] : terms) require_same_grid(first, field);
  std::vector<BodyCombination> fibers(first.size());
  for (std::size_t node = 0; node < fibers.size(); ++node) {
    for (const auto& [c, field] : terms)
      fibers[node].add(c, field.fiber(node));
  }
  return BanachField(first.grid_ptr(), std::move(fibers));
}

inline BanachField combine(std::initializer_list<std::pair<double, BanachField>> terms)
{
  return combine(std::span<const std::pair<double, BanachField>>(terms.begin(), terms.size()));
}

// Liouville volume: base measure times fiber Lebesgue volume.
inline double banach_volume(const BanachField& field, const GeometryOptions& opts = {})
{
  const QuadratureGrid& grid = field.grid();
  double sum = 0.0;
  for (std::size_t node = 0; node < field.size(); ++node) {
    const double w = grid.weight(static_cast<Eigen::Index>(node));
    if (w == 0.0) continue;
    sum += w * volume(field.fiber(node), field.dim(), opts);
  }
  return sum;
}

inline double banach_mixed_volume(std::span<const BanachField> fields, const GeometryOptions& opts = {})
{
  if (fields.empty()) throw InvalidArgument("banach_mixed_volume needs n fields");
  const int n = fields.front().dim();
  if (static_cast<int>(fields.size()) != n)
    throw InvalidArgument("banach_mixed_volume needs exactly " + std::to_string(n) + " fields, got " +
                          std::to_string(fields.size()));
  for (const auto& f : fields) require_same_grid(fields.front(), f);
  const QuadratureGrid& grid = fields.front().grid();
  std::vector<BodyCombination> slot(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (std::size_t node = 0; node < fields.front().size(); ++node) {
    const double w = grid.weight(static_cast<Eigen::Index>(node));
    if (w == 0.0) continue;
    for (int i = 0; i < n; ++i) slot[static_cast<std::size_t>(i)] = fields[static_cast<std::size_t>(i)].fiber(node);
    sum += w * mixed_volume(slot, n, opts);
  }
  return sum;
}

inline double banach_mixed_volume(std::initializer_list<BanachField> fields, const GeometryOptions& opts = {})
{
  return banach_mixed_volume(std::span<const BanachField>(fields.begin(), fields.size()), opts);
}

// Res_U: same fibers, quadrature weights zeroed outside the box.
inline BanachField restrict(const BanachField& field, const SubdomainBox& box)
{
  return BanachField(field.grid().restricted(box), field.fibers());
}

// Formal difference sum(positive) - sum(negative) of Banach fields.
class VirtualBanachField
{
public:
  using Term = std::pair<double, BanachField>;

  VirtualBanachField() = default;
  VirtualBanachField(BanachField field)  // NOLINT: a field is a virtual field
  {
    positive_.emplace_back(1.0, std::move(field));
  }

  static VirtualBanachField difference(BanachField plus, BanachField minus)
  {
    VirtualBanachField v(std::move(plus));
    v.negative_.emplace_back(1.0, std::move(minus));
    return v;
  }

  const std::vector<Term>& positive() const { return positive_; }
  const std::vector<Term>& negative() const { return negative_; }

  // Negative factors swap the two lists.
  VirtualBanachField scaled(double c) const
  {
    VirtualBanachField out;
    const double a = std::abs(c);
    for (const auto& [k, f] : positive_) (c >= 0 ? out.positive_ : out.negative_).emplace_back(a * k, f);
    for (const auto& [k, f] : negative_) (c >= 0 ? out.negative_ : out.positive_).emplace_back(a * k, f);
    return out;
  }

  VirtualBanachField operator-() const { return scaled(-1.0); }

  VirtualBanachField operator+(const VirtualBanachField& other) const
  {
    VirtualBanachField out = *this;
    out.positive_.insert(out.positive_.end(), other.positive_.begin(), other.positive_.end());
    out.negative_.insert(out.negative_.end(), other.negative_.begin(), other.negative_.end());
    return out;
  }

  VirtualBanachField operator-(const VirtualBanachField& other) const { return *this + (-other); }

  // Signed list of concrete terms.
  std::vector<Term> signed_terms() const
  {
    std::vector<Term> out = positive_;
    for (const auto& [k, f] : negative_) out.emplace_back(-k, f);
    return out;
  }

private:
  std::vector<Term> positive_;
  std::vector<Term> negative_;
};

// Evaluates a multilinear functional of concrete fields on virtual
// arguments by expanding every slot into its signed terms.
template <class Functional>
double virtual_eval(std::span<const VirtualBanachField> slots, Functional&& functional)
{
  std::vector<std::vector<VirtualBanachField::Term>> expanded;
  expanded.reserve(slots.size());
  for (const auto& s : slots) expanded.push_back(s.signed_terms());
  for (const auto& e : expanded) {
    if (e.empty()) return 0.0;
  }
  std::vector<std::size_t> pick(slots.size(), 0);
  std::vector<BanachField> args;
  double total = 0.0;
  while (true) {
    double coefficient = 1.0;
    args.clear();
    for (std::size_t i = 0; i < slots.size(); ++i) {
      coefficient *= expanded[i][pick[i]].first;
      args.push_back(expanded[i][pick[i]].second);
    }
    if (coefficient != 0.0)
      total += coefficient * functional(std::span<const BanachField>(args));
    std::size_t i = 0;
    for (; i < slots.size(); ++i) {
      if (++pick[i] < expanded[i].size()) break;
      pick[i] = 0;
    }
    if (i == slots.size()) break;
  }
  return total;
}

inline double virtual_mixed_volume(std::span<const VirtualBanachField> slots, const GeometryOptions& opts = {})
{
  return virtual_eval(slots, [&](std::span<const BanachField> f) { return banach_mixed_volume(f, opts); });
}

inline double virtual_mixed_volume(std::initializer_list<VirtualBanachField> slots, const GeometryOptions& opts = {})
{
  return virtual_mixed_volume(std::span<const VirtualBanachField>(slots.begin(), slots.size()), opts);
}

}  // namespace banach
