#pragma once

// Periodic single-chart manifolds (circle, 2-torus) with uniform trapezoidal
// quadrature. The cotangent bundle of such a manifold is trivial in the
// chart, so the Liouville volume of a fibered set is the base integral of
// fiber volumes measured in the dual coordinates.

#include "banach/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace banach {

enum class ManifoldKind { Circle, Torus2 };

class Manifold
{
public:
  static Manifold circle() { return Manifold(ManifoldKind::Circle); }
  static Manifold torus2() { return Manifold(ManifoldKind::Torus2); }

  static Manifold from_name(const std::string& name)
  {
    if (name == "circle") return circle();
    if (name == "torus2") return torus2();
    throw InvalidArgument("unknown manifold '" + name + "' (expected circle or torus2)");
  }

  ManifoldKind kind() const { return kind_; }
  int dim() const { return kind_ == ManifoldKind::Circle ? 1 : 2; }
  static constexpr double period() { return 2 * std::numbers::pi; }
  double total_volume() const { return std::pow(period(), dim()); }
  std::string name() const { return kind_ == ManifoldKind::Circle ? "circle" : "torus2"; }

  bool operator==(const Manifold&) const = default;

private:
  explicit Manifold(ManifoldKind kind) : kind_(kind) {}
  ManifoldKind kind_;
};

// Product of half-open intervals [lo, hi) inside the fundamental domain.
struct SubdomainBox
{
  std::vector<std::pair<double, double>> intervals;

  static SubdomainBox full(const Manifold& m)
  {
    return SubdomainBox{std::vector<std::pair<double, double>>(
      static_cast<std::size_t>(m.dim()), {0.0, Manifold::period()})};
  }

  void validate(const Manifold& m) const
  {
    if (static_cast<int>(intervals.size()) != m.dim())
      throw InvalidArgument("subdomain box has wrong number of intervals");
    for (const auto& [lo, hi] : intervals) {
      if (!(lo >= 0.0 && hi <= Manifold::period() && lo <= hi))
        throw InvalidArgument("subdomain box interval outside [0, 2pi)");
    }
  }

  bool contains(std::span<const double> point) const
  {
    for (std::size_t i = 0; i < intervals.size(); ++i) {
      double x = std::fmod(point[i], Manifold::period());
      if (x < 0.0) x += Manifold::period();
      if (x < intervals[i].first || x >= intervals[i].second) return false;
    }
    return true;
  }
};

// Uniform periodic grid. Node index is row-major: the last coordinate
// varies fastest.
class QuadratureGrid
{
public:
  QuadratureGrid(Manifold manifold, std::vector<int> shape)
    : manifold_(manifold), shape_(std::move(shape))
  {
    if (static_cast<int>(shape_.size()) != manifold_.dim())
      throw InvalidArgument("grid shape does not match manifold dimension");
    Eigen::Index total = 1;
    for (int count : shape_) {
      if (count < 4) throw InvalidArgument("grid needs at least 4 nodes per coordinate");
      total *= count;
    }
    const int n = manifold_.dim();
    coords_.resize(n, total);
    double cell = 1.0;
    for (int c : shape_) cell *= Manifold::period() / c;
    weights_ = Eigen::VectorXd::Constant(total, cell);
    for (Eigen::Index idx = 0; idx < total; ++idx) {
      Eigen::Index rest = idx;
      for (int axis = n - 1; axis >= 0; --axis) {
        const int count = shape_[static_cast<std::size_t>(axis)];
        coords_(axis, idx) = Manifold::period() * static_cast<double>(rest % count) / count;
        rest /= count;
      }
    }
  }

  const Manifold& manifold() const { return manifold_; }
  int dim() const { return manifold_.dim(); }
  const std::vector<int>& shape() const { return shape_; }
  Eigen::Index size() const { return coords_.cols(); }
  const Eigen::MatrixXd& coordinates() const { return coords_; }
  Eigen::VectorXd point(Eigen::Index idx) const { return coords_.col(idx); }
  const Eigen::VectorXd& weights() const { return weights_; }
  double weight(Eigen::Index idx) const { return weights_(idx); }

  // Same nodes (weights may differ, e.g. after restriction).
  bool same_nodes(const QuadratureGrid& other) const
  {
    return manifold_ == other.manifold_ && shape_ == other.shape_;
  }

  bool operator==(const QuadratureGrid& other) const
  {
    return same_nodes(other) && weights_ == other.weights_;
  }

  // Zeroes the weights of nodes outside the box; no boundary-cell splitting.
  QuadratureGrid restricted(const SubdomainBox& box) const
  {
    box.validate(manifold_);
    QuadratureGrid out = *this;
    for (Eigen::Index idx = 0; idx < size(); ++idx) {
      if (!box.contains(std::span<const double>(coords_.col(idx).data(), static_cast<std::size_t>(dim()))))
        out.weights_(idx) = 0.0;
    }
    return out;
  }

private:
  Manifold manifold_;
  std::vector<int> shape_;
  Eigen::MatrixXd coords_;
  Eigen::VectorXd weights_;
};

inline QuadratureGrid build_grid(const Manifold& manifold, int nodes_per_dim)
{
  return QuadratureGrid(manifold, std::vector<int>(static_cast<std::size_t>(manifold.dim()), nodes_per_dim));
}

inline QuadratureGrid build_grid(const Manifold& manifold, std::vector<int> shape)
{
  return QuadratureGrid(manifold, std::move(shape));
}

inline double integrate(const QuadratureGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& values)
{
  if (values.size() != grid.size())
    throw InvalidArgument("integrate: field has " + std::to_string(values.size()) +
                          " samples, grid has " + std::to_string(grid.size()) + " nodes");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    sum += grid.weight(i) * values(i);
  return sum;
}

// Rows are the coordinate vectors d/dtheta_1, ..., d/dtheta_n.
inline Eigen::MatrixXd coordinate_frame(const Manifold& manifold, const Eigen::VectorXd& /*point*/)
{
  return Eigen::MatrixXd::Identity(manifold.dim(), manifold.dim());
}

}  // namespace banach
