#pragma once

// Finite-dimensional spaces of smooth functions with an inner product, the
// normalized evaluation map x -> theta(x)/|theta(x)| into the unit sphere of
// V*, and the ellipsoid field obtained by pulling the unit ball of V back
// through the adjoint of its differential.

#include "banach/banach_field.hpp"
#include "banach/convex.hpp"
#include "banach/error.hpp"
#include "banach/manifold.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace banach {

enum class InnerProductRule { NormalizedL2, PlainL2, CoefficientWise, Custom };

inline InnerProductRule inner_product_from_name(const std::string& name)
{
  if (name == "normalized_l2") return InnerProductRule::NormalizedL2;
  if (name == "plain_l2") return InnerProductRule::PlainL2;
  if (name == "coefficient_wise") return InnerProductRule::CoefficientWise;
  throw InvalidArgument("unknown inner product '" + name +
                        "' (expected normalized_l2, plain_l2 or coefficient_wise)");
}

// Values (N) and first partials (n x N) of N functions at one point.
struct Jet
{
  Eigen::VectorXd value;
  Eigen::MatrixXd gradient;
};

struct ScanTable
{
  std::vector<int> counts;
  std::vector<double> offsets;
  std::vector<Eigen::MatrixXd> factors;  // count x factor-list size, per coordinate
};

class Basis
{
public:
  virtual ~Basis() = default;
  virtual int size() const = 0;
  virtual const Manifold& manifold() const = 0;
  // False when the basis is only known at grid nodes.
  virtual bool evaluable_anywhere() const = 0;
  virtual Jet jet(const Eigen::Ref<const Eigen::VectorXd>& point) const = 0;
  virtual Jet node_jet(const QuadratureGrid& grid, Eigen::Index node) const = 0;
  // Precomputed per-coordinate tables for the periodic scan grid
  // theta_i = offset + 2 pi i / count.
  virtual ScanTable prepare_scan(const std::vector<int>& counts, const std::vector<double>& offsets) const = 0;
  // Values of sum_j coeffs_j phi_j on a prepared scan grid. Rows follow
  // coordinate 0, columns coordinate 1.
  virtual void scan_into(const ScanTable& table, const Eigen::VectorXd& coeffs, Eigen::MatrixXd& out) const = 0;

  Eigen::MatrixXd scan(const ScanTable& table, const Eigen::VectorXd& coeffs) const
  {
    Eigen::MatrixXd out;
    scan_into(table, coeffs, out);
    return out;
  }

  Eigen::MatrixXd scan(const Eigen::VectorXd& coeffs, const std::vector<int>& counts,
                       const std::vector<double>& offsets) const
  {
    return scan(prepare_scan(counts, offsets), coeffs);
  }
};

// One-dimensional trigonometric factor: 1, cos(k t) or sin(k t).
struct TrigFactor
{
  enum class Type { Constant, Cos, Sin };
  Type type;
  int k;

  double value(double t) const
  {
    switch (type) {
      case Type::Constant: return 1.0;
      case Type::Cos: return std::cos(k * t);
      case Type::Sin: return std::sin(k * t);
    }
    return 0.0;
  }

  double derivative(double t) const
  {
    switch (type) {
      case Type::Constant: return 0.0;
      case Type::Cos: return -k * std::sin(k * t);
      case Type::Sin: return k * std::cos(k * t);
    }
    return 0.0;
  }

  // (1/2pi) * integral of the square over a period.
  double normalized_square_mean() const { return type == Type::Constant ? 1.0 : 0.5; }
};

// Tensor products of per-coordinate trig factors.
class TrigBasis final : public Basis
{
public:
  TrigBasis(Manifold manifold, std::vector<int> degrees, bool include_constant)
    : manifold_(manifold), degrees_(std::move(degrees))
  {
    const int n = manifold_.dim();
    if (static_cast<int>(degrees_.size()) != n)
      throw InvalidArgument("trig space needs one degree per coordinate");
    factors_.resize(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
      const int m = degrees_[static_cast<std::size_t>(c)];
      if (m < 0) throw InvalidArgument("trig degree must be nonnegative");
      auto& list = factors_[static_cast<std::size_t>(c)];
      list.push_back({TrigFactor::Type::Constant, 0});
      for (int k = 1; k <= m; ++k) {
        list.push_back({TrigFactor::Type::Cos, k});
        list.push_back({TrigFactor::Type::Sin, k});
      }
    }
    // Members in row-major order over the factor lists, skipping the
    // all-constant product when the constant term is excluded.
    std::vector<int> index(static_cast<std::size_t>(n), 0);
    while (true) {
      const bool all_constant = std::all_of(index.begin(), index.end(), [](int i) { return i == 0; });
      if (include_constant || !all_constant) members_.push_back(index);
      int c = n - 1;
      for (; c >= 0; --c) {
        auto& i = index[static_cast<std::size_t>(c)];
        if (++i < static_cast<int>(factors_[static_cast<std::size_t>(c)].size())) break;
        i = 0;
      }
      if (c < 0) break;
    }
    if (members_.empty())
      throw InvalidArgument("trig space is empty (degree 0 without the constant term)");
  }

  int size() const override { return static_cast<int>(members_.size()); }
  const Manifold& manifold() const override { return manifold_; }
  bool evaluable_anywhere() const override { return true; }
  const std::vector<int>& degrees() const { return degrees_; }
  const std::vector<std::vector<int>>& members() const { return members_; }
  const TrigFactor& factor(int coordinate, int index) const
  {
    return factors_[static_cast<std::size_t>(coordinate)][static_cast<std::size_t>(index)];
  }

  Jet jet(const Eigen::Ref<const Eigen::VectorXd>& point) const override
  {
    const int n = manifold_.dim();
    std::vector<std::vector<double>> val(static_cast<std::size_t>(n)), der(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
      for (const auto& f : factors_[static_cast<std::size_t>(c)]) {
        val[static_cast<std::size_t>(c)].push_back(f.value(point(c)));
        der[static_cast<std::size_t>(c)].push_back(f.derivative(point(c)));
      }
    }
    Jet out{Eigen::VectorXd(size()), Eigen::MatrixXd(n, size())};
    for (int j = 0; j < size(); ++j) {
      const auto& idx = members_[static_cast<std::size_t>(j)];
      double v = 1.0;
      for (int c = 0; c < n; ++c) v *= val[static_cast<std::size_t>(c)][static_cast<std::size_t>(idx[static_cast<std::size_t>(c)])];
      out.value(j) = v;
      for (int d = 0; d < n; ++d) {
        double g = 1.0;
        for (int c = 0; c < n; ++c) {
          const auto i = static_cast<std::size_t>(idx[static_cast<std::size_t>(c)]);
          g *= (c == d) ? der[static_cast<std::size_t>(c)][i] : val[static_cast<std::size_t>(c)][i];
        }
        out.gradient(d, j) = g;
      }
    }
    return out;
  }

  Jet node_jet(const QuadratureGrid& grid, Eigen::Index node) const override
  {
    return jet(grid.coordinates().col(node));
  }

  using Basis::scan;

  ScanTable prepare_scan(const std::vector<int>& counts, const std::vector<double>& offsets) const override
  {
    const int n = manifold_.dim();
    if (static_cast<int>(counts.size()) != n || static_cast<int>(offsets.size()) != n)
      throw InvalidArgument("scan grid has wrong dimension");
    ScanTable table{counts, offsets, std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(n))};
    for (int c = 0; c < n; ++c) {
      const auto& list = factors_[static_cast<std::size_t>(c)];
      const int count = counts[static_cast<std::size_t>(c)];
      auto& t = table.factors[static_cast<std::size_t>(c)];
      t.resize(count, static_cast<Eigen::Index>(list.size()));
      for (int i = 0; i < count; ++i) {
        const double theta = offsets[static_cast<std::size_t>(c)] + Manifold::period() * i / count;
        for (std::size_t f = 0; f < list.size(); ++f) t(i, static_cast<Eigen::Index>(f)) = list[f].value(theta);
      }
    }
    return table;
  }

  void scan_into(const ScanTable& table, const Eigen::VectorXd& coeffs, Eigen::MatrixXd& out) const override
  {
    if (coeffs.size() != size()) throw InvalidArgument("scan: coefficient count mismatch");
    const auto& t = table.factors;
    if (manifold_.dim() == 1) {
      Eigen::VectorXd c = Eigen::VectorXd::Zero(t[0].cols());
      for (int j = 0; j < size(); ++j) c(members_[static_cast<std::size_t>(j)][0]) += coeffs(j);
      out.resize(t[0].rows(), 1);
      out.noalias() = t[0] * c;
      return;
    }
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(t[0].cols(), t[1].cols());
    for (int j = 0; j < size(); ++j) {
      const auto& idx = members_[static_cast<std::size_t>(j)];
      c(idx[0], idx[1]) += coeffs(j);
    }
    const Eigen::MatrixXd left = t[0] * c;
    out.resize(t[0].rows(), t[1].rows());
    out.noalias() = left * t[1].transpose();
  }


private:
  Manifold manifold_;
  std::vector<int> degrees_;
  std::vector<std::vector<TrigFactor>> factors_;
  std::vector<std::vector<int>> members_;
};

// Basis known only through values and first derivatives at grid nodes.
class TabulatedBasis final : public Basis
{
public:
  // values: N x nodes; gradients: (N * n) x nodes, basis-major (row i*n + d is d/dtheta_d of phi_i).
  TabulatedBasis(QuadratureGrid grid, Eigen::MatrixXd values, Eigen::MatrixXd gradients)
    : grid_(std::move(grid)), values_(std::move(values)), gradients_(std::move(gradients))
  {
    if (values_.cols() != grid_.size() || gradients_.cols() != grid_.size())
      throw InvalidArgument("tabulated basis: node count does not match the grid");
    if (gradients_.rows() != values_.rows() * grid_.dim())
      throw InvalidArgument("tabulated basis: derivative table has the wrong number of rows");
  }

  int size() const override { return static_cast<int>(values_.rows()); }
  const Manifold& manifold() const override { return grid_.manifold(); }
  bool evaluable_anywhere() const override { return false; }
  const QuadratureGrid& grid() const { return grid_; }
  const Eigen::MatrixXd& values() const { return values_; }
  const Eigen::MatrixXd& gradients() const { return gradients_; }

  Jet jet(const Eigen::Ref<const Eigen::VectorXd>&) const override
  {
    throw NumericError("tabulated basis can only be evaluated at its grid nodes");
  }

  Jet node_jet(const QuadratureGrid& grid, Eigen::Index node) const override
  {
    if (!grid.same_nodes(grid_))
      throw InvalidArgument("tabulated basis was built for a different grid");
    const int n = grid_.dim();
    Jet out{values_.col(node), Eigen::MatrixXd(n, size())};
    for (int j = 0; j < size(); ++j)
      for (int d = 0; d < n; ++d) out.gradient(d, j) = gradients_(j * n + d, node);
    return out;
  }

  using Basis::scan;

  ScanTable prepare_scan(const std::vector<int>& counts, const std::vector<double>& offsets) const override
  {
    const bool on_nodes = counts == grid_.shape() &&
                          std::all_of(offsets.begin(), offsets.end(), [](double o) { return o == 0.0; });
    if (!on_nodes) throw NumericError("tabulated basis can only be scanned on its own grid");
    return ScanTable{counts, offsets, {}};
  }

  void scan_into(const ScanTable& table, const Eigen::VectorXd& coeffs, Eigen::MatrixXd& out) const override
  {
    const Eigen::VectorXd v = values_.transpose() * coeffs;
    if (grid_.dim() == 1) {
      out = v;
      return;
    }
    const auto& counts = table.counts;
    out.resize(counts[0], counts[1]);
    for (int i = 0; i < counts[0]; ++i)
      for (int j = 0; j < counts[1]; ++j) out(i, j) = v(i * counts[1] + j);
  }


private:
  QuadratureGrid grid_;
  Eigen::MatrixXd values_;
  Eigen::MatrixXd gradients_;
};

class FunctionSpace
{
public:
  // Gram matrix in closed form from trig orthogonality.
  static FunctionSpace trig(const Manifold& manifold, std::vector<int> degrees, bool include_constant,
                            InnerProductRule rule = InnerProductRule::NormalizedL2)
  {
    auto basis = std::make_shared<const TrigBasis>(manifold, std::move(degrees), include_constant);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(basis->size(), basis->size());
    if (rule == InnerProductRule::NormalizedL2 || rule == InnerProductRule::PlainL2) {
      const double scale = rule == InnerProductRule::PlainL2 ? manifold.total_volume() : 1.0;
      for (int j = 0; j < basis->size(); ++j) {
        double g = scale;
        const auto& idx = basis->members()[static_cast<std::size_t>(j)];
        for (int c = 0; c < manifold.dim(); ++c)
          g *= basis->factor(c, idx[static_cast<std::size_t>(c)]).normalized_square_mean();
        gram(j, j) = g;
      }
    } else if (rule == InnerProductRule::Custom) {
      throw InvalidArgument("trig spaces take a named inner product rule");
    }
    return FunctionSpace(std::move(basis), std::move(gram), rule);
  }

  static FunctionSpace trig(const Manifold& manifold, int degree, bool include_constant,
                            InnerProductRule rule = InnerProductRule::NormalizedL2)
  {
    return trig(manifold, std::vector<int>(static_cast<std::size_t>(manifold.dim()), degree), include_constant, rule);
  }

  FunctionSpace(std::shared_ptr<const Basis> basis, Eigen::MatrixXd gram,
                InnerProductRule rule = InnerProductRule::Custom)
    : basis_(std::move(basis)),
      mixing_(Eigen::MatrixXd::Identity(basis_->size(), basis_->size())),
      gram_(std::move(gram)),
      rule_(rule)
  {
    orthonormalize();
  }

  // Raw basis psi = A phi spanning the same space, with Gram A G A^T.
  FunctionSpace transformed(const Eigen::MatrixXd& a) const
  {
    if (a.rows() != size() || a.cols() != size())
      throw InvalidArgument("basis change must be square of the space dimension");
    FunctionSpace out = *this;
    out.mixing_ = a * mixing_;
    out.gram_ = a * gram_ * a.transpose();
    out.rule_ = InnerProductRule::Custom;
    out.orthonormalize();
    return out;
  }

  FunctionSpace with_gram(Eigen::MatrixXd gram) const
  {
    FunctionSpace out = *this;
    out.gram_ = std::move(gram);
    out.rule_ = InnerProductRule::Custom;
    out.orthonormalize();
    return out;
  }

  const Manifold& manifold() const { return basis_->manifold(); }
  int size() const { return static_cast<int>(gram_.rows()); }
  const Basis& basis() const { return *basis_; }
  const std::shared_ptr<const Basis>& basis_ptr() const { return basis_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  InnerProductRule rule() const { return rule_; }
  // R with R G R^T = I: row i holds the raw coordinates of orthonormal e_i.
  const Eigen::MatrixXd& orthonormal_factor() const { return ortho_; }
  // Orthonormal functions in terms of the underlying basis: e = E phi.
  const Eigen::MatrixXd& orthonormal_in_basis() const { return ortho_in_basis_; }

  std::vector<std::string>& warnings() { return warnings_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  Jet raw_jet(const Eigen::Ref<const Eigen::VectorXd>& point) const
  {
    Jet b = basis_->jet(point);
    return {mixing_ * b.value, b.gradient * mixing_.transpose()};
  }

  Jet orthonormal_jet(const Eigen::Ref<const Eigen::VectorXd>& point) const
  {
    return to_orthonormal(basis_->jet(point));
  }

  Jet orthonormal_node_jet(const QuadratureGrid& grid, Eigen::Index node) const
  {
    return to_orthonormal(basis_->node_jet(grid, node));
  }

private:
  Jet to_orthonormal(const Jet& b) const
  {
    return {ortho_in_basis_ * b.value, b.gradient * ortho_in_basis_.transpose()};
  }

  void orthonormalize()
  {
    if (gram_.rows() != gram_.cols() || gram_.rows() != mixing_.rows())
      throw InvalidArgument("Gram matrix must be square of the space dimension");
    if (!gram_.isApprox(gram_.transpose(), 1e-12))
      throw NumericError("Gram matrix is not symmetric");
    Eigen::MatrixXd sym = 0.5 * (gram_ + gram_.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    if (!(lambda.minCoeff() > 0.0))
      throw NumericError("Gram matrix is not positive definite (smallest eigenvalue " +
                         std::to_string(lambda.minCoeff()) + ")");
    if (lambda.maxCoeff() / lambda.minCoeff() > 1e12)
      throw NumericError("Gram matrix condition number exceeds 1e12");
    ortho_ = lambda.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
    ortho_in_basis_ = ortho_ * mixing_;
  }

  std::shared_ptr<const Basis> basis_;
  Eigen::MatrixXd mixing_;
  Eigen::MatrixXd gram_;
  InnerProductRule rule_;
  Eigen::MatrixXd ortho_;
  Eigen::MatrixXd ortho_in_basis_;
  std::vector<std::string> warnings_;
};

// Fiber matrix of the ellipsoid d*Theta_x(B) from an orthonormal jet:
// D = (De - (De e^) e^T) / |e|, M = D D^T.
inline Eigen::MatrixXd ellipsoid_matrix(const Jet& e)
{
  const double norm = e.value.norm();
  const Eigen::VectorXd unit = e.value / norm;
  const Eigen::MatrixXd d = (e.gradient - (e.gradient * unit) * unit.transpose()) / norm;
  return d * d.transpose();
}

inline BanachField ellipsoid_field(const FunctionSpace& space, const QuadratureGrid& grid)
{
  if (!(space.manifold() == grid.manifold()))
    throw InvalidArgument("function space and grid live on different manifolds");
  std::vector<Jet> jets;
  jets.reserve(static_cast<std::size_t>(grid.size()));
  double max_norm = 0.0;
  for (Eigen::Index node = 0; node < grid.size(); ++node) {
    jets.push_back(space.orthonormal_node_jet(grid, node));
    max_norm = std::max(max_norm, jets.back().value.norm());
  }
  std::vector<BodyCombination> fibers;
  fibers.reserve(jets.size());
  for (Eigen::Index node = 0; node < grid.size(); ++node) {
    const Jet& jet = jets[static_cast<std::size_t>(node)];
    if (!(jet.value.norm() > 1e-12 * max_norm)) {
      std::string where;
      for (Eigen::Index c = 0; c < grid.dim(); ++c)
        where += (c ? ", " : "") + std::to_string(grid.coordinates()(c, node));
      throw NumericError("every function of the space vanishes at node " + std::to_string(node) +
                         " (" + where + ")");
    }
    fibers.emplace_back(ConvexBody::ellipsoid(ellipsoid_matrix(jet)));
  }
  return BanachField(grid, std::move(fibers));
}

// f = sum_i z_i e_i with z_i iid standard normal in an orthonormal frame.
class SampledFunction
{
public:
  SampledFunction(std::shared_ptr<const Basis> basis, Eigen::VectorXd coefficients)
    : basis_(std::move(basis)), coefficients_(std::move(coefficients))
  {
  }

  // Coefficients with respect to the underlying basis.
  const Eigen::VectorXd& coefficients() const { return coefficients_; }
  const Basis& basis() const { return *basis_; }

  double value(const Eigen::Ref<const Eigen::VectorXd>& point) const
  {
    return basis_->jet(point).value.dot(coefficients_);
  }

  double value(double theta) const
  {
    Eigen::VectorXd p(1);
    p << theta;
    return value(p);
  }

  Eigen::VectorXd gradient(const Eigen::Ref<const Eigen::VectorXd>& point) const
  {
    return basis_->jet(point).gradient * coefficients_;
  }

  double node_value(const QuadratureGrid& grid, Eigen::Index node) const
  {
    return basis_->node_jet(grid, node).value.dot(coefficients_);
  }

  Eigen::MatrixXd scan(const std::vector<int>& counts, const std::vector<double>& offsets) const
  {
    return basis_->scan(coefficients_, counts, offsets);
  }

  Eigen::MatrixXd scan(const ScanTable& table) const { return basis_->scan(table, coefficients_); }
  void scan_into(const ScanTable& table, Eigen::MatrixXd& out) const { basis_->scan_into(table, coefficients_, out); }

private:
  std::shared_ptr<const Basis> basis_;
  Eigen::VectorXd coefficients_;
};

template <class Rng>
SampledFunction gaussian_sample(const FunctionSpace& space, Rng& rng)
{
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(space.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  return SampledFunction(space.basis_ptr(), space.orthonormal_in_basis().transpose() * z);
}

}  // namespace banach
