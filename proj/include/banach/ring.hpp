#pragma once

// Finitely generated subring of the graded symmetric algebra on virtual
// Banach sets, the top-degree functional I (mixed volume), the pairing
// L(x, y) = I(x y) and its kernel J. Elements of S/J are represented by
// coefficient vectors over monomials; reduction modulo J is numerical.

#include "banach/banach_field.hpp"
#include "banach/error.hpp"
#include "banach/parallel.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace banach {

// Sorted multiset of generator indices.
using Monomial = std::vector<int>;

// All monomials of a degree in `generators` variables, lexicographic.
inline std::vector<Monomial> enumerate_monomials(int generators, int degree)
{
  std::vector<Monomial> out;
  if (degree == 0) {
    out.emplace_back();
    return out;
  }
  Monomial m(static_cast<std::size_t>(degree), 0);
  while (true) {
    out.push_back(m);
    int pos = degree - 1;
    while (pos >= 0 && m[static_cast<std::size_t>(pos)] == generators - 1) --pos;
    if (pos < 0) break;
    const int value = m[static_cast<std::size_t>(pos)] + 1;
    for (int i = pos; i < degree; ++i) m[static_cast<std::size_t>(i)] = value;
  }
  return out;
}

struct RingElement
{
  int degree = 0;
  Eigen::VectorXd coefficients;  // over the ring's degree-`degree` monomials

  RingElement operator+(const RingElement& other) const
  {
    if (degree != other.degree) throw InvalidArgument("adding ring elements of different degree");
    return {degree, coefficients + other.coefficients};
  }
  RingElement operator-(const RingElement& other) const
  {
    if (degree != other.degree) throw InvalidArgument("subtracting ring elements of different degree");
    return {degree, coefficients - other.coefficients};
  }
  RingElement operator*(double c) const { return {degree, c * coefficients}; }
};

struct IdealCheckReport
{
  int degree = 0;
  double self_residual = 0.0;  // max |L(v, y)| over monomials y, relative
  bool in_kernel = false;
  std::vector<double> product_residuals;  // one per generator, empty when degree == n
  double tolerance = 0.0;
  bool passed = false;  // in_kernel and every product residual within tolerance
};

class BanachRing
{
public:
  explicit BanachRing(std::vector<BanachField> generators, std::vector<std::string> names = {},
                      GeometryOptions opts = {}, int threads = 1)
    : generators_(std::move(generators)), names_(std::move(names)), opts_(opts)
  {
    if (generators_.empty()) throw InvalidArgument("generator family must not be empty");
    for (const auto& g : generators_) require_same_grid(generators_.front(), g);
    if (names_.empty()) {
      for (std::size_t i = 0; i < generators_.size(); ++i) names_.push_back("B" + std::to_string(i + 1));
    }
    if (names_.size() != generators_.size()) throw InvalidArgument("one name per generator expected");
    n_ = generators_.front().dim();
    for (int p = 0; p <= n_; ++p) {
      monomials_.push_back(enumerate_monomials(generator_count(), p));
      auto& index = index_.emplace_back();
      for (std::size_t i = 0; i < monomials_.back().size(); ++i) index[monomials_.back()[i]] = i;
    }
    const auto& top = monomials_[static_cast<std::size_t>(n_)];
    top_values_.assign(top.size(), 0.0);
    parallel_for(top.size(), threads, [&](std::size_t i) {
      std::vector<BanachField> slots;
      for (int g : top[i]) slots.push_back(generators_[static_cast<std::size_t>(g)]);
      top_values_[i] = banach_mixed_volume(slots, opts_);
    });
  }

  int dim() const { return n_; }
  int generator_count() const { return static_cast<int>(generators_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  const BanachField& generator_field(int i) const { return generators_.at(static_cast<std::size_t>(i)); }
  const std::vector<BanachField>& generator_fields() const { return generators_; }
  const GeometryOptions& geometry() const { return opts_; }

  const std::vector<Monomial>& monomials(int degree) const
  {
    check_degree(degree);
    return monomials_[static_cast<std::size_t>(degree)];
  }

  std::size_t monomial_index(const Monomial& m) const
  {
    const int degree = static_cast<int>(m.size());
    check_degree(degree);
    Monomial sorted = m;
    std::sort(sorted.begin(), sorted.end());
    return index_[static_cast<std::size_t>(degree)].at(sorted);
  }

  std::string monomial_name(const Monomial& m) const
  {
    if (m.empty()) return "1";
    std::string s;
    for (std::size_t i = 0; i < m.size(); ++i) s += (i ? "*" : "") + names_[static_cast<std::size_t>(m[i])];
    return s;
  }

  RingElement unit() const { return {0, Eigen::VectorXd::Ones(1)}; }

  RingElement generator(int i) const { return monomial_element({i}); }

  RingElement monomial_element(const Monomial& m) const
  {
    const int degree = static_cast<int>(m.size());
    RingElement e{degree, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(monomials(degree).size()))};
    e.coefficients(static_cast<Eigen::Index>(monomial_index(m))) = 1.0;
    return e;
  }

  RingElement zero(int degree) const
  {
    return {degree, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(monomials(degree).size()))};
  }

  RingElement multiply(const RingElement& a, const RingElement& b) const
  {
    const int degree = a.degree + b.degree;
    if (degree > n_)
      throw InvalidArgument("products above degree n lie entirely in the kernel and are not represented");
    check_element(a);
    check_element(b);
    RingElement out = zero(degree);
    const auto& ma = monomials(a.degree);
    const auto& mb = monomials(b.degree);
    for (std::size_t i = 0; i < ma.size(); ++i) {
      const double ca = a.coefficients(static_cast<Eigen::Index>(i));
      if (ca == 0.0) continue;
      for (std::size_t j = 0; j < mb.size(); ++j) {
        const double cb = b.coefficients(static_cast<Eigen::Index>(j));
        if (cb == 0.0) continue;
        Monomial m = ma[i];
        m.insert(m.end(), mb[j].begin(), mb[j].end());
        out.coefficients(static_cast<Eigen::Index>(monomial_index(m))) += ca * cb;
      }
    }
    return out;
  }

  // I(m) = mixed volume of the generators of a degree-n monomial.
  double top_value(const Monomial& m) const
  {
    if (static_cast<int>(m.size()) != n_) return 0.0;
    return top_values_[monomial_index(m)];
  }

  double functional_I(const RingElement& e) const
  {
    if (e.degree != n_) return 0.0;
    check_element(e);
    return e.coefficients.dot(Eigen::Map<const Eigen::VectorXd>(top_values_.data(),
                                                                 static_cast<Eigen::Index>(top_values_.size())));
  }

  double pairing(const RingElement& a, const RingElement& b) const
  {
    if (a.degree + b.degree != n_) return 0.0;
    return functional_I(multiply(a, b));
  }

  // L_p[alpha, beta] = I(alpha * beta) over S_p x S_{n-p}.
  Eigen::MatrixXd pairing_matrix(int p) const
  {
    check_degree(p);
    const auto& rows = monomials(p);
    const auto& cols = monomials(n_ - p);
    Eigen::MatrixXd l(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < cols.size(); ++j) {
        Monomial m = rows[i];
        m.insert(m.end(), cols[j].begin(), cols[j].end());
        l(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = top_value(m);
      }
    }
    return l;
  }

  // Numerical rank with singular values above tol * sigma_max.
  int pairing_rank(int p, double tol = 1e-8) const
  {
    return numerical_rank(pairing_matrix(p), tol);
  }

  static int numerical_rank(const Eigen::MatrixXd& m, double tol)
  {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > tol * sv(0)) ++rank;
    return rank;
  }

  // Dimension of the degree-p part of S/J.
  int quotient_dimension(int p, double tol = 1e-8) const { return pairing_rank(p, tol); }

  // Orthonormal basis of {v in S_p : L(v, y) = 0 for all y in S_{n-p}}.
  std::vector<RingElement> kernel_basis(int p, double tol = 1e-8) const
  {
    const Eigen::MatrixXd l = pairing_matrix(p);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(l, Eigen::ComputeFullU);
    const int rank = numerical_rank(l, tol);
    std::vector<RingElement> out;
    for (Eigen::Index c = rank; c < l.rows(); ++c) out.push_back({p, svd.matrixU().col(c)});
    return out;
  }

  // Checks that v pairs to zero with S_{n-p} and that every generator
  // multiple B_i * v does so with S_{n-p-1}. Residuals are relative to
  // sigma_max of the pairing and the element norm.
  IdealCheckReport ideal_check(const RingElement& v, double tol = 1e-8) const
  {
    check_element(v);
    IdealCheckReport report;
    report.degree = v.degree;
    report.tolerance = tol;
    report.self_residual = relative_pairing_residual(v);
    report.in_kernel = report.self_residual <= tol;
    bool ok = report.in_kernel;
    if (v.degree < n_) {
      for (int g = 0; g < generator_count(); ++g) {
        const double r = relative_pairing_residual(multiply(generator(g), v));
        report.product_residuals.push_back(r);
        ok = ok && r <= tol;
      }
    }
    report.passed = ok;
    return report;
  }

private:
  void check_degree(int degree) const
  {
    if (degree < 0 || degree > n_)
      throw InvalidArgument("degree " + std::to_string(degree) + " outside 0.." + std::to_string(n_));
  }

  void check_element(const RingElement& e) const
  {
    if (e.coefficients.size() != static_cast<Eigen::Index>(monomials(e.degree).size()))
      throw InvalidArgument("ring element has the wrong number of coefficients for its degree");
  }

  double relative_pairing_residual(const RingElement& v) const
  {
    const Eigen::MatrixXd l = pairing_matrix(v.degree);
    const double norm = v.coefficients.norm();
    if (norm == 0.0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(l);
    const double sigma = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    const double residual = (l.transpose() * v.coefficients).cwiseAbs().maxCoeff();
    if (sigma == 0.0) return residual == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return residual / (sigma * norm);
  }

  std::vector<BanachField> generators_;
  std::vector<std::string> names_;
  GeometryOptions opts_;
  int n_ = 0;
  std::vector<std::vector<Monomial>> monomials_;
  std::vector<std::map<Monomial, std::size_t>> index_;
  std::vector<double> top_values_;
};

}  // namespace banach
