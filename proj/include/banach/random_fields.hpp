#pragma once

// Random test objects: ellipsoid fields, frames, segments.

#include "banach/banach_field.hpp"
#include "banach/convex.hpp"
#include "banach/manifold.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace banach {

// Q diag(exp(s z)) Q^T with Q a random rotation; condition number bounded
// by exp(2 s sqrt(2 log n))-ish in practice.
template <class Rng>
Eigen::MatrixXd random_spd(int n, Rng& rng, double spread = 1.0)
{
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd lambda(n);
  for (int i = 0; i < n; ++i) lambda(i) = std::exp(spread * std::clamp(normal(rng), -2.5, 2.5));
  return q * lambda.asDiagonal() * q.transpose();
}

template <class Rng>
BanachField random_ellipsoid_field(const QuadratureGrid& grid, Rng& rng, double spread = 1.0)
{
  std::vector<BodyCombination> fibers;
  fibers.reserve(static_cast<std::size_t>(grid.size()));
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    fibers.emplace_back(ConvexBody::ellipsoid(random_spd(grid.dim(), rng, spread)));
  return BanachField(grid, std::move(fibers));
}

template <class Rng>
Eigen::VectorXd random_vector(int n, Rng& rng)
{
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

// k x n matrix with condition number at most max_condition.
template <class Rng>
Eigen::MatrixXd random_frame_vectors(int k, int n, Rng& rng, double max_condition = 1e3)
{
  std::normal_distribution<double> normal(0.0, 1.0);
  while (true) {
    Eigen::MatrixXd f(k, n);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < n; ++j) f(i, j) = normal(rng);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(f);
    const auto& sv = svd.singularValues();
    if (sv(k - 1) > 0.0 && sv(0) / sv(k - 1) <= max_condition) return f;
  }
}

}  // namespace banach
