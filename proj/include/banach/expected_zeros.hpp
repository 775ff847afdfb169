#pragma once

// Expected number of common zeros of independent Gaussian functions
// f_i in V_i on an n-manifold:
//   E N = n! / (2 pi)^n * vol(E_{V_1}, ..., E_{V_n}),
// which for V_1 = ... = V_n = V reduces to n! / (2 pi)^n * vol(E_V).

#include "banach/banach_field.hpp"
#include "banach/function_space.hpp"
#include "banach/manifold.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace banach {

inline double zero_count_normalization(int n)
{
  double factorial = 1.0;
  for (int i = 2; i <= n; ++i) factorial *= i;
  return factorial / std::pow(2 * std::numbers::pi, n);
}

inline double expected_zeros(const FunctionSpace& space, const QuadratureGrid& grid,
                             const std::optional<SubdomainBox>& box = std::nullopt,
                             const GeometryOptions& opts = {})
{
  BanachField field = ellipsoid_field(space, grid);
  if (box) field = restrict(field, *box);
  return zero_count_normalization(grid.dim()) * banach_volume(field, opts);
}

inline double expected_zeros(std::span<const FunctionSpace> spaces, const QuadratureGrid& grid,
                             const std::optional<SubdomainBox>& box = std::nullopt,
                             const GeometryOptions& opts = {})
{
  if (static_cast<int>(spaces.size()) != grid.dim())
    throw InvalidArgument("expected_zeros needs one space per manifold dimension");
  std::vector<BanachField> fields;
  for (const auto& s : spaces) {
    fields.push_back(ellipsoid_field(s, grid));
    if (box) fields.back() = restrict(fields.back(), *box);
  }
  return zero_count_normalization(grid.dim()) * banach_mixed_volume(fields, opts);
}

}  // namespace banach
