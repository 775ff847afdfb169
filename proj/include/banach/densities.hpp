#pragma once

// k-densities of ring elements. For a monomial B_1 ... B_k and a tangent
// frame xi_1..xi_k at a node, every fiber is mapped by a -> (<a, xi_i>)_i
// into R^k and the k-dimensional mixed volume of the images is taken. The
// map identifies T*_x X / H^perp with R^k so that the dual frame cell has
// unit volume, i.e. volumes are measured against xi_1 ^ ... ^ xi_k.
//
// The frame index convention: the frame has exactly k vectors (the volume
// form uses the same vectors that span H).

#include "banach/banach_field.hpp"
#include "banach/convex.hpp"
#include "banach/error.hpp"
#include "banach/manifold.hpp"
#include "banach/ring.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace banach {

struct Frame
{
  Eigen::Index node = 0;
  Eigen::MatrixXd vectors;  // k x n, row i is xi_i in chart coordinates

  int size() const { return static_cast<int>(vectors.rows()); }
};

inline Frame coordinate_frame_at(const QuadratureGrid& grid, Eigen::Index node)
{
  return {node, coordinate_frame(grid.manifold(), grid.point(node))};
}

namespace detail {

inline void check_frame(const Frame& frame, int n)
{
  if (frame.vectors.cols() != n)
    throw InvalidArgument("frame vectors must have the manifold dimension");
  if (frame.size() < 1 || frame.size() > n)
    throw InvalidArgument("frame must hold between 1 and n vectors");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(frame.vectors);
  const auto& sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > 1e-12 * sv(0)))
    throw InvalidArgument("frame vectors are linearly dependent");
}

}  // namespace detail

// d_k(B_1 ... B_k)(xi_1, ..., xi_k) at frame.node.
inline double density_eval(std::span<const BanachField> fields, const Frame& frame,
                           const GeometryOptions& opts = {})
{
  if (fields.empty()) throw InvalidArgument("density of an empty product");
  const int n = fields.front().dim();
  detail::check_frame(frame, n);
  if (static_cast<int>(fields.size()) != frame.size())
    throw InvalidArgument("density degree does not match the frame size");
  if (frame.node < 0 || frame.node >= fields.front().grid().size())
    throw InvalidArgument("frame node outside the grid");
  // xi^T = Q R: project orthonormally onto span(xi) and pick up |det R| for
  // the change to the frame basis, which keeps the images well conditioned
  // for skewed frames. d_1 is a width and is taken directly.
  Eigen::MatrixXd unit = frame.vectors;
  double scale = 1.0;
  if (frame.size() > 1) {
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(frame.vectors.transpose());
    const Eigen::Index k = frame.size();
    unit = (qr.householderQ() * Eigen::MatrixXd::Identity(n, k)).transpose();
    for (Eigen::Index i = 0; i < k; ++i) scale *= std::abs(qr.matrixQR()(i, i));
  }
  std::vector<BodyCombination> projected;
  projected.reserve(fields.size());
  for (const auto& f : fields) {
    require_same_grid(fields.front(), f);
    projected.push_back(f.fiber(static_cast<std::size_t>(frame.node)).projected(unit));
  }
  return scale * mixed_volume(projected, frame.size(), opts);
}

inline double density_eval(std::initializer_list<BanachField> fields, const Frame& frame,
                           const GeometryOptions& opts = {})
{
  return density_eval(std::span<const BanachField>(fields.begin(), fields.size()), frame, opts);
}

// Linear extension over the monomials of a ring element.
inline double density_eval(const BanachRing& ring, const RingElement& elem, const Frame& frame)
{
  if (elem.degree != frame.size())
    throw InvalidArgument("ring element degree does not match the frame size");
  if (elem.degree == 0) throw InvalidArgument("density of a degree-0 element");
  const auto& monomials = ring.monomials(elem.degree);
  double total = 0.0;
  std::vector<BanachField> slots;
  for (std::size_t i = 0; i < monomials.size(); ++i) {
    const double c = elem.coefficients(static_cast<Eigen::Index>(i));
    if (c == 0.0) continue;
    slots.clear();
    for (int g : monomials[i]) slots.push_back(ring.generator_field(g));
    total += c * density_eval(slots, frame, ring.geometry());
  }
  return total;
}

// Sum over nodes of weight * d_n(elem)(coordinate frame); agrees with I(elem).
inline double density_integrate(const BanachRing& ring, const RingElement& elem)
{
  if (elem.degree != ring.dim()) throw InvalidArgument("density_integrate needs a degree-n element");
  const QuadratureGrid& grid = ring.generator_field(0).grid();
  double sum = 0.0;
  for (Eigen::Index node = 0; node < grid.size(); ++node) {
    const double w = grid.weight(node);
    if (w == 0.0) continue;
    sum += w * density_eval(ring, elem, coordinate_frame_at(grid, node));
  }
  return sum;
}

struct SegmentDeterminantReport
{
  double density_side = 0.0;      // k! * d_k(s_1 ... s_k)
  double determinant_side = 0.0;  // |det(2 <a_i, xi_j>)|
  double relative_error = 0.0;
};

// Decomposable case of the product formula: for segment fields s_i = [-a_i, a_i]
// the 1-densities are d_1(s_i) = 2 |<a_i, .>| and their product is the
// determinant |det(2 <a_i, xi_j>)|.
inline SegmentDeterminantReport segment_determinant_check(std::span<const BanachField> segments,
                                                          const Frame& frame)
{
  const int k = static_cast<int>(segments.size());
  Eigen::MatrixXd pairing(k, k);
  for (int i = 0; i < k; ++i) {
    const auto& fiber = segments[static_cast<std::size_t>(i)].fiber(static_cast<std::size_t>(frame.node));
    if (fiber.terms().size() != 1 || fiber.terms().front().body.kind() != ConvexBody::Kind::Segment)
      throw InvalidArgument("segment_determinant_check needs segment fields");
    const Eigen::VectorXd a = fiber.terms().front().coefficient * fiber.terms().front().body.half_axis();
    for (int j = 0; j < k; ++j) pairing(i, j) = 2.0 * a.dot(frame.vectors.row(j).transpose());
  }
  SegmentDeterminantReport r;
  double factorial = 1.0;
  for (int i = 2; i <= k; ++i) factorial *= i;
  r.density_side = factorial * density_eval(segments, frame);
  r.determinant_side = std::abs(pairing.determinant());
  const double scale = std::max(std::abs(r.density_side), std::abs(r.determinant_side));
  r.relative_error = scale > 0.0 ? std::abs(r.density_side - r.determinant_side) / scale : 0.0;
  return r;
}

inline SegmentDeterminantReport segment_determinant_check(std::initializer_list<BanachField> segments,
                                                          const Frame& frame)
{
  return segment_determinant_check(std::span<const BanachField>(segments.begin(), segments.size()), frame);
}

struct SeparationVerdict
{
  bool separated = false;  // false means "not separated within budget", never "equal"
  int samples_tried = 0;
  std::optional<Frame> witness;
  double first_value = 0.0;
  double second_value = 0.0;
};

// Random search for a frame where the two degree-k densities differ by more
// than tol relative to their magnitude.
template <class Rng>
SeparationVerdict density_separation(const BanachRing& ring, const RingElement& s, const RingElement& t,
                                     int budget, double tol, Rng& rng)
{
  if (s.degree != t.degree) throw InvalidArgument("density_separation compares equal degrees");
  const int k = s.degree;
  const int n = ring.dim();
  const QuadratureGrid& grid = ring.generator_field(0).grid();
  std::uniform_int_distribution<Eigen::Index> pick_node(0, grid.size() - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  SeparationVerdict verdict;
  for (int trial = 0; trial < budget; ++trial) {
    Frame frame{pick_node(rng), Eigen::MatrixXd(k, n)};
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < n; ++j) frame.vectors(i, j) = normal(rng);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(frame.vectors);
    if (svd.singularValues()(k - 1) < 1e-6 * svd.singularValues()(0)) continue;
    ++verdict.samples_tried;
    const double a = density_eval(ring, s, frame);
    const double b = density_eval(ring, t, frame);
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    if (std::abs(a - b) > tol * scale) {
      verdict.separated = true;
      verdict.witness = frame;
      verdict.first_value = a;
      verdict.second_value = b;
      return verdict;
    }
  }
  return verdict;
}

}  // namespace banach
