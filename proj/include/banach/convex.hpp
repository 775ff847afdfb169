#pragma once

// Centrally symmetric convex bodies described by their support functions,
// Minkowski combinations, volumes, mixed volumes and linear projections.
//
// Three body kinds are supported:
//   Ellipsoid       h(u) = sqrt(u^T M u), M symmetric PSD (possibly singular)
//   Segment         h(u) = |<a, u>|, the segment [-a, a]
//   SupportSampled  a symmetric polygon rebuilt from support samples
//
// Volumes of combinations whose members are all ellipsoids or segments are
// exact: in the plane they expand into pairwise mixed areas, each of which
// has a closed form. As soon as a sampled body takes part, the planar
// volume is computed from a circumscribed polygon at an equiangular
// direction grid, whose area error is O(directions^-2) for smooth bodies.

#include "banach/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace banach {

struct GeometryOptions
{
  int directions = 720;        // polygonal reconstruction grid
  bool force_polygonal = false;  // also route closed-form combinations through the polygon
};

class ConvexBody
{
public:
  enum class Kind { Ellipsoid, Segment, SupportSampled };

  // Symmetrizes M and clamps eigenvalues in [-1e-12 |M|, 0) to zero.
  static ConvexBody ellipsoid(Eigen::MatrixXd m)
  {
    if (m.rows() != m.cols() || m.rows() == 0)
      throw InvalidArgument("ellipsoid matrix must be square and non-empty");
    Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double scale = lambda.cwiseAbs().maxCoeff();
    if (lambda.minCoeff() < -1e-12 * scale)
      throw NumericError("ellipsoid matrix is not positive semidefinite");
    if (lambda.minCoeff() < 0.0) {
      Eigen::VectorXd clamped = lambda.cwiseMax(0.0);
      sym = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
      sym = 0.5 * (sym + sym.transpose());
    }
    ConvexBody body;
    body.dim_ = static_cast<int>(sym.rows());
    body.shape_ = EllipsoidData{std::move(sym)};
    return body;
  }

  static ConvexBody ball(int dim, double radius = 1.0)
  {
    return ellipsoid(Eigen::MatrixXd::Identity(dim, dim) * (radius * radius));
  }

  static ConvexBody segment(Eigen::VectorXd half_axis)
  {
    if (half_axis.size() == 0)
      throw InvalidArgument("segment needs a non-empty covector");
    ConvexBody body;
    body.dim_ = static_cast<int>(half_axis.size());
    body.shape_ = SegmentData{std::move(half_axis)};
    return body;
  }

  // Builds the body from support values h(direction_j) (directions are the
  // columns, not necessarily unit). Every sample is mirrored to -direction;
  // where both signs are given the smaller value wins. Dimension 1 or 2.
  static ConvexBody from_support_samples(const Eigen::MatrixXd& directions,
                                         const Eigen::VectorXd& values)
  {
    const auto d = directions.rows();
    if (directions.cols() != values.size() || directions.cols() == 0)
      throw InvalidArgument("support samples: direction/value count mismatch");
    if ((values.array() < 0.0).any())
      throw InvalidArgument("support samples must be nonnegative");
    if (d == 1) {
      double half = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < directions.cols(); ++j) {
        const double len = std::abs(directions(0, j));
        if (len == 0.0) continue;
        half = std::min(half, values(j) / len);
      }
      if (!std::isfinite(half))
        throw InvalidArgument("support samples: no nonzero direction");
      Eigen::MatrixXd v(1, 2);
      v << half, -half;
      return from_polygon(std::move(v), 1);
    }
    if (d != 2)
      throw InvalidArgument("support samples are only supported in dimension 1 or 2");

    std::vector<std::pair<double, double>> samples;  // (angle, h for unit direction)
    samples.reserve(2 * directions.cols());
    for (Eigen::Index j = 0; j < directions.cols(); ++j) {
      const double len = directions.col(j).norm();
      if (len == 0.0) continue;
      const double phi = std::atan2(directions(1, j), directions(0, j));
      const double h = values(j) / len;
      samples.emplace_back(wrap_angle(phi), h);
      samples.emplace_back(wrap_angle(phi + std::numbers::pi), h);
    }
    std::sort(samples.begin(), samples.end());
    std::vector<double> angles, supports;
    for (const auto& [phi, h] : samples) {
      if (!angles.empty() && std::abs(phi - angles.back()) < 1e-14) {
        supports.back() = std::min(supports.back(), h);
        continue;
      }
      angles.push_back(phi);
      supports.push_back(h);
    }
    const std::size_t count = angles.size();
    for (std::size_t j = 0; j < count; ++j) {
      double gap = (j + 1 < count ? angles[j + 1] : angles[0] + 2 * std::numbers::pi) - angles[j];
      if (gap >= std::numbers::pi - 1e-12)
        throw InvalidArgument("support samples leave an angular gap of at least pi");
    }
    return from_polygon(polygon_from_support(angles, supports), 2);
  }

  Kind kind() const
  {
    return static_cast<Kind>(shape_.index());
  }
  int dim() const { return dim_; }

  const Eigen::MatrixXd& shape_matrix() const { return std::get<EllipsoidData>(shape_).m; }
  const Eigen::VectorXd& half_axis() const { return std::get<SegmentData>(shape_).a; }
  // Polygon vertices (columns), counter-clockwise in dimension 2.
  const Eigen::MatrixXd& vertices() const { return std::get<PolygonData>(shape_).v; }

  double support(const Eigen::Ref<const Eigen::VectorXd>& u) const
  {
    if (u.size() != dim_)
      throw InvalidArgument("support direction has wrong dimension");
    switch (kind()) {
      case Kind::Ellipsoid: {
        const double q = u.dot(shape_matrix() * u);
        return q > 0.0 ? std::sqrt(q) : 0.0;
      }
      case Kind::Segment:
        return std::abs(half_axis().dot(u));
      case Kind::SupportSampled: {
        const Eigen::VectorXd proj = vertices().transpose() * u;
        return std::max(0.0, proj.maxCoeff());
      }
    }
    return 0.0;
  }

  // Image under a -> frame * a (frame is k x d, rank k).
  ConvexBody projected(const Eigen::MatrixXd& frame) const
  {
    if (frame.cols() != dim_)
      throw InvalidArgument("projection frame has wrong ambient dimension");
    if (frame.rows() == 0 || frame.rows() > dim_)
      throw InvalidArgument("projection frame must have between 1 and d vectors");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(frame);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-12 * std::max(sv(0), 1e-300))
      throw InvalidArgument("projection frame is rank deficient");
    const int k = static_cast<int>(frame.rows());
    switch (kind()) {
      case Kind::Ellipsoid:
        return ellipsoid(frame * shape_matrix() * frame.transpose());
      case Kind::Segment:
        return segment(frame * half_axis());
      case Kind::SupportSampled: {
        Eigen::MatrixXd image = frame * vertices();
        if (k == 1) {
          const double half = image.cwiseAbs().maxCoeff();
          Eigen::MatrixXd v(1, 2);
          v << half, -half;
          return from_polygon(std::move(v), 1);
        }
        return from_polygon(convex_hull_2d(image), 2);
      }
    }
    throw InvalidArgument("unknown body kind");
  }

private:
  struct EllipsoidData { Eigen::MatrixXd m; };
  struct SegmentData { Eigen::VectorXd a; };
  struct PolygonData { Eigen::MatrixXd v; };

  static ConvexBody from_polygon(Eigen::MatrixXd v, int dim)
  {
    ConvexBody body;
    body.dim_ = dim;
    body.shape_ = PolygonData{std::move(v)};
    return body;
  }

  static double wrap_angle(double phi)
  {
    const double two_pi = 2 * std::numbers::pi;
    phi = std::fmod(phi, two_pi);
    return phi < 0.0 ? phi + two_pi : phi;
  }

  // Vertices of the intersection of half-planes <u_j, x> <= h_j, for sorted
  // angles with gaps below pi: consecutive support lines meet at a vertex.
  static Eigen::MatrixXd polygon_from_support(const std::vector<double>& angles,
                                              const std::vector<double>& supports)
  {
    const std::size_t count = angles.size();
    Eigen::MatrixXd v(2, static_cast<Eigen::Index>(count));
    for (std::size_t j = 0; j < count; ++j) {
      const std::size_t k = (j + 1) % count;
      const double c0 = std::cos(angles[j]), s0 = std::sin(angles[j]);
      const double c1 = std::cos(angles[k]), s1 = std::sin(angles[k]);
      const double det = c0 * s1 - s0 * c1;
      v(0, static_cast<Eigen::Index>(j)) = (supports[j] * s1 - supports[k] * s0) / det;
      v(1, static_cast<Eigen::Index>(j)) = (c0 * supports[k] - c1 * supports[j]) / det;
    }
    return v;
  }

  // Monotone chain; returns counter-clockwise hull vertices.
  static Eigen::MatrixXd convex_hull_2d(const Eigen::MatrixXd& points)
  {
    std::vector<std::pair<double, double>> p;
    p.reserve(static_cast<std::size_t>(points.cols()));
    for (Eigen::Index j = 0; j < points.cols(); ++j)
      p.emplace_back(points(0, j), points(1, j));
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    if (p.size() < 3) {
      Eigen::MatrixXd v(2, static_cast<Eigen::Index>(p.size()));
      for (std::size_t j = 0; j < p.size(); ++j)
        v.col(static_cast<Eigen::Index>(j)) << p[j].first, p[j].second;
      return v;
    }
    auto cross = [](const auto& o, const auto& a, const auto& b) {
      return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
    };
    std::vector<std::pair<double, double>> hull(2 * p.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      while (k >= 2 && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
      hull[k++] = p[i];
    }
    for (std::size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
      while (k >= t && cross(hull[k - 2], hull[k - 1], p[i - 1]) <= 0) --k;
      hull[k++] = p[i - 1];
    }
    hull.resize(k - 1);
    Eigen::MatrixXd v(2, static_cast<Eigen::Index>(hull.size()));
    for (std::size_t j = 0; j < hull.size(); ++j)
      v.col(static_cast<Eigen::Index>(j)) << hull[j].first, hull[j].second;
    return v;
  }

  int dim_ = 0;
  std::variant<EllipsoidData, SegmentData, PolygonData> shape_;
};

// Nonnegative Minkowski combination sum_i c_i K_i.
class BodyCombination
{
public:
  struct Term
  {
    double coefficient;
    ConvexBody body;
  };

  BodyCombination() = default;
  BodyCombination(ConvexBody body)  // NOLINT: a body is a one-term combination
  {
    add(1.0, std::move(body));
  }

  BodyCombination& add(double coefficient, ConvexBody body)
  {
    if (!(coefficient >= 0.0))
      throw InvalidArgument("Minkowski coefficients must be nonnegative");
    if (!terms_.empty() && body.dim() != dim())
      throw InvalidArgument("Minkowski combination of bodies of different dimension");
    terms_.push_back({coefficient, std::move(body)});
    return *this;
  }

  BodyCombination& add(double coefficient, const BodyCombination& other)
  {
    for (const auto& t : other.terms_)
      add(coefficient * t.coefficient, t.body);
    return *this;
  }

  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  int dim() const { return terms_.empty() ? 0 : terms_.front().body.dim(); }

  double support(const Eigen::Ref<const Eigen::VectorXd>& u) const
  {
    double h = 0.0;
    for (const auto& t : terms_)
      h += t.coefficient * t.body.support(u);
    return h;
  }

  BodyCombination projected(const Eigen::MatrixXd& frame) const
  {
    BodyCombination out;
    for (const auto& t : terms_)
      out.add(t.coefficient, t.body.projected(frame));
    return out;
  }

  bool has_sampled() const
  {
    return std::any_of(terms_.begin(), terms_.end(), [](const Term& t) {
      return t.body.kind() == ConvexBody::Kind::SupportSampled;
    });
  }

private:
  std::vector<Term> terms_;
};

namespace detail {

inline double unit_ball_volume(int d)
{
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

inline double shoelace(const Eigen::MatrixXd& v)
{
  double twice = 0.0;
  const Eigen::Index count = v.cols();
  for (Eigen::Index j = 0; j < count; ++j) {
    const Eigen::Index k = (j + 1) % count;
    twice += v(0, j) * v(1, k) - v(0, k) * v(1, j);
  }
  return 0.5 * std::abs(twice);
}

inline Eigen::Vector2d rotate90(const Eigen::VectorXd& a)
{
  return {-a(1), a(0)};
}

// Returns true and sets `axis` if the planar ellipsoid is (numerically) a
// segment or a point.
inline bool ellipsoid_as_segment(const Eigen::MatrixXd& m, Eigen::VectorXd& axis)
{
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(m);
  const auto& lambda = eig.eigenvalues();
  if (lambda(1) <= 0.0) {
    axis = Eigen::Vector2d::Zero();
    return true;
  }
  if (lambda(0) > 1e-13 * lambda(1)) return false;
  axis = std::sqrt(lambda(1)) * eig.eigenvectors().col(1);
  return true;
}

// Mixed area of two planar ellipsoids. With E2 = M2^{1/2} B,
// V(E1, E2) = sqrt(det M2) * V(M2^{-1/2} E1, B) = sqrt(det M2) * perimeter / 2,
// and the perimeter of an ellipse with semi-axes a >= b is 4 a E(e).
inline double mixed_area_ellipses(const Eigen::Matrix2d& m1, const Eigen::Matrix2d& m2)
{
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> gen(m1, m2);
  const double mu_min = std::max(gen.eigenvalues()(0), 0.0);
  const double mu_max = std::max(gen.eigenvalues()(1), 0.0);
  if (mu_max == 0.0) return 0.0;
  const double e = std::sqrt(std::max(0.0, 1.0 - mu_min / mu_max));
  return 2.0 * std::sqrt(m2.determinant()) * std::sqrt(mu_max) * std::comp_ellint_2(e);
}

inline double condition_2x2(const Eigen::Matrix2d& m)
{
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(m);
  return eig.eigenvalues()(0) / eig.eigenvalues()(1);
}

// Closed-form mixed area of two planar atoms, neither of them sampled.
inline double mixed_area_atoms(const ConvexBody& a, const ConvexBody& b)
{
  using Kind = ConvexBody::Kind;
  Eigen::VectorXd seg_a, seg_b;
  const bool a_is_seg = a.kind() == Kind::Segment ||
                        ellipsoid_as_segment(a.shape_matrix(), seg_a);
  const bool b_is_seg = b.kind() == Kind::Segment ||
                        ellipsoid_as_segment(b.shape_matrix(), seg_b);
  if (a.kind() == Kind::Segment) seg_a = a.half_axis();
  if (b.kind() == Kind::Segment) seg_b = b.half_axis();

  if (a_is_seg && b_is_seg)
    return 2.0 * std::abs(seg_a(0) * seg_b(1) - seg_a(1) * seg_b(0));
  if (b_is_seg) return 2.0 * a.support(rotate90(seg_b));
  if (a_is_seg) return 2.0 * b.support(rotate90(seg_a));

  const Eigen::Matrix2d ma = a.shape_matrix();
  const Eigen::Matrix2d mb = b.shape_matrix();
  // Whiten with the better conditioned matrix.
  return condition_2x2(mb) >= condition_2x2(ma) ? mixed_area_ellipses(ma, mb)
                                                : mixed_area_ellipses(mb, ma);
}

inline double polygonal_area(const BodyCombination& body, int directions)
{
  if (directions < 3)
    throw InvalidArgument("polygonal reconstruction needs at least 3 directions");
  std::vector<double> angles(static_cast<std::size_t>(directions));
  std::vector<double> supports(angles.size());
  for (int j = 0; j < directions; ++j) {
    const double phi = 2 * std::numbers::pi * j / directions;
    angles[static_cast<std::size_t>(j)] = phi;
    supports[static_cast<std::size_t>(j)] = body.support(Eigen::Vector2d(std::cos(phi), std::sin(phi)));
  }
  Eigen::MatrixXd v(2, directions);
  for (int j = 0; j < directions; ++j) {
    const int k = (j + 1) % directions;
    const double c0 = std::cos(angles[j]), s0 = std::sin(angles[j]);
    const double c1 = std::cos(angles[k]), s1 = std::sin(angles[k]);
    const double det = c0 * s1 - s0 * c1;
    v(0, j) = (supports[j] * s1 - supports[k] * s0) / det;
    v(1, j) = (c0 * supports[k] - c1 * supports[j]) / det;
  }
  return shoelace(v);
}

}  // namespace detail

inline double support_eval(const ConvexBody& body, const Eigen::Ref<const Eigen::VectorXd>& u)
{
  return body.support(u);
}

inline double support_eval(const BodyCombination& body, const Eigen::Ref<const Eigen::VectorXd>& u)
{
  return body.support(u);
}

inline double volume(const ConvexBody& body, int dim)
{
  if (body.dim() != dim)
    throw InvalidArgument("volume: body dimension " + std::to_string(body.dim()) +
                          " does not match requested " + std::to_string(dim));
  using Kind = ConvexBody::Kind;
  switch (body.kind()) {
    case Kind::Ellipsoid: {
      if (dim == 1) return 2.0 * std::sqrt(body.shape_matrix()(0, 0));
      const double det = body.shape_matrix().determinant();
      return det > 0.0 ? detail::unit_ball_volume(dim) * std::sqrt(det) : 0.0;
    }
    case Kind::Segment:
      return dim == 1 ? 2.0 * std::abs(body.half_axis()(0)) : 0.0;
    case Kind::SupportSampled:
      if (dim == 1) return 2.0 * body.vertices().cwiseAbs().maxCoeff();
      if (dim == 2) return detail::shoelace(body.vertices());
      throw InvalidArgument("sampled bodies are only supported up to dimension 2");
  }
  return 0.0;
}

inline double volume(const BodyCombination& body, int dim, const GeometryOptions& opts = {})
{
  if (body.empty()) return 0.0;
  if (body.dim() != dim)
    throw InvalidArgument("volume: combination dimension does not match");
  const auto& terms = body.terms();
  if (dim == 1) {
    double length = 0.0;
    for (const auto& t : terms)
      length += t.coefficient * volume(t.body, 1);
    return length;
  }
  if (terms.size() == 1 && !opts.force_polygonal) {
    const double c = terms.front().coefficient;
    return std::pow(c, dim) * volume(terms.front().body, dim);
  }
  if (dim != 2)
    throw InvalidArgument("volumes of Minkowski combinations are only supported up to dimension 2");
  if (opts.force_polygonal || body.has_sampled())
    return detail::polygonal_area(body, opts.directions);

  double area = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const double ci = terms[i].coefficient;
    area += ci * ci * volume(terms[i].body, 2);
    for (std::size_t j = i + 1; j < terms.size(); ++j)
      area += 2.0 * ci * terms[j].coefficient * detail::mixed_area_atoms(terms[i].body, terms[j].body);
  }
  return area;
}

// Polarization: (1/d!) sum over nonempty S of (-1)^{d-|S|} vol(sum_{i in S} K_i).
// Normalized so that mixed_volume(K, ..., K) = volume(K).
inline double mixed_volume(std::span<const BodyCombination> bodies, int dim,
                           const GeometryOptions& opts = {})
{
  if (static_cast<int>(bodies.size()) != dim)
    throw InvalidArgument("mixed_volume needs exactly " + std::to_string(dim) + " bodies");
  if (dim < 1 || dim > 30)
    throw InvalidArgument("mixed_volume: unsupported dimension");
  // Planar closed-form pairs: expand bilinearly instead of polarizing, which
  // cancels badly when the two bodies differ a lot in size.
  if (dim == 2 && !opts.force_polygonal && !bodies[0].empty() && !bodies[1].empty() &&
      !bodies[0].has_sampled() && !bodies[1].has_sampled()) {
    if (bodies[0].dim() != 2 || bodies[1].dim() != 2)
      throw InvalidArgument("volume: combination dimension does not match");
    double area = 0.0;
    for (const auto& a : bodies[0].terms())
      for (const auto& b : bodies[1].terms())
        area += a.coefficient * b.coefficient * detail::mixed_area_atoms(a.body, b.body);
    return area;
  }
  double total = 0.0;
  double factorial = 1.0;
  for (int i = 2; i <= dim; ++i) factorial *= i;
  for (unsigned mask = 1; mask < (1u << dim); ++mask) {
    BodyCombination sum;
    int size = 0;
    for (int i = 0; i < dim; ++i) {
      if (mask & (1u << i)) {
        sum.add(1.0, bodies[static_cast<std::size_t>(i)]);
        ++size;
      }
    }
    const double sign = ((dim - size) % 2 == 0) ? 1.0 : -1.0;
    total += sign * volume(sum, dim, opts);
  }
  return total / factorial;
}

inline double mixed_volume(std::initializer_list<BodyCombination> bodies, int dim,
                           const GeometryOptions& opts = {})
{
  return mixed_volume(std::span<const BodyCombination>(bodies.begin(), bodies.size()), dim, opts);
}

inline ConvexBody project_body(const ConvexBody& body, const Eigen::MatrixXd& frame)
{
  return body.projected(frame);
}

}  // namespace banach
