#pragma once

// Tabulated function spaces stored as JSON:
//
//   {
//     "format": "banach-tabulated-space/1",
//     "manifold": "circle" | "torus2",
//     "grid": [N1] | [N1, N2],
//     "basis_count": N,
//     "gram": [N*N numbers, row-major],
//     "nodes": [ {"values": [N numbers],
//                 "derivatives": [N*n numbers, basis-major: phi_0 d1, phi_0 d2, phi_1 d1, ...]},
//                ... one entry per grid node, row-major over the grid ]
//   }

#include "banach/error.hpp"
#include "banach/function_space.hpp"
#include "banach/manifold.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace banach {

inline constexpr const char* kTabulatedFormat = "banach-tabulated-space/1";

namespace detail {

// Largest relative mismatch between tabulated derivatives and periodic
// central differences of the tabulated values (fourth order when the
// coordinate has at least 5 nodes).
inline double tabulated_derivative_mismatch(const TabulatedBasis& basis)
{
  const QuadratureGrid& grid = basis.grid();
  const int n = grid.dim();
  const auto& shape = grid.shape();
  double worst = 0.0, scale = 0.0;
  for (Eigen::Index node = 0; node < grid.size(); ++node) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    Eigen::Index rest = node;
    for (int c = n - 1; c >= 0; --c) {
      idx[static_cast<std::size_t>(c)] = static_cast<int>(rest % shape[static_cast<std::size_t>(c)]);
      rest /= shape[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < n; ++c) {
      auto shifted = [&](int delta) {
        std::vector<int> j = idx;
        const int count = shape[static_cast<std::size_t>(c)];
        j[static_cast<std::size_t>(c)] = (j[static_cast<std::size_t>(c)] + delta + count) % count;
        Eigen::Index flat = 0;
        for (int a = 0; a < n; ++a) flat = flat * shape[static_cast<std::size_t>(a)] + j[static_cast<std::size_t>(a)];
        return flat;
      };
      const double h = Manifold::period() / shape[static_cast<std::size_t>(c)];
      const bool wide = shape[static_cast<std::size_t>(c)] >= 5;
      const Eigen::Index fwd = shifted(1), bwd = shifted(-1), fwd2 = shifted(2), bwd2 = shifted(-2);
      for (int b = 0; b < basis.size(); ++b) {
        const auto& v = basis.values();
        const double fd = wide ? (8 * (v(b, fwd) - v(b, bwd)) - (v(b, fwd2) - v(b, bwd2))) / (12 * h)
                               : (v(b, fwd) - v(b, bwd)) / (2 * h);
        const double d = basis.gradients()(b * n + c, node);
        worst = std::max(worst, std::abs(fd - d));
        scale = std::max(scale, std::abs(d));
      }
    }
  }
  return scale > 0.0 ? worst / scale : worst;
}

}  // namespace detail

inline FunctionSpace tabulated_space_from_json(const nlohmann::json& doc, const QuadratureGrid& grid)
{
  auto require = [&](const char* key) -> const nlohmann::json& {
    if (!doc.contains(key)) throw ConfigError(std::string("tabulated space: missing field '") + key + "'");
    return doc.at(key);
  };
  try {
    if (doc.contains("format") && doc.at("format").get<std::string>() != kTabulatedFormat)
      throw ConfigError("tabulated space: unsupported format '" + doc.at("format").get<std::string>() + "'");
    const Manifold manifold = Manifold::from_name(require("manifold").get<std::string>());
    if (!(manifold == grid.manifold()))
      throw ConfigError("tabulated space: manifold does not match the active grid");
    const auto shape = require("grid").get<std::vector<int>>();
    if (shape != grid.shape())
      throw ConfigError("tabulated space: node count does not match the active grid");
    const int count = require("basis_count").get<int>();
    if (count < 1) throw ConfigError("tabulated space: basis_count must be positive");
    const auto gram_flat = require("gram").get<std::vector<double>>();
    if (static_cast<int>(gram_flat.size()) != count * count)
      throw ConfigError("tabulated space: gram must hold basis_count^2 numbers");
    const auto& nodes = require("nodes");
    if (!nodes.is_array() || static_cast<Eigen::Index>(nodes.size()) != grid.size())
      throw ConfigError("tabulated space: node count does not match the active grid");

    const int n = grid.dim();
    Eigen::MatrixXd values(count, grid.size());
    Eigen::MatrixXd gradients(count * n, grid.size());
    for (Eigen::Index node = 0; node < grid.size(); ++node) {
      const auto& entry = nodes.at(static_cast<std::size_t>(node));
      if (!entry.contains("values") || !entry.contains("derivatives"))
        throw ConfigError("tabulated space: node " + std::to_string(node) + " lacks values or derivatives");
      const auto v = entry.at("values").get<std::vector<double>>();
      const auto d = entry.at("derivatives").get<std::vector<double>>();
      if (static_cast<int>(v.size()) != count)
        throw ConfigError("tabulated space: node " + std::to_string(node) + " has the wrong number of values");
      if (static_cast<int>(d.size()) != count * n)
        throw ConfigError("tabulated space: node " + std::to_string(node) + " is missing derivative columns");
      for (int b = 0; b < count; ++b) values(b, node) = v[static_cast<std::size_t>(b)];
      for (int r = 0; r < count * n; ++r) gradients(r, node) = d[static_cast<std::size_t>(r)];
    }
    Eigen::MatrixXd gram(count, count);
    for (int i = 0; i < count; ++i)
      for (int j = 0; j < count; ++j) gram(i, j) = gram_flat[static_cast<std::size_t>(i * count + j)];

    auto basis = std::make_shared<const TabulatedBasis>(grid, std::move(values), std::move(gradients));
    const double mismatch = detail::tabulated_derivative_mismatch(*basis);
    FunctionSpace space(basis, std::move(gram));
    if (mismatch > 1e-3) {
      std::ostringstream msg;
      msg << "tabulated derivatives disagree with grid finite differences (relative error " << mismatch << ")";
      space.warnings().push_back(msg.str());
    }
    return space;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("tabulated space: ") + e.what());
  }
}

inline FunctionSpace load_tabulated_space(const std::string& path, const QuadratureGrid& grid)
{
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open tabulated space file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("tabulated space file '" + path + "': " + e.what());
  }
  return tabulated_space_from_json(doc, grid);
}

// Tabulates the raw basis of `space` on `grid`.
inline nlohmann::json tabulated_space_to_json(const FunctionSpace& space, const QuadratureGrid& grid)
{
  const int count = space.size();
  const int n = grid.dim();
  nlohmann::json doc;
  doc["format"] = kTabulatedFormat;
  doc["manifold"] = grid.manifold().name();
  doc["grid"] = grid.shape();
  doc["basis_count"] = count;
  std::vector<double> gram;
  for (int i = 0; i < count; ++i)
    for (int j = 0; j < count; ++j) gram.push_back(space.gram()(i, j));
  doc["gram"] = gram;
  nlohmann::json nodes = nlohmann::json::array();
  for (Eigen::Index node = 0; node < grid.size(); ++node) {
    const Jet jet = space.raw_jet(grid.coordinates().col(node));
    std::vector<double> values(jet.value.data(), jet.value.data() + count);
    std::vector<double> derivatives;
    for (int b = 0; b < count; ++b)
      for (int d = 0; d < n; ++d) derivatives.push_back(jet.gradient(d, b));
    nodes.push_back({{"values", values}, {"derivatives", derivatives}});
  }
  doc["nodes"] = std::move(nodes);
  return doc;
}

inline void write_tabulated_space(const FunctionSpace& space, const QuadratureGrid& grid, const std::string& path)
{
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write tabulated space file '" + path + "'");
  out << std::setprecision(17) << tabulated_space_to_json(space, grid).dump() << '\n';
}

}  // namespace banach
