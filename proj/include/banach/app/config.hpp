#pragma once

// Run configuration. One JSON object; unknown keys are rejected at every
// level before anything is computed. See README.md for the full schema.

#include "banach/error.hpp"
#include "banach/function_space.hpp"
#include "banach/function_space_io.hpp"
#include "banach/manifold.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace banach::app {

using nlohmann::json;

struct SpaceConfig
{
  std::string type = "trig";  // trig | tabulated
  std::vector<int> degrees;
  bool include_constant = true;
  std::string inner_product = "normalized_l2";
  std::string path;  // tabulated only, relative to the config file
};

struct MonteCarloConfig
{
  long trials = 2000;
  std::uint64_t seed = 1;
  std::vector<int> scan_resolution;
  double refine_tol = 1e-10;
};

struct GeneratorConfig
{
  std::string name;
  std::string kind;  // space | ball | segment | ellipsoid | combine
  int space = 0;
  double radius = 1.0;
  std::vector<double> axis;
  std::vector<std::vector<double>> matrix;
  std::vector<std::pair<double, int>> terms;  // (coefficient, earlier generator)
};

struct RingConfig
{
  std::vector<GeneratorConfig> generators;
  double kernel_tol = 1e-8;
};

struct DensityTerm
{
  double coefficient = 1.0;
  std::vector<int> monomial;
};

struct FrameConfig
{
  long node = 0;
  std::vector<std::vector<double>> vectors;
};

struct DensityConfig
{
  std::vector<DensityTerm> terms;
  std::vector<FrameConfig> frames;
  bool integrate = false;
};

struct TableConfig
{
  std::vector<int> degrees;
  bool include_constant = true;
  std::string inner_product = "normalized_l2";
};

struct VerifyConfig
{
  double scale = 1.0;
  std::vector<std::pair<int, int>> mc_pairs = {{1, 1}, {2, 3}, {3, 3}};
  std::vector<int> determinism_threads = {1, 4, 16};
};

struct RunConfig
{
  std::string manifold = "circle";
  std::vector<int> quadrature;  // empty: 1024 on the circle, 128 x 128 on the torus
  int directions = 720;
  std::vector<SpaceConfig> spaces;
  MonteCarloConfig monte_carlo;
  std::optional<std::vector<std::pair<double, double>>> subdomain;
  RingConfig ring;
  DensityConfig density;
  std::optional<TableConfig> table;
  VerifyConfig verify;
  std::map<std::string, double> tolerances;
  int threads = 1;
  std::string output = "out";
  std::filesystem::path base_dir = ".";
  json document = json::object();  // effective configuration, hashed into reports
};

inline const std::map<std::string, double>& default_tolerances()
{
  static const std::map<std::string, double> defaults = {
    {"circle_mc_sigma", 3.0},      {"circle_mc_runtime_s", 60.0}, {"shape_spread", 1e-6},
    {"factorization_rel", 1e-6},  {"factorization_sigma", 3.0}, {"bridge_rel", 1e-8},
    {"polarization_rel", 1e-10},  {"disk_square_abs", 1e-4},    {"ring_tol_factor", 10.0},
    {"density_rel", 1e-10},       {"support_width_rel", 1e-14}, {"segment_det_rel", 1e-10},
  };
  return defaults;
}

namespace detail {

inline void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed)
{
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
T read(const json& obj, const char* key, const std::string& where, T fallback)
{
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + std::string(key) + "' in " + where + " has the wrong type");
  }
}

inline void require_positive(double v, const std::string& what)
{
  if (!(v > 0.0)) throw ConfigError(what + " must be positive");
}

inline SpaceConfig parse_space(const json& j, const std::string& where)
{
  reject_unknown(j, where, {"type", "degrees", "degree", "constant", "inner_product", "path"});
  SpaceConfig s;
  s.type = read<std::string>(j, "type", where, "trig");
  if (s.type == "trig") {
    if (j.contains("path")) throw ConfigError(where + ": 'path' only applies to tabulated spaces");
    if (j.contains("degree") && j.contains("degrees")) throw ConfigError(where + ": give 'degree' or 'degrees', not both");
    if (j.contains("degree")) s.degrees = {read<int>(j, "degree", where, 0)};
    else if (j.contains("degrees")) s.degrees = read<std::vector<int>>(j, "degrees", where, {});
    else throw ConfigError(where + ": trig space needs 'degree' or 'degrees'");
    for (int d : s.degrees)
      if (d < 0) throw ConfigError(where + ": degrees must be non-negative");
    s.include_constant = read<bool>(j, "constant", where, true);
    s.inner_product = read<std::string>(j, "inner_product", where, "normalized_l2");
    try {
      inner_product_from_name(s.inner_product);
    } catch (const Error& e) {
      throw ConfigError(where + ": " + e.what());
    }
  } else if (s.type == "tabulated") {
    for (const char* k : {"degree", "degrees", "constant", "inner_product"})
      if (j.contains(k)) throw ConfigError(where + ": '" + std::string(k) + "' does not apply to tabulated spaces");
    s.path = read<std::string>(j, "path", where, "");
    if (s.path.empty()) throw ConfigError(where + ": tabulated space needs 'path'");
  } else {
    throw ConfigError(where + ": unknown space type '" + s.type + "'");
  }
  return s;
}

inline GeneratorConfig parse_generator(const json& j, const std::string& where, int index)
{
  reject_unknown(j, where, {"name", "space", "ball", "segment", "ellipsoid", "combine"});
  GeneratorConfig g;
  g.name = read<std::string>(j, "name", where, "B" + std::to_string(index + 1));
  int kinds = 0;
  for (const char* k : {"space", "ball", "segment", "ellipsoid", "combine"})
    if (j.contains(k)) {
      g.kind = k;
      ++kinds;
    }
  if (kinds != 1) throw ConfigError(where + " needs exactly one of space, ball, segment, ellipsoid, combine");
  if (g.kind == "space") g.space = read<int>(j, "space", where, 0);
  if (g.kind == "ball") g.radius = read<double>(j, "ball", where, 1.0);
  if (g.kind == "segment") g.axis = read<std::vector<double>>(j, "segment", where, {});
  if (g.kind == "ellipsoid") g.matrix = read<std::vector<std::vector<double>>>(j, "ellipsoid", where, {});
  if (g.kind == "combine") {
    const auto raw = read<std::vector<std::pair<double, int>>>(j, "combine", where, {});
    if (raw.empty()) throw ConfigError(where + ": combine needs at least one [coefficient, generator] pair");
    for (const auto& [c, idx] : raw) {
      if (idx < 0 || idx >= index) throw ConfigError(where + ": combine may only refer to earlier generators");
      if (!(c >= 0.0)) throw ConfigError(where + ": combine coefficients must be non-negative");
    }
    g.terms = raw;
  }
  return g;
}

}  // namespace detail

inline RunConfig parse_config(const json& doc, std::filesystem::path base_dir = ".")
{
  using namespace detail;
  reject_unknown(doc, "config", {"manifold", "quadrature", "directions", "spaces", "monte_carlo", "subdomain",
                                 "ring", "density", "table", "verify", "tolerances", "threads", "output"});
  RunConfig c;
  c.base_dir = std::move(base_dir);
  c.document = doc;
  c.manifold = read<std::string>(doc, "manifold", "config", "circle");
  if (c.manifold != "circle" && c.manifold != "torus2")
    throw ConfigError("manifold must be 'circle' or 'torus2'");
  const int n = c.manifold == "circle" ? 1 : 2;

  if (doc.contains("quadrature")) {
    const json& q = doc.at("quadrature");
    if (q.is_number_integer()) c.quadrature.assign(static_cast<std::size_t>(n), q.get<int>());
    else c.quadrature = read<std::vector<int>>(doc, "quadrature", "config", {});
    if (static_cast<int>(c.quadrature.size()) != n) throw ConfigError("quadrature needs one entry per coordinate");
    for (int q1 : c.quadrature)
      if (q1 < 4) throw ConfigError("quadrature needs at least 4 nodes per coordinate");
  }
  c.directions = read<int>(doc, "directions", "config", 720);
  if (c.directions < 8) throw ConfigError("directions must be at least 8");
  c.threads = read<int>(doc, "threads", "config", 1);
  if (c.threads < 1) throw ConfigError("threads must be at least 1");
  c.output = read<std::string>(doc, "output", "config", "out");

  if (doc.contains("spaces")) {
    const json& arr = doc.at("spaces");
    if (!arr.is_array()) throw ConfigError("spaces must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      SpaceConfig s = parse_space(arr[i], "spaces[" + std::to_string(i) + "]");
      if (s.type == "trig" && static_cast<int>(s.degrees.size()) == 1 && n == 2) s.degrees.push_back(s.degrees[0]);
      if (s.type == "trig" && static_cast<int>(s.degrees.size()) != n)
        throw ConfigError("spaces[" + std::to_string(i) + "]: degrees need one entry per coordinate");
      c.spaces.push_back(std::move(s));
    }
  }

  if (doc.contains("monte_carlo")) {
    const json& mc = doc.at("monte_carlo");
    reject_unknown(mc, "monte_carlo", {"trials", "seed", "scan_resolution", "refine_tol"});
    c.monte_carlo.trials = read<long>(mc, "trials", "monte_carlo", 2000);
    if (c.monte_carlo.trials < 1) throw ConfigError("monte_carlo.trials must be at least 1");
    c.monte_carlo.seed = read<std::uint64_t>(mc, "seed", "monte_carlo", 1);
    c.monte_carlo.scan_resolution = read<std::vector<int>>(mc, "scan_resolution", "monte_carlo", {});
    if (!c.monte_carlo.scan_resolution.empty() && static_cast<int>(c.monte_carlo.scan_resolution.size()) != n)
      throw ConfigError("monte_carlo.scan_resolution needs one entry per coordinate");
    for (int r : c.monte_carlo.scan_resolution)
      if (r < 8) throw ConfigError("monte_carlo.scan_resolution entries must be at least 8");
    c.monte_carlo.refine_tol = read<double>(mc, "refine_tol", "monte_carlo", 1e-10);
    require_positive(c.monte_carlo.refine_tol, "monte_carlo.refine_tol");
  }

  if (doc.contains("subdomain")) {
    auto box = read<std::vector<std::pair<double, double>>>(doc, "subdomain", "config", {});
    if (static_cast<int>(box.size()) != n) throw ConfigError("subdomain needs one [lo, hi] interval per coordinate");
    try {
      SubdomainBox{box}.validate(Manifold::from_name(c.manifold));
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("subdomain: ") + e.what());
    }
    c.subdomain = box;
  }

  if (doc.contains("ring")) {
    const json& r = doc.at("ring");
    reject_unknown(r, "ring", {"generators", "kernel_tol"});
    c.ring.kernel_tol = read<double>(r, "kernel_tol", "ring", 1e-8);
    require_positive(c.ring.kernel_tol, "ring.kernel_tol");
    if (r.contains("generators")) {
      const json& gens = r.at("generators");
      if (!gens.is_array()) throw ConfigError("ring.generators must be an array");
      for (std::size_t i = 0; i < gens.size(); ++i)
        c.ring.generators.push_back(
          parse_generator(gens[i], "ring.generators[" + std::to_string(i) + "]", static_cast<int>(i)));
    }
    for (const auto& g : c.ring.generators)
      if (g.kind == "space" && (g.space < 0 || g.space >= static_cast<int>(c.spaces.size())))
        throw ConfigError("ring generator '" + g.name + "' refers to a missing space");
  }

  if (doc.contains("density")) {
    const json& d = doc.at("density");
    reject_unknown(d, "density", {"terms", "frames", "integrate"});
    c.density.integrate = read<bool>(d, "integrate", "density", false);
    if (d.contains("terms")) {
      if (!d.at("terms").is_array()) throw ConfigError("density.terms must be an array");
      for (const auto& t : d.at("terms")) {
        reject_unknown(t, "density.terms[]", {"coefficient", "monomial"});
        DensityTerm term;
        term.coefficient = read<double>(t, "coefficient", "density.terms[]", 1.0);
        term.monomial = read<std::vector<int>>(t, "monomial", "density.terms[]", {});
        if (term.monomial.empty()) throw ConfigError("density terms need a non-empty monomial");
        c.density.terms.push_back(std::move(term));
      }
    }
    if (d.contains("frames")) {
      if (!d.at("frames").is_array()) throw ConfigError("density.frames must be an array");
      for (const auto& f : d.at("frames")) {
        reject_unknown(f, "density.frames[]", {"node", "vectors"});
        FrameConfig frame;
        frame.node = read<long>(f, "node", "density.frames[]", 0);
        frame.vectors = read<std::vector<std::vector<double>>>(f, "vectors", "density.frames[]", {});
        c.density.frames.push_back(std::move(frame));
      }
    }
  }

  if (doc.contains("table")) {
    const json& t = doc.at("table");
    reject_unknown(t, "table", {"degrees", "constant", "inner_product"});
    TableConfig table;
    table.degrees = read<std::vector<int>>(t, "degrees", "table", {1, 2, 3, 4, 5});
    table.include_constant = read<bool>(t, "constant", "table", true);
    table.inner_product = read<std::string>(t, "inner_product", "table", "normalized_l2");
    try {
      inner_product_from_name(table.inner_product);
    } catch (const Error& e) {
      throw ConfigError(std::string("table: ") + e.what());
    }
    c.table = table;
  }

  if (doc.contains("verify")) {
    const json& v = doc.at("verify");
    reject_unknown(v, "verify", {"scale", "mc_pairs", "determinism_threads"});
    c.verify.scale = read<double>(v, "scale", "verify", 1.0);
    require_positive(c.verify.scale, "verify.scale");
    c.verify.mc_pairs = read<std::vector<std::pair<int, int>>>(v, "mc_pairs", "verify", c.verify.mc_pairs);
    c.verify.determinism_threads =
      read<std::vector<int>>(v, "determinism_threads", "verify", c.verify.determinism_threads);
  }

  if (doc.contains("tolerances")) {
    const json& t = doc.at("tolerances");
    if (!t.is_object()) throw ConfigError("tolerances must be an object");
    for (const auto& [key, value] : t.items()) {
      if (!default_tolerances().count(key)) throw ConfigError("unknown tolerance '" + key + "'");
      if (!value.is_number()) throw ConfigError("tolerance '" + key + "' must be a number");
      c.tolerances[key] = value.get<double>();
      require_positive(c.tolerances[key], "tolerance '" + key + "'");
    }
  }
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(doc, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

// Command-line overrides are folded into the hashed document as well.
inline void apply_overrides(RunConfig& c, std::optional<int> threads, std::optional<std::uint64_t> seed,
                            std::optional<std::string> out, std::optional<double> tol_scale)
{
  if (threads) {
    if (*threads < 1) throw ConfigError("--threads must be at least 1");
    c.threads = *threads;
  }
  if (seed) {
    c.monte_carlo.seed = *seed;
    c.document["monte_carlo"]["seed"] = *seed;
  }
  if (out) c.output = *out;
  if (tol_scale) {
    if (!(*tol_scale > 0.0)) throw ConfigError("--tol-scale must be positive");
    for (const auto& [key, value] : default_tolerances()) {
      if (key == "circle_mc_runtime_s") continue;
      const double base = c.tolerances.count(key) ? c.tolerances[key] : value;
      c.tolerances[key] = base * *tol_scale;
      c.document["tolerances"][key] = c.tolerances[key];
    }
  }
}

inline double tolerance(const RunConfig& c, const std::string& key)
{
  auto it = c.tolerances.find(key);
  return it != c.tolerances.end() ? it->second : default_tolerances().at(key);
}

inline Manifold manifold_of(const RunConfig& c) { return Manifold::from_name(c.manifold); }

inline QuadratureGrid grid_of(const RunConfig& c)
{
  const Manifold m = manifold_of(c);
  if (!c.quadrature.empty()) return build_grid(m, c.quadrature);
  return m.dim() == 1 ? build_grid(m, 1024) : build_grid(m, 128);
}

inline GeometryOptions geometry_of(const RunConfig& c) { return GeometryOptions{c.directions, false}; }

inline FunctionSpace build_space(const RunConfig& c, const SpaceConfig& s, const QuadratureGrid& grid)
{
  if (s.type == "trig")
    return FunctionSpace::trig(manifold_of(c), s.degrees, s.include_constant, inner_product_from_name(s.inner_product));
  std::filesystem::path p(s.path);
  if (p.is_relative()) p = c.base_dir / p;
  return load_tabulated_space(p.string(), grid);
}

inline std::vector<FunctionSpace> build_spaces(const RunConfig& c, const QuadratureGrid& grid)
{
  std::vector<FunctionSpace> out;
  for (const auto& s : c.spaces) out.push_back(build_space(c, s, grid));
  return out;
}

}  // namespace banach::app
