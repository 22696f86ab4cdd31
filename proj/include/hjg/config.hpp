#ifndef HJG_CONFIG_HPP
#define HJG_CONFIG_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hjg/errors.hpp"
#include "hjg/grid.hpp"
#include "hjg/numerics.hpp"
#include "hjg/problem.hpp"
#include "hjg/solver.hpp"

namespace hjg {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Inline problems: every function is a polynomial, or the max of several.

/// coef * t^t_pow * prod x_i^x[i] * prod a_j^a[j] * prod b_k^b[k].
/// Missing exponent lists mean all zeros.
struct Monomial {
  double coef = 0.0;
  std::vector<int> x, a, b;
  int t = 0;

  bool operator==(const Monomial&) const = default;

  double eval(double tt, std::span<const double> xs, std::span<const double> as,
              std::span<const double> bs) const {
    double v = coef;
    if (t) v *= std::pow(tt, t);
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i]) v *= std::pow(xs[i], x[i]);
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i]) v *= std::pow(as[i], a[i]);
    for (std::size_t i = 0; i < b.size(); ++i)
      if (b[i]) v *= std::pow(bs[i], b[i]);
    return v;
  }
};

using Polynomial = std::vector<Monomial>;

/// max over pieces; a single piece is a plain polynomial.
struct PiecewiseMax {
  std::vector<Polynomial> pieces;

  bool operator==(const PiecewiseMax&) const = default;

  double eval(double t, std::span<const double> x, std::span<const double> a, std::span<const double> b) const {
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& p : pieces) {
      double s = 0.0;
      for (const auto& m : p) s += m.eval(t, x, a, b);
      v = std::max(v, s);
    }
    return v;
  }
};

struct InlineProblem {
  std::string name = "inline";
  std::size_t state_dim = 0;
  ControlBox controls_a;
  ControlBox controls_b;
  double horizon = 1.0;
  std::vector<Polynomial> dynamics;  // one per state component
  PiecewiseMax stage_cost;
  PiecewiseMax terminal_cost;  // may depend on x and t only
  PiecewiseMax constraint;     // may depend on x and t only

  bool operator==(const InlineProblem&) const = default;

  bool depends_on_time() const {
    auto any_t = [](const Polynomial& p) {
      return std::any_of(p.begin(), p.end(), [](const Monomial& m) { return m.t != 0; });
    };
    for (const auto& p : dynamics)
      if (any_t(p)) return true;
    for (const auto* f : {&stage_cost, &terminal_cost, &constraint})
      for (const auto& p : f->pieces)
        if (any_t(p)) return true;
    return false;
  }
};

inline ProblemSpec to_problem(const InlineProblem& ip) {
  ProblemSpec spec;
  spec.name = ip.name;
  spec.state_dim = ip.state_dim;
  spec.controls_a = ip.controls_a;
  spec.controls_b = ip.controls_b;
  spec.horizon = ip.horizon;
  spec.time_invariant = !ip.depends_on_time();
  spec.dynamics = [dyn = ip.dynamics](double t, std::span<const double> x, std::span<const double> a,
                                      std::span<const double> b, std::span<double> out) {
    for (std::size_t i = 0; i < dyn.size(); ++i) {
      double s = 0.0;
      for (const auto& m : dyn[i]) s += m.eval(t, x, a, b);
      out[i] = s;
    }
  };
  spec.stage_cost = [f = ip.stage_cost](double t, std::span<const double> x, std::span<const double> a,
                                        std::span<const double> b) { return f.eval(t, x, a, b); };
  spec.terminal_cost = [f = ip.terminal_cost](double t, std::span<const double> x) { return f.eval(t, x, {}, {}); };
  spec.constraint = [f = ip.constraint](double t, std::span<const double> x) { return f.eval(t, x, {}, {}); };
  return spec;
}

// ---------------------------------------------------------------------------
// Run configuration

struct GridConfig {
  std::vector<Axis> state_axes;
  Axis z_axis;

  bool operator==(const GridConfig&) const = default;
};

struct OutputConfig {
  std::string value_function;  // empty: the CLI flag decides

  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  std::variant<std::string, InlineProblem> problem = std::string("toy1d");
  std::optional<GridConfig> grid;
  EquationVariant variant = EquationVariant::P1TimeVarying;
  PlayerMode mode = PlayerMode::Upper;
  SchemeOptions scheme;
  std::size_t stamps = 201;
  OutputConfig output;

  bool operator==(const RunConfig&) const = default;
};

/// Grid used by built-ins when the config omits one.
inline GridConfig default_grid(const std::string& builtin) {
  if (builtin == "water2d") return {{{0.0, 16.0, 81}, {0.5, 5.5, 81}}, {0.0, 18.0, 81}};
  if (builtin == "toy1d") return {{{-3.0, 3.0, 31}}, {0.0, 8.0, 31}};
  if (builtin == "frozen1d") return {{{-1.0, 1.0, 11}}, {-1.0, 1.0, 11}};
  if (builtin == "frozen2d") return {{{-1.0, 1.0, 11}, {-1.0, 1.0, 11}}, {-1.0, 1.0, 11}};
  throw ConfigError("problem: unknown built-in '" + builtin + "'");
}

inline ProblemSpec resolve_problem(const RunConfig& cfg) {
  if (const auto* name = std::get_if<std::string>(&cfg.problem)) return builtin_problem(*name);
  return to_problem(std::get<InlineProblem>(cfg.problem));
}

inline GridConfig resolve_grid_config(const RunConfig& cfg) {
  if (cfg.grid) return *cfg.grid;
  if (const auto* name = std::get_if<std::string>(&cfg.problem)) return default_grid(*name);
  throw ConfigError("grid: required for inline problems");
}

inline Grid resolve_grid(const RunConfig& cfg) {
  const GridConfig g = resolve_grid_config(cfg);
  return build_grid(g.state_axes, g.z_axis, required_ghost_width(cfg.scheme.derivative_order));
}

// ---------------------------------------------------------------------------
// Enum names

inline const char* to_string(DerivativeOrder d) { return d == DerivativeOrder::WENO5 ? "WENO5" : "Upwind1"; }
inline const char* to_string(Integrator i) { return i == Integrator::TVDRK3 ? "TVDRK3" : "Euler"; }

template <class E>
E parse_enum(const std::string& s, std::initializer_list<E> options, const std::string& path) {
  std::string allowed;
  for (E e : options) {
    if (s == to_string(e)) return e;
    allowed += (allowed.empty() ? "" : ", ") + std::string(to_string(e));
  }
  throw ConfigError(path + ": '" + s + "' is not one of " + allowed);
}

inline EquationVariant parse_variant(const std::string& s, const std::string& path = "variant") {
  return parse_enum(s,
                    {EquationVariant::P1TimeVarying, EquationVariant::P1TimeInvariant, EquationVariant::P2TimeVarying,
                     EquationVariant::P2TimeInvariant},
                    path);
}

inline PlayerMode parse_mode(const std::string& s, const std::string& path = "mode") {
  return parse_enum(s, {PlayerMode::Upper, PlayerMode::Lower, PlayerMode::OptCtrl}, path);
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

class Reader {
 public:
  static void expect_object(const Json& j, const std::string& path, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    for (const auto& [k, v] : j.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
        throw ConfigError(join(path, k) + ": unknown key");
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
  static std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

  static const Json& required(const Json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) throw ConfigError(join(path, key) + ": required");
    return j.at(key);
  }

  static double number(const Json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(path + ": must be finite");
    return v;
  }

  static long long integer(const Json& j, const std::string& path, long long lo, long long hi) {
    const double v = number(j, path);
    if (v != std::floor(v)) throw ConfigError(path + ": expected an integer");
    if (v < static_cast<double>(lo) || v > static_cast<double>(hi))
      throw ConfigError(path + ": must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<long long>(v);
  }

  static std::string string(const Json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path + ": expected a string");
    return j.get<std::string>();
  }

  static bool boolean(const Json& j, const std::string& path) {
    if (!j.is_boolean()) throw ConfigError(path + ": expected true or false");
    return j.get<bool>();
  }

  static const Json& array(const Json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path + ": expected an array");
    return j;
  }

  static std::vector<double> numbers(const Json& j, const std::string& path) {
    std::vector<double> out;
    for (std::size_t i = 0; i < array(j, path).size(); ++i) out.push_back(number(j[i], index(path, i)));
    return out;
  }

  static std::vector<int> powers(const Json& j, const std::string& path, std::size_t len) {
    std::vector<int> out;
    for (std::size_t i = 0; i < array(j, path).size(); ++i)
      out.push_back(static_cast<int>(integer(j[i], index(path, i), 0, 16)));
    if (out.size() != len) throw ConfigError(path + ": expected " + std::to_string(len) + " exponents");
    return out;
  }
};

inline Axis parse_axis(const Json& j, const std::string& path) {
  Reader::expect_object(j, path, {"min", "max", "count"});
  Axis ax;
  ax.min = Reader::number(Reader::required(j, path, "min"), path + ".min");
  ax.max = Reader::number(Reader::required(j, path, "max"), path + ".max");
  ax.count = static_cast<std::size_t>(Reader::integer(Reader::required(j, path, "count"), path + ".count", 0, 1 << 20));
  if (ax.count < 2) throw ConfigError(path + ".count: must be at least 2");
  if (!(ax.max > ax.min)) throw ConfigError(path + ".max: must exceed min");
  return ax;
}

inline GridConfig parse_grid(const Json& j, const std::string& path) {
  Reader::expect_object(j, path, {"state_axes", "z_axis"});
  GridConfig g;
  const std::string sp = path + ".state_axes";
  const Json& axes = Reader::array(Reader::required(j, path, "state_axes"), sp);
  if (axes.empty()) throw ConfigError(sp + ": at least one axis required");
  for (std::size_t i = 0; i < axes.size(); ++i) g.state_axes.push_back(parse_axis(axes[i], Reader::index(sp, i)));
  g.z_axis = parse_axis(Reader::required(j, path, "z_axis"), path + ".z_axis");
  return g;
}

inline SchemeOptions parse_scheme(const Json& j, const std::string& path) {
  Reader::expect_object(j, path, {"derivative_order", "integrator", "cfl", "lattice_a", "lattice_b", "safety"});
  SchemeOptions s;
  if (j.contains("derivative_order"))
    s.derivative_order = parse_enum(Reader::string(j["derivative_order"], path + ".derivative_order"),
                                    {DerivativeOrder::Upwind1, DerivativeOrder::WENO5}, path + ".derivative_order");
  if (j.contains("integrator"))
    s.integrator = parse_enum(Reader::string(j["integrator"], path + ".integrator"),
                              {Integrator::Euler, Integrator::TVDRK3}, path + ".integrator");
  if (j.contains("cfl")) s.cfl = Reader::number(j["cfl"], path + ".cfl");
  if (j.contains("lattice_a")) s.lattice_a = static_cast<int>(Reader::integer(j["lattice_a"], path + ".lattice_a", 2, 1001));
  if (j.contains("lattice_b")) s.lattice_b = static_cast<int>(Reader::integer(j["lattice_b"], path + ".lattice_b", 2, 1001));
  if (j.contains("safety")) s.safety = Reader::number(j["safety"], path + ".safety");
  if (!(s.cfl > 0.0 && s.cfl <= 1.0)) throw ConfigError(path + ".cfl: must lie in (0, 1]");
  if (!(s.safety >= 1.0)) throw ConfigError(path + ".safety: must be at least 1");
  return s;
}

struct Dims {
  std::size_t n, ma, mb;
};

inline Monomial parse_monomial(const Json& j, const std::string& path, const Dims& d, bool state_only) {
  Reader::expect_object(j, path, {"coef", "x", "a", "b", "t"});
  Monomial m;
  m.coef = Reader::number(Reader::required(j, path, "coef"), path + ".coef");
  if (j.contains("x")) m.x = Reader::powers(j["x"], path + ".x", d.n);
  if (j.contains("a")) {
    if (state_only) throw ConfigError(path + ".a: controls are not allowed here");
    m.a = Reader::powers(j["a"], path + ".a", d.ma);
  }
  if (j.contains("b")) {
    if (state_only) throw ConfigError(path + ".b: controls are not allowed here");
    m.b = Reader::powers(j["b"], path + ".b", d.mb);
  }
  if (j.contains("t")) m.t = static_cast<int>(Reader::integer(j["t"], path + ".t", 0, 16));
  return m;
}

inline Polynomial parse_polynomial(const Json& j, const std::string& path, const Dims& d, bool state_only) {
  Polynomial p;
  for (std::size_t i = 0; i < Reader::array(j, path).size(); ++i)
    p.push_back(parse_monomial(j[i], Reader::index(path, i), d, state_only));
  return p;
}

inline PiecewiseMax parse_piecewise(const Json& j, const std::string& path, const Dims& d, bool state_only) {
  PiecewiseMax f;
  if (j.is_object()) {
    Reader::expect_object(j, path, {"max_of"});
    const std::string mp = path + ".max_of";
    const Json& pieces = Reader::array(Reader::required(j, path, "max_of"), mp);
    if (pieces.empty()) throw ConfigError(mp + ": at least one piece required");
    for (std::size_t i = 0; i < pieces.size(); ++i)
      f.pieces.push_back(parse_polynomial(pieces[i], Reader::index(mp, i), d, state_only));
  } else {
    f.pieces.push_back(parse_polynomial(j, path, d, state_only));
  }
  return f;
}

inline ControlBox parse_box(const Json& j, const std::string& path) {
  Reader::expect_object(j, path, {"lower", "upper"});
  ControlBox box{Reader::numbers(Reader::required(j, path, "lower"), path + ".lower"),
                 Reader::numbers(Reader::required(j, path, "upper"), path + ".upper")};
  box.validate(path);
  return box;
}

inline InlineProblem parse_inline(const Json& j, const std::string& path) {
  Reader::expect_object(j, path,
                        {"name", "state_dim", "controls_a", "controls_b", "horizon", "dynamics", "stage_cost",
                         "terminal_cost", "constraint"});
  InlineProblem ip;
  if (j.contains("name")) ip.name = Reader::string(j["name"], path + ".name");
  ip.state_dim = static_cast<std::size_t>(
      Reader::integer(Reader::required(j, path, "state_dim"), path + ".state_dim", 1, static_cast<long long>(kMaxStateDim)));
  ip.controls_a = parse_box(Reader::required(j, path, "controls_a"), path + ".controls_a");
  ip.controls_b = parse_box(Reader::required(j, path, "controls_b"), path + ".controls_b");
  if (j.contains("horizon")) ip.horizon = Reader::number(j["horizon"], path + ".horizon");
  if (!(ip.horizon > 0.0)) throw ConfigError(path + ".horizon: must be positive");
  const Dims d{ip.state_dim, ip.controls_a.dim(), ip.controls_b.dim()};
  const std::string dp = path + ".dynamics";
  const Json& dyn = Reader::array(Reader::required(j, path, "dynamics"), dp);
  if (dyn.size() != ip.state_dim) throw ConfigError(dp + ": expected one polynomial per state component");
  for (std::size_t i = 0; i < dyn.size(); ++i)
    ip.dynamics.push_back(parse_polynomial(dyn[i], Reader::index(dp, i), d, false));
  ip.stage_cost = parse_piecewise(Reader::required(j, path, "stage_cost"), path + ".stage_cost", d, false);
  ip.terminal_cost = parse_piecewise(Reader::required(j, path, "terminal_cost"), path + ".terminal_cost", d, true);
  ip.constraint = parse_piecewise(Reader::required(j, path, "constraint"), path + ".constraint", d, true);
  return ip;
}

}  // namespace detail

/// Validates and converts a JSON document. Every error names the offending
/// field path and is raised before any computation starts.
inline RunConfig parse_run_config(const Json& j) {
  using detail::Reader;
  Reader::expect_object(j, "config", {"problem", "grid", "variant", "mode", "scheme", "stamps", "output"});
  RunConfig cfg;
  const Json& pj = Reader::required(j, "", "problem");
  if (pj.is_string()) {
    const std::string name = pj.get<std::string>();
    default_grid(name);  // rejects unknown names
    cfg.problem = name;
  } else {
    cfg.problem = detail::parse_inline(pj, "problem");
  }
  if (j.contains("grid")) cfg.grid = detail::parse_grid(j["grid"], "grid");
  if (j.contains("variant")) cfg.variant = parse_variant(Reader::string(j["variant"], "variant"));
  if (j.contains("mode")) cfg.mode = parse_mode(Reader::string(j["mode"], "mode"));
  if (j.contains("scheme")) cfg.scheme = detail::parse_scheme(j["scheme"], "scheme");
  if (j.contains("stamps")) cfg.stamps = static_cast<std::size_t>(Reader::integer(j["stamps"], "stamps", 2, 100000));
  if (j.contains("output")) {
    Reader::expect_object(j["output"], "output", {"value_function"});
    if (j["output"].contains("value_function"))
      cfg.output.value_function = Reader::string(j["output"]["value_function"], "output.value_function");
  }

  // Cross-field checks.
  const std::size_t n = std::visit(
      [](const auto& p) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, std::string>)
          return builtin_problem(p).state_dim;
        else
          return p.state_dim;
      },
      cfg.problem);
  const GridConfig g = resolve_grid_config(cfg);
  if (g.state_axes.size() != n)
    throw ConfigError("grid.state_axes: expected " + std::to_string(n) + " axes for this problem");
  if (is_time_invariant_form(cfg.variant) && !resolve_problem(cfg).time_invariant)
    throw ConfigError("variant: time-invariant form requires a problem without explicit time dependence");
  return cfg;
}

inline RunConfig parse_run_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_run_config(j);
}

// ---------------------------------------------------------------------------
// Emitting

namespace detail {

inline Json axis_json(const Axis& a) { return {{"min", a.min}, {"max", a.max}, {"count", a.count}}; }

inline Json polynomial_json(const Polynomial& p) {
  Json arr = Json::array();
  for (const auto& m : p) {
    Json o{{"coef", m.coef}};
    if (!m.x.empty()) o["x"] = m.x;
    if (!m.a.empty()) o["a"] = m.a;
    if (!m.b.empty()) o["b"] = m.b;
    if (m.t) o["t"] = m.t;
    arr.push_back(std::move(o));
  }
  return arr;
}

inline Json piecewise_json(const PiecewiseMax& f) {
  if (f.pieces.size() == 1) return polynomial_json(f.pieces.front());
  Json pieces = Json::array();
  for (const auto& p : f.pieces) pieces.push_back(polynomial_json(p));
  return {{"max_of", pieces}};
}

}  // namespace detail

inline Json to_json(const RunConfig& cfg) {
  Json j;
  if (const auto* name = std::get_if<std::string>(&cfg.problem)) {
    j["problem"] = *name;
  } else {
    const auto& ip = std::get<InlineProblem>(cfg.problem);
    Json dyn = Json::array();
    for (const auto& p : ip.dynamics) dyn.push_back(detail::polynomial_json(p));
    j["problem"] = {{"name", ip.name},
                    {"state_dim", ip.state_dim},
                    {"controls_a", {{"lower", ip.controls_a.lower}, {"upper", ip.controls_a.upper}}},
                    {"controls_b", {{"lower", ip.controls_b.lower}, {"upper", ip.controls_b.upper}}},
                    {"horizon", ip.horizon},
                    {"dynamics", dyn},
                    {"stage_cost", detail::piecewise_json(ip.stage_cost)},
                    {"terminal_cost", detail::piecewise_json(ip.terminal_cost)},
                    {"constraint", detail::piecewise_json(ip.constraint)}};
  }
  if (cfg.grid) {
    Json axes = Json::array();
    for (const auto& a : cfg.grid->state_axes) axes.push_back(detail::axis_json(a));
    j["grid"] = {{"state_axes", axes}, {"z_axis", detail::axis_json(cfg.grid->z_axis)}};
  }
  j["variant"] = to_string(cfg.variant);
  j["mode"] = to_string(cfg.mode);
  j["scheme"] = {{"derivative_order", to_string(cfg.scheme.derivative_order)},
                 {"integrator", to_string(cfg.scheme.integrator)},
                 {"cfl", cfg.scheme.cfl},
                 {"lattice_a", cfg.scheme.lattice_a},
                 {"lattice_b", cfg.scheme.lattice_b},
                 {"safety", cfg.scheme.safety}};
  j["stamps"] = cfg.stamps;
  if (!cfg.output.value_function.empty()) j["output"] = {{"value_function", cfg.output.value_function}};
  return j;
}

}  // namespace hjg

#endif  // HJG_CONFIG_HPP
