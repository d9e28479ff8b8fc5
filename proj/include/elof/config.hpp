#pragma once

// Run configuration: INI text (sections, `key = value`, `#` or `;` comments)
// parsed into a validated RunConfig, and serialized back losslessly.
//
//   T_end = 1.0                 # root level
//   [grid]    N, L
//   [frank]   k1, k2, k3, k4
//   [scheme]  dt | cfl, scheme, renormalize_every, dealias, diff, enforce_cfl
//   [initial] kind, b, amplitude, velocity_amplitude, mode_count, spectral_width, seed
//   [diag]    cadence, radii, center_stride, eps0
//   [output]  dir, snapshot_every

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "elof/errors.hpp"
#include "elof/frank_energy.hpp"
#include "elof/grid.hpp"
#include "elof/initial_data.hpp"
#include "elof/solver.hpp"

namespace elof {

struct GridConfig {
  int n = 32;
  double length = 2.0 * std::numbers::pi;
  friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

struct DiagConfig {
  int cadence = 10;                // steps between diagnostics rows
  std::vector<double> radii{1.0};  // ball radii; the first one feeds the per-row columns
  int center_stride = 2;
  double eps0 = 10.0;              // blow-up ceiling on the ball norm of (v, grad u)
  friend bool operator==(const DiagConfig&, const DiagConfig&) = default;
};

struct OutputConfig {
  std::string dir = "out";
  int snapshot_every = 0;  // steps; 0 writes only the final snapshot
  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct RunConfig {
  GridConfig grid;
  FrankConstants frank = FrankConstants::equal();
  SchemeConfig scheme;
  InitialSpec initial;
  std::optional<double> velocity_amplitude;  // defaults to initial.amplitude
  DiagConfig diag;
  OutputConfig output;
  double t_end = 1.0;

  Grid make_grid() const { return Grid(grid.n, grid.length); }
  InitialSpec velocity_spec() const {
    InitialSpec s = initial;
    if (velocity_amplitude) s.amplitude = *velocity_amplitude;
    return s;
  }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema{
      {"", {"T_end"}},
      {"grid", {"N", "L"}},
      {"frank", {"k1", "k2", "k3", "k4"}},
      {"scheme", {"dt", "cfl", "scheme", "renormalize_every", "dealias", "diff", "enforce_cfl"}},
      {"initial", {"kind", "b", "amplitude", "velocity_amplitude", "mode_count", "spectral_width", "seed"}},
      {"diag", {"cadence", "radii", "center_stride", "eps0"}},
      {"output", {"dir", "snapshot_every"}},
  };
  return schema;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double x = 0.0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || end != t.data() + t.size() || t.empty())
    throw ValidationError(key, "expected a number, got '" + text + "'");
  return x;
}

template <class Int>
Int to_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  Int x = 0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || end != t.data() + t.size() || t.empty())
    throw ValidationError(key, "expected an integer, got '" + text + "'");
  return x;
}

inline bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ValidationError(key, "expected true or false, got '" + text + "'");
}

inline std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
  return out;
}

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_list(const double* x, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? ", " : "") + format_double(x[i]);
  return s;
}

/// Rethrows std::invalid_argument from a module validator as ValidationError.
template <class F>
void validated(const std::string& key, F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(key, e.what());
  } catch (const BallTooLarge& e) {
    throw ValidationError(key, e.what());
  }
}

}  // namespace detail

/// Checks every cross-module invariant; throws ValidationError.
inline void validate(const RunConfig& c) {
  detail::validated("grid", [&] { (void)c.make_grid(); });
  detail::validated("scheme", [&] { c.scheme.validate(); });
  detail::validated("initial", [&] { c.initial.validate(); });
  if (c.velocity_amplitude && !(*c.velocity_amplitude >= 0.0 && std::isfinite(*c.velocity_amplitude)))
    throw ValidationError("initial.velocity_amplitude", "must be >= 0");
  if (c.diag.cadence < 1) throw ValidationError("diag.cadence", "must be >= 1");
  if (c.diag.center_stride < 1) throw ValidationError("diag.center_stride", "must be >= 1");
  if (!(c.diag.eps0 > 0.0)) throw ValidationError("diag.eps0", "must be positive");
  if (c.diag.radii.empty()) throw ValidationError("diag.radii", "needs at least one radius");
  for (double r : c.diag.radii) detail::validated("diag.radii", [&] { require_ball_fits(c.make_grid(), r); });
  if (c.output.dir.empty()) throw ValidationError("output.dir", "must not be empty");
  if (c.output.snapshot_every < 0) throw ValidationError("output.snapshot_every", "must be >= 0");
  if (!(c.t_end > 0.0 && std::isfinite(c.t_end))) throw ValidationError("T_end", "must be positive");
}

/// Parses configuration text; omitted keys keep the RunConfig defaults.
inline RunConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::string stripped;
  {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      // trailing comments need a blank before the marker
      const auto cut = line.find_first_of("#;");
      if (cut != std::string::npos && cut > 0 && (line[cut - 1] == ' ' || line[cut - 1] == '\t'))
        line.erase(cut);
      stripped += line + "\n";
    }
  }
  std::istringstream in(stripped);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.line(), e.message());
  }

  const auto& schema = detail::config_schema();
  std::map<std::string, std::string> kv;  // "section.key" or "key"
  for (const auto& [name, node] : tree) {
    if (node.empty() && schema.count(name) && node.data().empty()) continue;  // empty section
    if (node.empty()) {
      if (!schema.at("").count(name)) throw ValidationError(name, "unknown key");
      kv[name] = node.data();
      continue;
    }
    const auto sec = schema.find(name);
    if (sec == schema.end() || name.empty()) throw ValidationError(name, "unknown section");
    for (const auto& [key, leaf] : node) {
      if (!sec->second.count(key)) throw ValidationError(name + "." + key, "unknown key");
      kv[name + "." + key] = leaf.data();
    }
  }
  auto get = [&kv](const std::string& key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    return it == kv.end() ? std::nullopt : std::optional(it->second);
  };
  using detail::to_double;

  RunConfig c;
  if (auto x = get("T_end")) c.t_end = to_double("T_end", *x);
  if (auto x = get("grid.N")) c.grid.n = detail::to_integer<int>("grid.N", *x);
  if (auto x = get("grid.L")) c.grid.length = to_double("grid.L", *x);

  double k[4] = {1.0, 1.0, 1.0, 0.0};
  for (int i = 0; i < 4; ++i) {
    const std::string key = "frank.k" + std::to_string(i + 1);
    if (auto x = get(key)) k[i] = to_double(key, *x);
  }
  try {
    c.frank = validate_constants(k[0], k[1], k[2], k[3]);
  } catch (const EricksenViolation& e) {
    throw ValidationError("frank", e.what());
  }

  if (auto x = get("scheme.dt")) c.scheme.dt = to_double("scheme.dt", *x);
  if (auto x = get("scheme.cfl")) c.scheme.cfl = to_double("scheme.cfl", *x);
  if (auto x = get("scheme.scheme")) {
    const auto s = parse_scheme(detail::trim(*x));
    if (!s) throw ValidationError("scheme.scheme", "unknown scheme '" + *x + "'");
    c.scheme.scheme = *s;
  }
  if (auto x = get("scheme.renormalize_every"))
    c.scheme.renormalize_every = detail::to_integer<int>("scheme.renormalize_every", *x);
  if (auto x = get("scheme.dealias")) c.scheme.dealias = detail::to_bool("scheme.dealias", *x);
  if (auto x = get("scheme.enforce_cfl")) c.scheme.enforce_cfl = detail::to_bool("scheme.enforce_cfl", *x);
  if (auto x = get("scheme.diff")) {
    const std::string d = detail::trim(*x);
    if (d == "spectral") c.scheme.diff = DiffMode::spectral;
    else if (d == "finite_difference") c.scheme.diff = DiffMode::finite_difference;
    else throw ValidationError("scheme.diff", "expected spectral or finite_difference");
  }

  if (auto x = get("initial.kind")) {
    const auto kind = parse_initial_kind(detail::trim(*x));
    if (!kind) throw ValidationError("initial.kind", "unknown kind '" + *x + "'");
    c.initial.kind = *kind;
  }
  if (auto x = get("initial.b")) {
    const auto b = detail::to_list("initial.b", *x);
    if (b.size() != 3) throw ValidationError("initial.b", "expected three components");
    c.initial.b = {b[0], b[1], b[2]};
  }
  if (auto x = get("initial.amplitude")) c.initial.amplitude = to_double("initial.amplitude", *x);
  if (auto x = get("initial.velocity_amplitude"))
    c.velocity_amplitude = to_double("initial.velocity_amplitude", *x);
  if (auto x = get("initial.mode_count")) c.initial.mode_count = detail::to_integer<int>("initial.mode_count", *x);
  if (auto x = get("initial.spectral_width"))
    c.initial.spectral_width = to_double("initial.spectral_width", *x);
  if (auto x = get("initial.seed")) c.initial.seed = detail::to_integer<std::uint64_t>("initial.seed", *x);

  if (auto x = get("diag.cadence")) c.diag.cadence = detail::to_integer<int>("diag.cadence", *x);
  if (auto x = get("diag.radii")) c.diag.radii = detail::to_list("diag.radii", *x);
  if (auto x = get("diag.center_stride")) c.diag.center_stride = detail::to_integer<int>("diag.center_stride", *x);
  if (auto x = get("diag.eps0")) c.diag.eps0 = to_double("diag.eps0", *x);

  if (auto x = get("output.dir")) c.output.dir = detail::trim(*x);
  if (auto x = get("output.snapshot_every"))
    c.output.snapshot_every = detail::to_integer<int>("output.snapshot_every", *x);

  validate(c);
  return c;
}

/// Writes every key; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const RunConfig& c) {
  using detail::format_double;
  std::ostringstream o;
  o << "T_end = " << format_double(c.t_end) << "\n\n";
  o << "[grid]\nN = " << c.grid.n << "\nL = " << format_double(c.grid.length) << "\n\n";
  o << "[frank]\nk1 = " << format_double(c.frank.k1()) << "\nk2 = " << format_double(c.frank.k2())
    << "\nk3 = " << format_double(c.frank.k3()) << "\nk4 = " << format_double(c.frank.k4()) << "\n\n";
  o << "[scheme]\n";
  if (c.scheme.dt) o << "dt = " << format_double(*c.scheme.dt) << "\n";
  o << "cfl = " << format_double(c.scheme.cfl) << "\nscheme = " << scheme_name(c.scheme.scheme)
    << "\nrenormalize_every = " << c.scheme.renormalize_every
    << "\ndealias = " << (c.scheme.dealias ? "true" : "false")
    << "\ndiff = " << (c.scheme.diff == DiffMode::spectral ? "spectral" : "finite_difference")
    << "\nenforce_cfl = " << (c.scheme.enforce_cfl ? "true" : "false") << "\n\n";
  o << "[initial]\nkind = " << initial_kind_name(c.initial.kind)
    << "\nb = " << detail::format_list(c.initial.b.data(), 3)
    << "\namplitude = " << format_double(c.initial.amplitude) << "\n";
  if (c.velocity_amplitude) o << "velocity_amplitude = " << format_double(*c.velocity_amplitude) << "\n";
  o << "mode_count = " << c.initial.mode_count << "\nspectral_width = " << format_double(c.initial.spectral_width)
    << "\nseed = " << c.initial.seed << "\n\n";
  o << "[diag]\ncadence = " << c.diag.cadence
    << "\nradii = " << detail::format_list(c.diag.radii.data(), c.diag.radii.size())
    << "\ncenter_stride = " << c.diag.center_stride << "\neps0 = " << format_double(c.diag.eps0) << "\n\n";
  o << "[output]\ndir = " << c.output.dir << "\nsnapshot_every = " << c.output.snapshot_every << "\n";
  return o.str();
}

}  // namespace elof
