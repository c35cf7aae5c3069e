#pragma once

// Scenario configuration: INI text with [section] headers, key = value
// lines, and ';' or '#' comments. Every key is range-checked and unknown
// sections or keys are errors.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "twofluid/closures.hpp"
#include "twofluid/error.hpp"
#include "twofluid/hyperbolicity.hpp"
#include "twofluid/potential.hpp"
#include "twofluid/profile.hpp"
#include "twofluid/solver.hpp"
#include "twofluid/verify/manufactured.hpp"

namespace twofluid::cli {

namespace pt = boost::property_tree;

// ---------------------------------------------------------------------------
// Value parsing

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::optional<double> to_number(std::string_view s) {
  const std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  const char* first = t.data();
  if (*first == '+') ++first;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

/// Closed-form profile with an optional isothermal entropy marker.
struct ProfileSpec {
  Profile profile;
  /// Set for s = isothermal(theta): the entropy follows the density.
  std::optional<double> isothermal_theta;
  std::string text;
};

/// Parses "1.5", "step(x0, left, right)", "sine(mean, amp, n[, phase])",
/// "gauss(base, amp, center, width)", "linear(slope[, intercept])" and, when
/// allowed, "isothermal(theta)". Sine profiles have n periods over [x_lo, x_hi].
inline ProfileSpec parse_profile(const std::string& key, const std::string& value, double x_lo, double x_hi,
                                 bool allow_isothermal) {
  ProfileSpec spec;
  spec.text = trim(value);
  if (auto c = to_number(spec.text)) {
    if (!std::isfinite(*c)) throw ConfigError(fmt::format("{} must be finite", key));
    spec.profile = Profile::constant(*c);
    return spec;
  }
  const auto open = spec.text.find('(');
  if (open == std::string::npos || spec.text.back() != ')') {
    throw ConfigError(fmt::format("{}: '{}' is neither a number nor a profile like sine(mean, amp, n)", key,
                                  spec.text));
  }
  const std::string name = trim(std::string_view(spec.text).substr(0, open));
  std::vector<double> args;
  for (const std::string& a : split_list(std::string_view(spec.text).substr(open + 1, spec.text.size() - open - 2))) {
    const auto v = to_number(a);
    if (!v || !std::isfinite(*v)) throw ConfigError(fmt::format("{}: argument '{}' of {} is not a number", key, a, name));
    args.push_back(*v);
  }
  auto arity = [&](std::size_t lo, std::size_t hi, const char* usage) {
    if (args.size() < lo || args.size() > hi) throw ConfigError(fmt::format("{}: expected {}", key, usage));
  };
  try {
    if (name == "step") {
      arity(3, 3, "step(x0, left, right)");
      spec.profile = Profile::step(args[0], args[1], args[2]);
    } else if (name == "sine") {
      arity(3, 4, "sine(mean, amp, n[, phase])");
      spec.profile = periodic_sine(args[0], args[1], args[2], x_lo, x_hi, args.size() > 3 ? args[3] : 0.0);
    } else if (name == "gauss") {
      arity(4, 4, "gauss(base, amp, center, width)");
      spec.profile = Profile::gauss(args[0], args[1], args[2], args[3]);
    } else if (name == "linear") {
      arity(1, 2, "linear(slope[, intercept])");
      spec.profile = Profile::linear(args[0], args.size() > 1 ? args[1] : 0.0);
    } else if (name == "isothermal" && allow_isothermal) {
      arity(1, 1, "isothermal(theta)");
      if (!(args[0] > 0.0)) throw ConfigError(fmt::format("{}: isothermal temperature must be positive", key));
      spec.isothermal_theta = args[0];
    } else {
      throw ConfigError(fmt::format("{}: unknown profile '{}'", key, name));
    }
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("{}: {}", key, e.what()));
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Section access with consumed-key tracking

class Section {
 public:
  Section(const pt::ptree* node, std::string name) : node_(node), name_(std::move(name)) {}

  bool present() const { return node_ != nullptr; }
  const std::string& name() const { return name_; }

  std::optional<std::string> raw(const std::string& key) {
    used_.insert(key);
    if (!node_) return std::nullopt;
    const auto it = node_->find(key);
    if (it == node_->not_found()) return std::nullopt;
    return trim(it->second.data());
  }

  double number(const std::string& key, double fallback) {
    const auto r = raw(key);
    if (!r) return fallback;
    const auto v = to_number(*r);
    if (!v || !std::isfinite(*v)) throw ConfigError(fmt::format("{}: '{}' is not a finite number", key, *r));
    return *v;
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    const auto r = raw(key);
    if (!r) return fallback;
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(r->data(), r->data() + r->size(), v);
    if (ec != std::errc() || ptr != r->data() + r->size()) {
      throw ConfigError(fmt::format("{}: '{}' is not an integer", key, *r));
    }
    return v;
  }

  std::string text(const std::string& key, const std::string& fallback) { return raw(key).value_or(fallback); }

  bool boolean(const std::string& key, bool fallback) {
    const auto r = raw(key);
    if (!r) return fallback;
    if (*r == "true" || *r == "1" || *r == "yes") return true;
    if (*r == "false" || *r == "0" || *r == "no") return false;
    throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, *r));
  }

  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) {
    const auto r = raw(key);
    if (!r) return fallback;
    std::vector<double> out;
    for (const std::string& item : split_list(*r)) {
      const auto v = to_number(item);
      if (!v || !std::isfinite(*v)) throw ConfigError(fmt::format("{}: '{}' is not a finite number", key, item));
      out.push_back(*v);
    }
    return out;
  }

  /// Throws on keys that were never asked for.
  void finish() const {
    if (!node_) return;
    for (const auto& [key, child] : *node_) {
      if (!used_.count(key)) throw ConfigError(fmt::format("unknown key '{}' in [{}]", key, name_));
      if (!child.empty()) throw ConfigError(fmt::format("key '{}' in [{}] has nested values", key, name_));
    }
  }

 private:
  const pt::ptree* node_;
  std::string name_;
  std::set<std::string> used_;
};

// Range checks; messages name the key.
inline void require_gt(const std::string& key, double v, double bound, const char* what = nullptr) {
  if (!(v > bound)) {
    throw ConfigError(what ? fmt::format("{} must {} (got {})", key, what, v)
                           : fmt::format("{} must exceed {} (got {})", key, bound, v));
  }
}
inline void require_ge(const std::string& key, double v, double bound) {
  if (!(v >= bound)) throw ConfigError(fmt::format("{} must be >= {} (got {})", key, bound, v));
}
inline void require_in(const std::string& key, double v, double lo, double hi) {
  if (!(v > lo && v <= hi)) throw ConfigError(fmt::format("{} must lie in ({}, {}] (got {})", key, lo, hi, v));
}

// ---------------------------------------------------------------------------
// Scenario

struct PotentialSection {
  std::string law = "separable_added_mass";
  std::array<PhaseParams, kPhases> phases{};
  double a = 0.0;

  SeparableAddedMass make_law() const { return SeparableAddedMass(phases, a); }
};

struct InitialSection {
  std::array<ProfileSpec, kPhases> rho;
  std::array<ProfileSpec, kPhases> u;
  std::array<ProfileSpec, kPhases> s;
  /// Relative amplitude of seeded uniform noise on the densities.
  double noise = 0.0;
};

struct RunSection {
  double cfl = 0.45;
  double t_end = 0.0;
  double output_interval = 0.0;
  double theta0 = 1.0;
  SpeedMethod speeds = SpeedMethod::kClosedForm;
  std::int64_t max_steps = 10'000'000;
};

struct AxisRange {
  double lo = 0.0;
  double hi = 0.0;
  int count = 1;
  std::vector<double> values() const { return linspace(lo, hi, count); }
};

struct MapSection {
  AxisRange rho1{0.5, 2.0, 10};
  AxisRange rho2{0.5, 2.0, 10};
  AxisRange w{0.0, 2.0, 10};
  PhasePair s{0.0, 0.0};
  /// Also bisect w* for every density pair.
  bool critical = false;
  double critical_w_max = 10.0;
  int critical_points = 200;
  double critical_tol = 1e-6;
};

struct VerifySection {
  int field_sets = 20;
  int points = 16;
  std::vector<double> steps{1e-2, 5e-3, 2.5e-3};
  verify::TrigFieldRanges ranges{};
  /// Minimum Richardson ratio reported as passing.
  double min_ratio = 3.6;
};

struct FickSection {
  std::vector<double> sample_times{0.002, 0.003, 0.004};
  double theta_bound = 0.01;
  double max_residual = 0.05;
};

struct ReduceSection {
  ProfileSpec rho;
  ProfileSpec u;
  ProfileSpec omega;
  double s = 0.0;
  double t_end = 0.15;
  std::vector<int> cells{200, 400, 800};
  int reference_cells = 6400;
  double min_order = 0.8;
};

struct ScenarioConfig {
  PotentialSection potential;
  ClosureParams closures;
  Grid1D grid;
  InitialSection initial;
  std::array<ProfileSpec, kPhases> omega;
  RunSection run;
  MapSection map;
  VerifySection verify;
  FickSection fick;
  ReduceSection reduce;

  /// Sections present in the text.
  std::vector<std::string> sections;

  ExternalPotentials external() const { return ExternalPotentials{{omega[0].profile, omega[1].profile}}; }
};

inline const std::array<std::string, 10>& known_sections() {
  static const std::array<std::string, 10> names{"potential", "closures", "grid",   "initial", "external",
                                                 "run",       "map",      "verify", "fick",    "reduce"};
  return names;
}

namespace detail {

/// '#' starts a comment anywhere on a line; ini_parser only knows full-line ';'.
inline std::string strip_hash_comments(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    out << line << '\n';
  }
  return out.str();
}

inline ProfileSpec constant_spec(double c) { return ProfileSpec{Profile::constant(c), std::nullopt, fmt::format("{}", c)}; }

inline AxisRange axis(Section& sec, const std::string& key, const AxisRange& fallback, double min_value) {
  const auto r = sec.raw(key);
  if (!r) return fallback;
  const std::vector<std::string> parts = split_list(*r);
  if (parts.size() != 3) throw ConfigError(fmt::format("{}: expected 'lo, hi, count'", key));
  AxisRange out;
  const auto lo = to_number(parts[0]), hi = to_number(parts[1]), count = to_number(parts[2]);
  if (!lo || !hi || !count || !std::isfinite(*lo) || !std::isfinite(*hi)) {
    throw ConfigError(fmt::format("{}: '{}' is not 'lo, hi, count'", key, *r));
  }
  if (!(*count >= 1.0) || *count != std::floor(*count) || *count > 1e6) {
    throw ConfigError(fmt::format("{}: count must be a positive integer", key));
  }
  out = AxisRange{*lo, *hi, static_cast<int>(*count)};
  if (!(out.hi >= out.lo)) throw ConfigError(fmt::format("{}: hi must be >= lo", key));
  if (!(out.lo >= min_value)) throw ConfigError(fmt::format("{}: lo must be >= {}", key, min_value));
  return out;
}

inline int bounded_int(Section& sec, const std::string& key, int fallback, int lo, int hi) {
  const std::int64_t v = sec.integer(key, fallback);
  if (v < lo || v > hi) throw ConfigError(fmt::format("{} must lie in [{}, {}] (got {})", key, lo, hi, v));
  return static_cast<int>(v);
}

}  // namespace detail

inline ScenarioConfig parse_config(const std::string& text) {
  const std::string stripped = detail::strip_hash_comments(text);
  pt::ptree tree;
  try {
    std::istringstream in(stripped);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("syntax error on line {}: {}", e.line(), e.message()));
  }

  auto require_known = [](const std::string& name) {
    bool known = false;
    for (const std::string& k : known_sections()) known = known || k == name;
    if (!known) throw ConfigError(fmt::format("unknown section [{}]", name));
  };
  ScenarioConfig cfg;
  for (const auto& [name, node] : tree) {
    if (node.empty() && !node.data().empty()) {
      throw ConfigError(fmt::format("key '{}' appears outside any section", name));
    }
    require_known(name);
    cfg.sections.push_back(name);
  }
  // The ini reader drops sections without keys; their headers still have to
  // name a known section.
  {
    std::istringstream in(stripped);
    std::string line;
    while (std::getline(in, line)) {
      const std::string t = trim(line);
      if (t.size() >= 2 && t.front() == '[' && t.back() == ']') require_known(trim(std::string_view(t).substr(1, t.size() - 2)));
    }
  }
  auto section = [&tree](const std::string& name) {
    const auto it = tree.find(name);
    return Section(it == tree.not_found() ? nullptr : &it->second, name);
  };

  {
    Section sec = section("potential");
    PotentialSection& p = cfg.potential;
    p.law = sec.text("law", p.law);
    if (p.law != "separable_added_mass") {
      throw ConfigError(fmt::format("law = '{}' is not known (only separable_added_mass)", p.law));
    }
    for (int a = 0; a < kPhases; ++a) {
      const std::string n = std::to_string(a + 1);
      PhaseParams& ph = p.phases[a];
      ph.gamma = sec.number("gamma" + n, ph.gamma);
      require_gt("gamma" + n, ph.gamma, 1.0);
      ph.cv = sec.number("cv" + n, ph.cv);
      require_gt("cv" + n, ph.cv, 0.0, "be positive");
      ph.K0 = sec.number("K" + n, ph.K0);
      require_gt("K" + n, ph.K0, 0.0, "be positive");
      ph.s0 = sec.number("s0" + n, ph.s0);
    }
    p.a = sec.number("a", p.a);
    require_ge("a", p.a, 0.0);
    sec.finish();
  }
  {
    Section sec = section("closures");
    cfg.closures.k = sec.number("k", 0.0);
    require_ge("k", cfg.closures.k, 0.0);
    cfg.closures.kappa = sec.number("kappa", 0.0);
    require_ge("kappa", cfg.closures.kappa, 0.0);
    sec.finish();
  }
  {
    Section sec = section("grid");
    Grid1D& g = cfg.grid;
    g.x_lo = sec.number("x_lo", 0.0);
    g.x_hi = sec.number("x_hi", 1.0);
    if (!(g.x_hi > g.x_lo)) throw ConfigError(fmt::format("x_hi must exceed x_lo (got {} <= {})", g.x_hi, g.x_lo));
    g.cells = detail::bounded_int(sec, "cells", 100, 4, 10'000'000);
    const std::string b = sec.text("boundary", "periodic");
    if (b == "periodic") {
      g.boundary = Boundary::kPeriodic;
    } else if (b == "transmissive") {
      g.boundary = Boundary::kTransmissive;
    } else {
      throw ConfigError(fmt::format("boundary = '{}' must be periodic or transmissive", b));
    }
    sec.finish();
  }
  const double x_lo = cfg.grid.x_lo, x_hi = cfg.grid.x_hi;
  {
    Section sec = section("initial");
    for (int a = 0; a < kPhases; ++a) {
      const std::string n = std::to_string(a + 1);
      auto prof = [&](const std::string& key, double fallback, bool iso) {
        const auto r = sec.raw(key);
        return r ? parse_profile(key, *r, x_lo, x_hi, iso) : detail::constant_spec(fallback);
      };
      cfg.initial.rho[a] = prof("rho" + n, 1.0, false);
      cfg.initial.u[a] = prof("u" + n, 0.0, false);
      cfg.initial.s[a] = prof("s" + n, 0.0, true);
    }
    cfg.initial.noise = sec.number("noise", 0.0);
    if (!(cfg.initial.noise >= 0.0 && cfg.initial.noise < 1.0)) {
      throw ConfigError(fmt::format("noise must lie in [0, 1) (got {})", cfg.initial.noise));
    }
    sec.finish();
  }
  {
    Section sec = section("external");
    for (int a = 0; a < kPhases; ++a) {
      const std::string key = "omega" + std::to_string(a + 1);
      const auto r = sec.raw(key);
      cfg.omega[a] = r ? parse_profile(key, *r, x_lo, x_hi, false) : detail::constant_spec(0.0);
    }
    sec.finish();
  }
  {
    Section sec = section("run");
    RunSection& r = cfg.run;
    r.cfl = sec.number("cfl", r.cfl);
    require_in("cfl", r.cfl, 0.0, 0.9);
    r.t_end = sec.number("t_end", r.t_end);
    require_ge("t_end", r.t_end, 0.0);
    r.output_interval = sec.number("output_interval", r.output_interval);
    require_ge("output_interval", r.output_interval, 0.0);
    r.theta0 = sec.number("theta0", r.theta0);
    require_gt("theta0", r.theta0, 0.0, "be positive");
    const std::string speeds = sec.text("speeds", "closed_form");
    if (speeds == "closed_form") {
      r.speeds = SpeedMethod::kClosedForm;
    } else if (speeds == "finite_difference") {
      r.speeds = SpeedMethod::kFiniteDifference;
    } else {
      throw ConfigError(fmt::format("speeds = '{}' must be closed_form or finite_difference", speeds));
    }
    r.max_steps = sec.integer("max_steps", r.max_steps);
    if (r.max_steps < 1) throw ConfigError("max_steps must be >= 1");
    sec.finish();
  }
  {
    Section sec = section("map");
    MapSection& m = cfg.map;
    m.rho1 = detail::axis(sec, "rho1", m.rho1, kMinDensity);
    m.rho2 = detail::axis(sec, "rho2", m.rho2, kMinDensity);
    m.w = detail::axis(sec, "w", m.w, -1e300);
    m.s[0] = sec.number("s1", 0.0);
    m.s[1] = sec.number("s2", 0.0);
    m.critical = sec.boolean("critical", m.critical);
    m.critical_w_max = sec.number("critical_w_max", m.critical_w_max);
    require_gt("critical_w_max", m.critical_w_max, 0.0, "be positive");
    m.critical_points = detail::bounded_int(sec, "critical_points", m.critical_points, 1, 1'000'000);
    m.critical_tol = sec.number("critical_tol", m.critical_tol);
    require_gt("critical_tol", m.critical_tol, 0.0, "be positive");
    sec.finish();
  }
  {
    Section sec = section("verify");
    VerifySection& v = cfg.verify;
    v.field_sets = detail::bounded_int(sec, "field_sets", v.field_sets, 1, 1'000'000);
    v.points = detail::bounded_int(sec, "points", v.points, 1, 1'000'000);
    v.steps = sec.numbers("steps", v.steps);
    if (v.steps.size() < 2) throw ConfigError("steps needs at least two values");
    for (std::size_t i = 0; i < v.steps.size(); ++i) {
      require_gt("steps", v.steps[i], 0.0, "be positive");
      if (i > 0 && !(v.steps[i] < v.steps[i - 1])) throw ConfigError("steps must be strictly decreasing");
    }
    v.ranges.modes = detail::bounded_int(sec, "modes", v.ranges.modes, 1, 64);
    v.ranges.k_max = sec.number("k_max", v.ranges.k_max);
    require_gt("k_max", v.ranges.k_max, 0.0, "be positive");
    v.ranges.freq_max = sec.number("freq_max", v.ranges.freq_max);
    require_ge("freq_max", v.ranges.freq_max, 0.0);
    v.ranges.with_potentials = sec.boolean("potentials", v.ranges.with_potentials);
    v.min_ratio = sec.number("min_ratio", v.min_ratio);
    sec.finish();
  }
  {
    Section sec = section("fick");
    FickSection& f = cfg.fick;
    f.sample_times = sec.numbers("sample_times", f.sample_times);
    if (f.sample_times.empty()) throw ConfigError("sample_times needs at least one value");
    for (std::size_t i = 0; i < f.sample_times.size(); ++i) {
      require_gt("sample_times", f.sample_times[i], 0.0, "be positive");
      if (i > 0 && !(f.sample_times[i] > f.sample_times[i - 1])) {
        throw ConfigError("sample_times must be strictly increasing");
      }
    }
    f.theta_bound = sec.number("theta_bound", f.theta_bound);
    require_gt("theta_bound", f.theta_bound, 0.0, "be positive");
    f.max_residual = sec.number("max_residual", f.max_residual);
    require_gt("max_residual", f.max_residual, 0.0, "be positive");
    sec.finish();
  }
  {
    Section sec = section("reduce");
    ReduceSection& r = cfg.reduce;
    auto prof = [&](const std::string& key, double fallback) {
      const auto raw = sec.raw(key);
      return raw ? parse_profile(key, *raw, x_lo, x_hi, false) : detail::constant_spec(fallback);
    };
    r.rho = prof("rho", 1.0);
    r.u = prof("u", 0.0);
    r.omega = prof("omega", 0.0);
    r.s = sec.number("s", r.s);
    r.t_end = sec.number("t_end", r.t_end);
    require_ge("t_end", r.t_end, 0.0);
    r.cells.clear();
    for (double c : sec.numbers("cells", {200, 400, 800})) {
      if (!(c >= 4.0) || c != std::floor(c) || c > 1e7) throw ConfigError("cells must be integers >= 4");
      r.cells.push_back(static_cast<int>(c));
    }
    r.reference_cells = detail::bounded_int(sec, "reference_cells", r.reference_cells, 4, 10'000'000);
    for (int c : r.cells) {
      if (r.reference_cells % c != 0) {
        throw ConfigError(fmt::format("reference_cells = {} is not a multiple of {}", r.reference_cells, c));
      }
    }
    r.min_order = sec.number("min_order", r.min_order);
    sec.finish();
  }
  return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
}

}  // namespace twofluid::cli
