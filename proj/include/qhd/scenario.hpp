#pragma once

// Scenario description and its text format.
//
// A scenario file is a sequence of lines. Blank lines and lines whose first
// non-blank character is '#' are ignored. `name = ...` must come before the
// first section header; every other key belongs to a section:
//
//   name = paper-k1
//
//   [grid]      x_min, x_max, n
//   [params]    hbar, m, k, potential (harmonic | uniform | free | tabulated),
//               D (harmonic), g (uniform), values (tabulated, space separated)
//   [solver]    dt (number or auto), rho_floor, boundary (extrapolate-velocity),
//               damping (linear), tol_norm, allow_large_dt (true | false)
//   [initial]   shape (gaussian-at-rest), center, and exactly one of
//               a (density ~ exp(-a (x - center)^2)) or variance (a = 1/(2 variance))
//   [run]       t_end, snapshot_every, outputs (space separated)
//
// Keys may appear at most once. Omitted keys take the defaults of the
// corresponding structs; x_min, x_max, n, t_end, snapshot_every and the
// initial center and width are required.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "qhd/core.hpp"
#include "qhd/hydro_solver.hpp"

namespace qhd {

enum class Output { Density, Current, L2Distance, Liapunov, LiapunovRate, Energy, Norm, SobolevDistance };

inline const std::vector<std::pair<Output, std::string_view>>& output_names() {
  static const std::vector<std::pair<Output, std::string_view>> names = {
      {Output::Density, "density"},          {Output::Current, "current"},
      {Output::L2Distance, "l2_distance"},   {Output::Liapunov, "liapunov"},
      {Output::LiapunovRate, "liapunov_rate"}, {Output::Energy, "energy"},
      {Output::Norm, "norm"},                {Output::SobolevDistance, "sobolev_distance"},
  };
  return names;
}

inline std::string_view to_string(Output o) {
  for (const auto& [k, v] : output_names())
    if (k == o) return v;
  return "?";
}

inline std::optional<Output> parse_output(std::string_view s) {
  for (const auto& [k, v] : output_names())
    if (v == s) return k;
  return std::nullopt;
}

/// Gaussian at rest: rho ~ exp(-a (x - center)^2), v = 0, normalized on the grid.
struct InitialSpec {
  double center = 0.0;
  double a = 1.0;
  /// The file gave the width as a variance; kept for the run manifest only.
  bool given_as_variance = false;

  friend bool operator==(const InitialSpec& l, const InitialSpec& r) {
    return l.center == r.center && l.a == r.a;
  }
};

inline HydroState make_initial(const InitialSpec& spec, const Grid1D& grid) {
  if (!(spec.a > 0.0)) throw ContractViolation("initial state: a must be > 0");
  HydroState h;
  h.rho = grid.sample([&](double x) { return std::exp(-spec.a * (x - spec.center) * (x - spec.center)); });
  normalize(h.rho, grid);
  h.v.assign(grid.n(), 0.0);
  return h;
}

struct Scenario {
  std::string name;
  Grid1D grid{-20.0, 20.0, 801};
  Params params;
  SolverConfig solver;
  InitialSpec initial;
  double t_end = 0.0;
  double snapshot_every = 0.0;
  std::vector<Output> outputs;

  friend bool operator==(const Scenario& l, const Scenario& r) {
    const auto& a = l.solver;
    const auto& b = r.solver;
    return l.name == r.name && l.grid == r.grid && l.params == r.params && a.dt == b.dt &&
           a.rho_floor == b.rho_floor && a.boundary == b.boundary && a.tol_norm == b.tol_norm &&
           a.allow_large_dt == b.allow_large_dt && a.damping.has_value() == b.damping.has_value() &&
           l.initial == r.initial && l.t_end == r.t_end && l.snapshot_every == r.snapshot_every &&
           l.outputs == r.outputs;
  }
};

/// Shortest decimal text that reads back as the same double.
inline std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace detail {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

inline std::vector<Token> split_words(std::string_view s, std::size_t column0) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back({s.substr(start, i - start), column0 + start});
  }
  return out;
}

class ScenarioParser {
public:
  Scenario parse(std::string_view text) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t end = std::min(text.find('\n', pos), text.size());
      std::string_view line = text.substr(pos, end - pos);
      ++line_no;
      pos = end + 1;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      handle_line(line, line_no);
      if (end == text.size()) break;
    }
    finish();
    return sc_;
  }

private:
  struct Entry {
    std::string_view value;
    std::size_t line;
    std::size_t column;
  };

  void handle_line(std::string_view line, std::size_t line_no) {
    const std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') return;
    if (line[first] == '[') {
      const std::size_t close = line.find(']', first);
      if (close == std::string_view::npos)
        throw ConfigError("unterminated section header", line_no, first + 1);
      const std::string_view name = trim(line.substr(first + 1, close - first - 1));
      if (name != "grid" && name != "params" && name != "solver" && name != "initial" && name != "run")
        throw ConfigError("unknown section [" + std::string(name) + "]", line_no, first + 2);
      const std::size_t rest = line.find_first_not_of(" \t", close + 1);
      if (rest != std::string_view::npos && line[rest] != '#')
        throw ConfigError("unexpected text after section header", line_no, rest + 1);
      section_ = std::string(name);
      return;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected key = value", line_no, first + 1);
    const std::string_view key = trim(line.substr(first, eq - first));
    if (key.empty()) throw ConfigError("missing key before '='", line_no, eq + 1);
    std::string_view value = line.substr(eq + 1);
    const std::size_t hash = value.find('#');
    if (hash != std::string_view::npos) value = value.substr(0, hash);
    const std::size_t vstart = value.find_first_not_of(" \t");
    const std::size_t vcol = eq + 2 + (vstart == std::string_view::npos ? 0 : vstart);
    value = trim(value);
    if (value.empty()) throw ConfigError("missing value for '" + std::string(key) + "'", line_no, eq + 2);

    const std::string full = section_.empty() ? std::string(key) : section_ + "." + std::string(key);
    if (!known(full))
      throw ConfigError("unknown key '" + std::string(key) + "'" +
                            (section_.empty() ? std::string(" outside any section")
                                              : " in [" + section_ + "]"),
                        line_no, first + 1);
    if (entries_.count(full))
      throw ConfigError("duplicate key '" + std::string(key) + "' (first set on line " +
                            std::to_string(entries_.at(full).line) + ")",
                        line_no, first + 1);
    entries_[full] = Entry{value, line_no, vcol};
  }

  static bool known(const std::string& k) {
    static const char* const keys[] = {
        "name",           "grid.x_min",     "grid.x_max",       "grid.n",
        "params.hbar",    "params.m",       "params.k",         "params.potential",
        "params.D",       "params.g",       "params.values",    "solver.dt",
        "solver.rho_floor", "solver.boundary", "solver.damping", "solver.tol_norm",
        "solver.allow_large_dt", "initial.shape", "initial.center", "initial.a",
        "initial.variance", "run.t_end",    "run.snapshot_every", "run.outputs"};
    for (const char* key : keys)
      if (k == key) return true;
    return false;
  }

  static std::string_view trim(std::string_view s) {
    const std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string_view::npos) return {};
    const std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
  }

  const Entry* find(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  const Entry& require(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) throw ConfigError("missing required key '" + key + "'");
    return *e;
  }

  static double number(std::string_view s, std::size_t line, std::size_t col) {
    double x = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    if (!s.empty() && s.front() == '+') ++b;
    const auto res = std::from_chars(b, e, x);
    if (res.ec != std::errc() || res.ptr != e || !std::isfinite(x))
      throw ConfigError("expected a finite number, got '" + std::string(s) + "'", line, col);
    return x;
  }

  static double number(const Entry& e) { return number(e.value, e.line, e.column); }

  static std::size_t count(const Entry& e) {
    std::size_t x = 0;
    const auto res = std::from_chars(e.value.data(), e.value.data() + e.value.size(), x);
    if (res.ec != std::errc() || res.ptr != e.value.data() + e.value.size())
      throw ConfigError("expected a non-negative integer, got '" + std::string(e.value) + "'",
                        e.line, e.column);
    return x;
  }

  static bool boolean(const Entry& e) {
    if (e.value == "true") return true;
    if (e.value == "false") return false;
    throw ConfigError("expected true or false, got '" + std::string(e.value) + "'", e.line, e.column);
  }

  double number_or(const std::string& key, double fallback) const {
    const Entry* e = find(key);
    return e ? number(*e) : fallback;
  }

  void reject(const std::string& key, const std::string& why) const {
    if (const Entry* e = find(key)) throw ConfigError(why, e->line, e->column);
  }

  void finish() {
    sc_.name = std::string(require("name").value);

    const Entry& n = require("grid.n");
    try {
      sc_.grid = Grid1D(number(require("grid.x_min")), number(require("grid.x_max")), count(n));
    } catch (const ContractViolation& err) {
      throw ConfigError(err.what(), n.line, n.column);
    }

    sc_.params.hbar = number_or("params.hbar", 1.0);
    sc_.params.m = number_or("params.m", 1.0);
    sc_.params.k = number_or("params.k", 0.0);
    const Entry* pot = find("params.potential");
    const std::string_view kind = pot ? pot->value : std::string_view("free");
    if (kind == "harmonic") {
      sc_.params.potential = HarmonicPotential{number(require("params.D"))};
    } else if (kind == "uniform") {
      sc_.params.potential = UniformPotential{number(require("params.g"))};
    } else if (kind == "free") {
      sc_.params.potential = FreePotential{};
    } else if (kind == "tabulated") {
      const Entry& e = require("params.values");
      TabulatedPotential t;
      for (const Token& tok : split_words(e.value, e.column))
        t.values.push_back(number(tok.text, e.line, tok.column));
      sc_.params.potential = std::move(t);
    } else {
      throw ConfigError("unknown potential '" + std::string(kind) + "'", pot->line, pot->column);
    }
    if (kind != "harmonic") reject("params.D", "D applies to the harmonic potential only");
    if (kind != "uniform") reject("params.g", "g applies to the uniform potential only");
    if (kind != "tabulated") reject("params.values", "values apply to the tabulated potential only");
    try {
      sc_.params.validate();
      evaluate_potential(sc_.params.potential, sc_.grid);
    } catch (const ContractViolation& err) {
      throw ConfigError(err.what(), pot ? pot->line : 0, pot ? pot->column : 0);
    }

    if (const Entry* e = find("solver.dt"); e && e->value != "auto") sc_.solver.dt = number(*e);
    sc_.solver.rho_floor = number_or("solver.rho_floor", kDefaultRhoFloor);
    if (const Entry* e = find("solver.boundary"); e && e->value != "extrapolate-velocity")
      throw ConfigError("unknown boundary rule '" + std::string(e->value) + "'", e->line, e->column);
    if (const Entry* e = find("solver.damping"); e && e->value != "linear")
      throw ConfigError("unknown damping law '" + std::string(e->value) + "'", e->line, e->column);
    sc_.solver.tol_norm = number_or("solver.tol_norm", kDefaultNormTolerance);
    if (const Entry* e = find("solver.allow_large_dt")) sc_.solver.allow_large_dt = boolean(*e);

    if (const Entry* e = find("initial.shape"); e && e->value != "gaussian-at-rest")
      throw ConfigError("unknown initial shape '" + std::string(e->value) + "'", e->line, e->column);
    sc_.initial.center = number(require("initial.center"));
    const Entry* a = find("initial.a");
    const Entry* var = find("initial.variance");
    if (a && var) throw ConfigError("give either a or variance, not both", var->line, var->column);
    if (!a && !var) throw ConfigError("missing required key 'initial.a' (or 'initial.variance')");
    const Entry& width = a ? *a : *var;
    const double w = number(width);
    if (!(w > 0.0)) throw ConfigError("initial width must be > 0", width.line, width.column);
    sc_.initial.a = a ? w : 1.0 / (2.0 * w);
    sc_.initial.given_as_variance = var != nullptr;

    const Entry& te = require("run.t_end");
    sc_.t_end = number(te);
    if (!(sc_.t_end > 0.0)) throw ConfigError("t_end must be > 0", te.line, te.column);
    const Entry& ev = require("run.snapshot_every");
    sc_.snapshot_every = number(ev);
    if (!(sc_.snapshot_every > 0.0))
      throw ConfigError("snapshot_every must be > 0", ev.line, ev.column);
    if (const Entry* e = find("run.outputs")) {
      for (const Token& tok : split_words(e->value, e->column)) {
        const auto o = parse_output(tok.text);
        if (!o) throw ConfigError("unknown output '" + std::string(tok.text) + "'", e->line, tok.column);
        sc_.outputs.push_back(*o);
      }
    }
  }

  Scenario sc_;
  std::string section_;
  std::map<std::string, Entry> entries_;
};

}  // namespace detail

/// Checks the cross-field invariants of a parsed or hand-built scenario.
inline void validate(const Scenario& sc) {
  if (sc.name.empty()) throw ConfigError("scenario name is empty");
  try {
    sc.params.validate();
    evaluate_potential(sc.params.potential, sc.grid);
    const double dt = resolve_dt(sc.solver, sc.grid, sc.params);
    if (!(sc.solver.rho_floor > 0.0)) throw ConfigError("rho_floor must be > 0");
    if (!(sc.solver.tol_norm > 0.0)) throw ConfigError("tol_norm must be > 0");
    if (!(sc.t_end > 0.0) || !(sc.snapshot_every > 0.0))
      throw ConfigError("t_end and snapshot_every must be > 0");
    if (!(sc.initial.a > 0.0)) throw ConfigError("initial width must be > 0");
    const double r = sc.t_end / sc.snapshot_every;
    if (std::abs(r - std::round(r)) * sc.snapshot_every > dt)
      throw ConfigError("snapshot_every does not divide t_end to within one step");
  } catch (const ContractViolation& err) {
    throw ConfigError(err.what());
  }
}

/// Parses scenario text; throws ConfigError carrying line and column.
inline Scenario parse_scenario(std::string_view text) {
  Scenario sc = detail::ScenarioParser().parse(text);
  validate(sc);
  return sc;
}

/// Text that parse_scenario() maps back to an equal scenario.
inline std::string emit_scenario(const Scenario& sc) {
  std::ostringstream os;
  auto num = [](double x) { return format_number(x); };
  os << "name = " << sc.name << "\n\n";
  os << "[grid]\n";
  os << "x_min = " << num(sc.grid.x_min()) << "\n";
  os << "x_max = " << num(sc.grid.x_max()) << "\n";
  os << "n = " << sc.grid.n() << "\n\n";

  os << "[params]\n";
  os << "hbar = " << num(sc.params.hbar) << "\n";
  os << "m = " << num(sc.params.m) << "\n";
  os << "k = " << num(sc.params.k) << "\n";
  if (const auto* h = std::get_if<HarmonicPotential>(&sc.params.potential)) {
    os << "potential = harmonic\nD = " << num(h->stiffness) << "\n";
  } else if (const auto* u = std::get_if<UniformPotential>(&sc.params.potential)) {
    os << "potential = uniform\ng = " << num(u->force) << "\n";
  } else if (const auto* t = std::get_if<TabulatedPotential>(&sc.params.potential)) {
    os << "potential = tabulated\nvalues =";
    for (double v : t->values) os << ' ' << num(v);
    os << "\n";
  } else {
    os << "potential = free\n";
  }
  os << "\n[solver]\n";
  os << "dt = " << (sc.solver.dt ? num(*sc.solver.dt) : std::string("auto")) << "\n";
  os << "rho_floor = " << num(sc.solver.rho_floor) << "\n";
  os << "boundary = extrapolate-velocity\n";
  os << "damping = linear\n";
  os << "tol_norm = " << num(sc.solver.tol_norm) << "\n";
  os << "allow_large_dt = " << (sc.solver.allow_large_dt ? "true" : "false") << "\n\n";

  os << "[initial]\n";
  os << "shape = gaussian-at-rest\n";
  os << "center = " << num(sc.initial.center) << "\n";
  os << "a = " << num(sc.initial.a) << "\n\n";

  os << "[run]\n";
  os << "t_end = " << num(sc.t_end) << "\n";
  os << "snapshot_every = " << num(sc.snapshot_every) << "\n";
  if (!sc.outputs.empty()) {
    os << "outputs =";
    for (Output o : sc.outputs) os << ' ' << to_string(o);
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Bundled scenarios: the damped-oscillator experiments with D = 0.02 and a
// Gaussian packet at rest centred at x = -2. The domain [-30, 30] keeps the
// initial density below 1e-10 at both ends (on [-20, 20] it is about 1e-8 there).

inline const std::vector<std::pair<std::string, std::string>>& bundled_scenarios() {
  static const auto make = [](const char* name, const char* k, const char* t_end,
                              const char* every) {
    return std::string("# D = 0.02 oscillator, packet at rest shifted left by 2\n") +
           "name = " + name + "\n\n[grid]\nx_min = -30\nx_max = 30\nn = 1201\n\n" +
           "[params]\nhbar = 1\nm = 1\nk = " + k + "\npotential = harmonic\nD = 0.02\n\n" +
           "[solver]\ndt = auto\nrho_floor = 1e-12\nboundary = extrapolate-velocity\n" +
           "damping = linear\ntol_norm = 1e-06\nallow_large_dt = false\n\n" +
           "[initial]\nshape = gaussian-at-rest\ncenter = -2\na = 0.05\n\n" +
           "[run]\nt_end = " + t_end + "\nsnapshot_every = " + every + "\n" +
           "outputs = density current l2_distance liapunov liapunov_rate energy norm "
           "sobolev_distance\n";
  };
  static const std::vector<std::pair<std::string, std::string>> all = {
      {"paper-k1", make("paper-k1", "1", "100", "5")},
      {"paper-k0.1", make("paper-k0.1", "0.1", "20", "1")},
      {"paper-k0", make("paper-k0", "0", "19", "0.95")},
  };
  return all;
}

inline std::optional<Scenario> find_bundled(std::string_view name) {
  for (const auto& [n, text] : bundled_scenarios())
    if (n == name) return parse_scenario(text);
  return std::nullopt;
}

}  // namespace qhd
