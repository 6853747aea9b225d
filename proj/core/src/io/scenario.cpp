#include "bohm/io/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "bohm/error.hpp"
#include "bohm/io/emit.hpp"
#include "bohm/io/presets.hpp"
#include "bohm/manybody.hpp"
#include "bohm/tdse.hpp"

namespace bohm::io {

namespace {

struct Entry {
  std::string value;
  std::size_t line = 0;
};

// section -> key -> entries (several only for repeatable keys)
using Store = std::map<std::string, std::map<std::string, std::vector<Entry>>>;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"scenario", {"name", "preset"}},
      {"units", {"mass"}},
      {"grid", {"x_min", "x_max", "dx"}},
      {"potential", {"kind", "background", "barrier", "omega", "stiffness", "center"}},
      {"state",
       {"kind", "width", "center", "k", "energy", "width2", "center2", "k2", "energy2", "weight2",
        "index", "box", "table"}},
      {"interaction", {"kind", "eps_r", "strength", "softening"}},
      {"solver",
       {"kind", "dt", "stability", "steps", "duration", "nonlinearity", "startup", "count", "energy", "scheme",
        "quantum", "positions", "frame_every"}},
      {"ensemble", {"size", "seed", "sampling"}},
      {"outputs", {"fields", "trajectories", "observables", "snapshot_every", "dwell_region"}},
      {"scan", {"emin", "emax", "de"}},
      {"override", {"stability"}},
  };
  return s;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

Store tokenize(const std::string& text) {
  Store store;
  std::istringstream in(text);
  std::string raw, section;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("unterminated section header", line);
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      if (!schema().count(section)) throw ConfigError("unknown section [" + section + "]", line, section);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", line);
    const std::string key = trim(std::string_view(s).substr(0, eq));
    const std::string value = trim(std::string_view(s).substr(eq + 1));
    if (section.empty()) throw ConfigError("key '" + key + "' outside any section", line, key);
    if (!schema().at(section).count(key)) {
      throw ConfigError("unknown key '" + key + "' in [" + section + "]", line, key);
    }
    if (value.empty()) throw ConfigError("key '" + key + "' has no value", line, key);
    auto& slot = store[section][key];
    if (!slot.empty() && key != "barrier") throw ConfigError("duplicate key '" + key + "'", line, key);
    slot.push_back({value, line});
  }
  return store;
}

struct UnitRow {
  const char* name;
  double factor;
};

const std::map<Dimension, std::vector<UnitRow>>& unit_table() {
  static const std::map<Dimension, std::vector<UnitRow>> t{
      {Dimension::length, {{"m", 1.0}, {"um", 1e-6}, {"nm", 1e-9}, {"A", 1e-10}, {"pm", 1e-12}}},
      {Dimension::energy, {{"J", 1.0}, {"eV", si::electron_volt}, {"meV", 1e-3 * si::electron_volt}}},
      {Dimension::time, {{"s", 1.0}, {"ps", 1e-12}, {"fs", 1e-15}, {"as", 1e-18}}},
      {Dimension::wavenumber, {{"1/m", 1.0}, {"1/nm", 1e9}, {"1/A", 1e10}}},
      {Dimension::rate, {{"1/s", 1.0}, {"rad/s", 1.0}, {"1/ps", 1e12}, {"1/fs", 1e15}}},
      {Dimension::mass, {{"kg", 1.0}, {"me", si::electron_mass}}},
      {Dimension::coupling, {{"J m", 1.0}, {"eV nm", si::electron_volt * 1e-9}}},
      {Dimension::none, {}},
  };
  return t;
}

const char* si_unit(Dimension d) {
  switch (d) {
    case Dimension::length: return "m";
    case Dimension::energy: return "J";
    case Dimension::time: return "s";
    case Dimension::wavenumber: return "1/m";
    case Dimension::rate: return "1/s";
    case Dimension::mass: return "kg";
    case Dimension::coupling: return "J m";
    case Dimension::none: return "";
  }
  return "";
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(v);
  while (std::getline(in, cur, ',')) out.push_back(trim(cur));
  return out;
}

// Reads keys out of a merged store, remembering the line of each.
class Reader {
 public:
  explicit Reader(Store s) : s_(std::move(s)) {}

  const Entry* find(const std::string& sec, const std::string& key) const {
    auto si = s_.find(sec);
    if (si == s_.end()) return nullptr;
    auto ki = si->second.find(key);
    return ki == si->second.end() ? nullptr : &ki->second.back();
  }
  std::vector<Entry> all(const std::string& sec, const std::string& key) const {
    auto si = s_.find(sec);
    if (si == s_.end()) return {};
    auto ki = si->second.find(key);
    return ki == si->second.end() ? std::vector<Entry>{} : ki->second;
  }
  bool has(const std::string& sec, const std::string& key) const { return find(sec, key) != nullptr; }
  std::size_t line(const std::string& sec, const std::string& key) const {
    const Entry* e = find(sec, key);
    return e ? e->line : 0;
  }

  double quantity(const std::string& sec, const std::string& key, Dimension d, double fallback) const {
    const Entry* e = find(sec, key);
    return e ? convert(*e, key, d) : fallback;
  }
  std::optional<double> maybe(const std::string& sec, const std::string& key, Dimension d) const {
    const Entry* e = find(sec, key);
    if (!e) return std::nullopt;
    return convert(*e, key, d);
  }
  double required(const std::string& sec, const std::string& key, Dimension d) const {
    const Entry* e = find(sec, key);
    if (!e) throw ConfigError("missing required key '" + key + "' in [" + sec + "]", 0, key);
    return convert(*e, key, d);
  }
  std::vector<double> list(const Entry& e, const std::string& key, const std::vector<Dimension>& dims) const {
    auto parts = split_list(e.value);
    if (parts.size() != dims.size()) {
      throw ConfigError("key '" + key + "' expects " + std::to_string(dims.size()) + " comma-separated values",
                        e.line, key);
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < parts.size(); ++i) out.push_back(convert({parts[i], e.line}, key, dims[i]));
    return out;
  }
  std::size_t count(const std::string& sec, const std::string& key, std::size_t fallback) const {
    const Entry* e = find(sec, key);
    if (!e) return fallback;
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(e->value.data(), e->value.data() + e->value.size(), v);
    if (ec != std::errc{} || p != e->value.data() + e->value.size()) {
      throw ConfigError("key '" + key + "' expects a non-negative integer", e->line, key);
    }
    return v;
  }
  bool flag(const std::string& sec, const std::string& key, bool fallback) const {
    const Entry* e = find(sec, key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "yes" || e->value == "1") return true;
    if (e->value == "false" || e->value == "no" || e->value == "0") return false;
    throw ConfigError("key '" + key + "' expects true or false", e->line, key);
  }
  std::string word(const std::string& sec, const std::string& key, const std::string& fallback) const {
    const Entry* e = find(sec, key);
    return e ? e->value : fallback;
  }
  template <class E>
  E choice(const std::string& sec, const std::string& key, const std::vector<std::pair<std::string, E>>& options,
           E fallback) const {
    const Entry* e = find(sec, key);
    if (!e) return fallback;
    std::string names;
    for (const auto& [n, v] : options) {
      if (n == e->value) return v;
      names += (names.empty() ? "" : ", ") + n;
    }
    throw ConfigError("key '" + key + "' must be one of: " + names, e->line, key);
  }

  static double convert(const Entry& e, const std::string& key, Dimension d) {
    try {
      return parse_quantity(e.value, d);
    } catch (const ConfigError& err) {
      throw ConfigError(std::string(err.what()) + " for key '" + key + "'", e.line, key);
    }
  }

 private:
  Store s_;
};

const std::vector<std::pair<std::string, StateKind>> kStates{
    {"gaussian", StateKind::gaussian},       {"two-gaussian", StateKind::two_gaussian},
    {"eigenstate", StateKind::eigenstate},   {"polar", StateKind::polar},
    {"product", StateKind::product},         {"antisymmetrized", StateKind::antisymmetrized},
    {"symmetric", StateKind::symmetric},
};

const std::vector<std::pair<std::string, SolverKind>> kSolvers{
    {"tdse", SolverKind::tdse},
    {"tise-bound", SolverKind::tise_bound},
    {"tise-scatter", SolverKind::tise_scatter},
    {"qhje-lagrangian", SolverKind::qhje_lagrangian},
    {"qhje-eulerian", SolverKind::qhje_eulerian},
    {"manybody-exact", SolverKind::manybody_exact},
    {"manybody-conditional", SolverKind::manybody_conditional},
    {"manybody-conditional-exchange", SolverKind::manybody_conditional_exchange},
};

template <class E>
std::string name_of(const std::vector<std::pair<std::string, E>>& table, E v) {
  for (const auto& [n, e] : table) {
    if (e == v) return n;
  }
  return "unknown";
}

PacketSpec read_packet(const Reader& r, const std::string& suffix, double mass, bool need) {
  PacketSpec p;
  const std::string w = "width" + suffix, c = "center" + suffix, k = "k" + suffix, e = "energy" + suffix;
  if (!need && !r.has("state", w)) return p;
  p.width = r.required("state", w, Dimension::length);
  if (!(p.width > 0.0)) throw ConfigError("packet width must be positive", r.line("state", w), w);
  p.center = r.required("state", c, Dimension::length);
  if (r.has("state", k) && r.has("state", e)) {
    throw ConfigError("give either '" + k + "' or '" + e + "', not both", r.line("state", e), e);
  }
  if (r.has("state", e)) {
    const double en = r.required("state", e, Dimension::energy);
    if (en < 0.0) throw ConfigError("packet energy must be non-negative", r.line("state", e), e);
    p.k = std::sqrt(2.0 * mass * en) / si::hbar;
  } else {
    p.k = r.quantity("state", k, Dimension::wavenumber, 0.0);
  }
  return p;
}

void check_compatibility(const ScenarioConfig& c, const Reader& r) {
  const std::size_t line = r.line("solver", "kind");
  const bool two_body =
      c.state == StateKind::product || c.state == StateKind::antisymmetrized || c.state == StateKind::symmetric;
  auto fail = [&](const std::string& why) {
    throw ConfigError("[solver] kind: " + why + ", got state kind " + to_string(c.state), line, "kind");
  };
  switch (c.solver) {
    case SolverKind::tdse:
    case SolverKind::tise_scatter:
    case SolverKind::tise_bound:
      if (two_body) fail("solver " + to_string(c.solver) + " takes a single-particle state");
      break;
    case SolverKind::qhje_lagrangian:
    case SolverKind::qhje_eulerian:
      if (c.state != StateKind::gaussian && c.state != StateKind::polar) {
        fail("solver " + to_string(c.solver) + " needs a node-free state (gaussian or polar)");
      }
      break;
    case SolverKind::manybody_exact:
      if (!two_body) fail("manybody-exact needs a product, antisymmetrized or symmetric state");
      break;
    case SolverKind::manybody_conditional:
      if (c.state != StateKind::product) fail("manybody-conditional needs a product state");
      break;
    case SolverKind::manybody_conditional_exchange:
      if (c.state != StateKind::antisymmetrized && c.state != StateKind::symmetric) {
        fail("manybody-conditional-exchange needs an antisymmetrized or symmetric state");
      }
      break;
  }
  if (c.nonlinearity != 0.0 && c.solver != SolverKind::tdse) {
    throw ConfigError("nonlinearity is only supported by the tdse solver", r.line("solver", "nonlinearity"),
                      "nonlinearity");
  }
  if (c.solver == SolverKind::tise_scatter && !c.energy && !c.has_scan()) {
    throw ConfigError("tise-scatter at the resonance needs a [scan] window", line, "energy");
  }
  const bool timed = c.solver != SolverKind::tise_bound;
  if (timed && c.solver != SolverKind::tise_scatter && c.steps == 0) {
    throw ConfigError("time-dependent solvers need 'steps' or 'duration'", line, "steps");
  }
  if (c.many_body() && c.particle_positions.size() != 2 && !c.particle_positions.empty()) {
    throw ConfigError("'positions' takes one position per particle (2)", r.line("solver", "positions"),
                      "positions");
  }
  if (c.polar_table.empty() && c.state == StateKind::polar) {
    throw ConfigError("polar state needs a 'table' file", r.line("state", "kind"), "table");
  }
  if (c.has_scan() && !(c.scan_emax > c.scan_emin && *c.scan_de > 0.0)) {
    throw ConfigError("scan needs emax > emin and de > 0", r.line("scan", "de"), "de");
  }
  if (c.scan_emin.has_value() != c.scan_emax.has_value() || c.scan_emin.has_value() != c.scan_de.has_value()) {
    throw ConfigError("scan needs all of emin, emax and de", r.line("scan", "emin"), "emin");
  }
}

ScenarioConfig resolve(const Reader& r, const std::filesystem::path& base_dir) {
  ScenarioConfig c;
  c.base_dir = base_dir;
  c.name = r.word("scenario", "name", "scenario");
  c.preset = r.word("scenario", "preset", "");
  c.mass = r.quantity("units", "mass", Dimension::mass, si::electron_mass);
  if (!(c.mass > 0.0)) throw ConfigError("mass must be positive", r.line("units", "mass"), "mass");

  c.x_min = r.required("grid", "x_min", Dimension::length);
  c.x_max = r.required("grid", "x_max", Dimension::length);
  c.dx = r.quantity("grid", "dx", Dimension::length, 1e-10);
  if (!(c.dx > 0.0)) throw ConfigError("dx must be positive", r.line("grid", "dx"), "dx");
  if (!(c.x_max > c.x_min)) throw ConfigError("x_max must exceed x_min", r.line("grid", "x_max"), "x_max");

  {
    const auto barriers = r.all("potential", "barrier");
    const std::string kind = r.word("potential", "kind", barriers.empty() ? "flat" : "piecewise");
    const double background = r.quantity("potential", "background", Dimension::energy, 0.0);
    if (kind == "flat") {
      if (!barriers.empty()) throw ConfigError("flat potential takes no barriers", barriers.front().line, "barrier");
      c.potential = PotentialSpec::flat(background);
    } else if (kind == "piecewise") {
      std::vector<Barrier> segs;
      for (const auto& e : barriers) {
        auto v = r.list(e, "barrier", {Dimension::length, Dimension::length, Dimension::energy});
        segs.push_back({v[0], v[1], v[2]});
      }
      std::sort(segs.begin(), segs.end(), [](const Barrier& a, const Barrier& b) { return a.lo < b.lo; });
      try {
        c.potential = PotentialSpec::piecewise(segs, background);
      } catch (const Error& e) {
        throw ConfigError(e.what(), barriers.empty() ? 0 : barriers.front().line, "barrier");
      }
    } else if (kind == "harmonic") {
      const double center = r.quantity("potential", "center", Dimension::length, 0.0);
      double stiffness = 0.0;
      if (r.has("potential", "stiffness")) {
        stiffness = r.required("potential", "stiffness", Dimension::none);
      } else {
        const double w = r.required("potential", "omega", Dimension::rate);
        stiffness = c.mass * w * w;
      }
      if (!(stiffness > 0.0)) throw ConfigError("harmonic stiffness must be positive", r.line("potential", "omega"));
      c.potential = PotentialSpec::harmonic(c.mass, std::sqrt(stiffness / c.mass), center);
    } else {
      throw ConfigError("potential kind must be flat, piecewise or harmonic", r.line("potential", "kind"), "kind");
    }
  }

  c.state = r.choice("state", "kind", kStates, StateKind::gaussian);
  c.solver = r.choice("solver", "kind", kSolvers, SolverKind::tdse);
  const bool needs_packet = c.state == StateKind::gaussian || c.state == StateKind::two_gaussian ||
                            c.state == StateKind::product || c.state == StateKind::antisymmetrized ||
                            c.state == StateKind::symmetric;
  const bool state_needed = c.solver != SolverKind::tise_bound && c.solver != SolverKind::tise_scatter;
  c.packet = read_packet(r, "", c.mass, needs_packet && state_needed);
  c.packet2 = read_packet(r, "2", c.mass, needs_packet && state_needed && c.state != StateKind::gaussian);
  c.weight2 = r.quantity("state", "weight2", Dimension::none, 1.0);
  c.eigen_index = r.count("state", "index", 1);
  if (c.eigen_index == 0) throw ConfigError("eigenstate index starts at 1", r.line("state", "index"), "index");
  if (const Entry* e = r.find("state", "box")) {
    auto v = r.list(*e, "box", {Dimension::length, Dimension::length});
    if (!(v[1] > v[0])) throw ConfigError("box needs hi > lo", e->line, "box");
    c.box = Region{v[0], v[1]};
  }
  if (const Entry* e = r.find("state", "table")) c.polar_table = e->value;

  {
    const std::string kind = r.word("interaction", "kind", "none");
    if (kind == "none") {
      c.interaction = InteractionSpec::none();
    } else if (kind == "coulomb") {
      const double eps = r.quantity("interaction", "eps_r", Dimension::none, 1.0);
      const double strength = r.quantity("interaction", "strength", Dimension::none, si::coulomb_strength);
      const double soft = r.quantity("interaction", "softening", Dimension::length, 1e-9);
      if (!(eps > 0.0)) throw ConfigError("eps_r must be positive", r.line("interaction", "eps_r"), "eps_r");
      try {
        c.interaction = InteractionSpec::coulomb(strength / eps, soft);
      } catch (const Error& e) {
        throw ConfigError(e.what(), r.line("interaction", "softening"), "softening");
      }
    } else {
      throw ConfigError("interaction kind must be none or coulomb", r.line("interaction", "kind"), "kind");
    }
  }

  c.stability_target = r.quantity("solver", "stability", Dimension::none, 0.2);
  if (!(c.stability_target > 0.0)) {
    throw ConfigError("stability target must be positive", r.line("solver", "stability"), "stability");
  }
  // Gate arithmetic: hbar dt / m per axis over dx^2.
  const double axes = c.many_body() && c.solver == SolverKind::manybody_exact ? 2.0 : 1.0;
  c.dt = r.quantity("solver", "dt", Dimension::time, c.stability_target * c.mass * c.dx * c.dx / (axes * si::hbar));
  if (!(c.dt > 0.0)) throw ConfigError("dt must be positive", r.line("solver", "dt"), "dt");
  if (r.has("solver", "steps") && r.has("solver", "duration")) {
    throw ConfigError("give either 'steps' or 'duration', not both", r.line("solver", "duration"), "duration");
  }
  if (r.has("solver", "duration")) {
    const double t = r.required("solver", "duration", Dimension::time);
    c.steps = static_cast<std::size_t>(std::ceil(t / c.dt - 1e-9));
  } else {
    c.steps = r.count("solver", "steps", 0);
  }
  c.nonlinearity = r.quantity("solver", "nonlinearity", Dimension::coupling, 0.0);
  c.startup = r.choice<Startup>("solver", "startup",
                                {{"auto", Startup::automatic}, {"exact", Startup::exact}, {"euler", Startup::euler}},
                                Startup::automatic);
  c.eigen_count = r.count("solver", "count", 5);
  if (const Entry* e = r.find("solver", "energy"); e && e->value != "resonance") {
    c.energy = Reader::convert(*e, "energy", Dimension::energy);
  }
  c.scheme = r.choice<LagrangianScheme>("solver", "scheme",
                                        {{"rk4", LagrangianScheme::rk4}, {"euler", LagrangianScheme::euler}},
                                        LagrangianScheme::rk4);
  c.quantum = r.flag("solver", "quantum", true);
  if (const Entry* e = r.find("solver", "positions")) {
    for (const auto& part : split_list(e->value)) c.particle_positions.push_back(Reader::convert({part, e->line}, "positions", Dimension::length));
  }
  c.frame_every = r.count("solver", "frame_every", 10);
  if (c.frame_every == 0) throw ConfigError("frame_every must be positive", r.line("solver", "frame_every"), "frame_every");

  c.ensemble_size = r.count("ensemble", "size", c.many_body() ? 1 : 0);
  c.seed = r.count("ensemble", "seed", 1);
  c.sampling = r.choice<Sampling>("ensemble", "sampling",
                                  {{"random", Sampling::random}, {"quantile", Sampling::quantile}}, Sampling::random);

  c.write_fields = r.flag("outputs", "fields", true);
  c.write_trajectories = r.flag("outputs", "trajectories", true);
  c.write_observables = r.flag("outputs", "observables", true);
  c.snapshot_every = r.count("outputs", "snapshot_every", 0);
  if (const Entry* e = r.find("outputs", "dwell_region")) {
    auto v = r.list(*e, "dwell_region", {Dimension::length, Dimension::length});
    if (!(v[1] > v[0])) throw ConfigError("dwell_region needs hi > lo", e->line, "dwell_region");
    c.dwell_region = Region{v[0], v[1]};
  }

  c.scan_emin = r.maybe("scan", "emin", Dimension::energy);
  c.scan_emax = r.maybe("scan", "emax", Dimension::energy);
  c.scan_de = r.maybe("scan", "de", Dimension::energy);

  c.override_stability = r.flag("override", "stability", false);

  if (c.snapshot_every == 0 && c.steps > 0) c.snapshot_every = std::max<std::size_t>(1, c.steps / 50);
  // Trajectory rows are written at snapshots, so snapshots land on frames.
  if (c.snapshot_every % c.frame_every != 0) {
    c.frame_every = std::gcd(c.snapshot_every, c.frame_every);
  }

  check_compatibility(c, r);
  return c;
}

Store merge(Store base, const Store& over) {
  for (const auto& [sec, keys] : over) {
    for (const auto& [key, entries] : keys) base[sec][key] = entries;
  }
  return base;
}

}  // namespace

std::string to_string(StateKind k) { return name_of(kStates, k); }
std::string to_string(SolverKind k) { return name_of(kSolvers, k); }

std::vector<double> ScenarioConfig::scan_energies() const {
  std::vector<double> out;
  if (!has_scan()) return out;
  const auto n = static_cast<std::size_t>(std::floor((*scan_emax - *scan_emin) / *scan_de + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) out.push_back(*scan_emin + static_cast<double>(i) * *scan_de);
  return out;
}

double parse_quantity(const std::string& text, Dimension dim) {
  const std::string s = trim(text);
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  auto [p, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || p == begin) throw ConfigError("'" + s + "' is not a number");
  if (!std::isfinite(v)) throw ConfigError("'" + s + "' is not finite");
  const std::string unit = trim(std::string_view(p, static_cast<std::size_t>(end - p)));
  if (unit.empty()) return v;
  for (const auto& row : unit_table().at(dim)) {
    if (unit == row.name) return v * row.factor;
  }
  for (const auto& [d, rows] : unit_table()) {
    for (const auto& row : rows) {
      if (unit == row.name) {
        throw ConfigError("unit mismatch: '" + unit + "' is not a unit of " +
                          (dim == Dimension::none ? std::string("a plain number") : std::string(si_unit(dim))));
      }
    }
  }
  throw ConfigError("unknown unit '" + unit + "'");
}

ScenarioConfig parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  Store user = tokenize(text);
  Store merged = user;
  auto sit = user.find("scenario");
  if (sit != user.end()) {
    auto pit = sit->second.find("preset");
    if (pit != sit->second.end()) {
      const Entry& e = pit->second.back();
      if (!has_preset(e.value)) throw ConfigError("unknown preset '" + e.value + "'", e.line, "preset");
      Store base = tokenize(preset_text(e.value));
      // Lines in preset text are not the user's; report them as line 0.
      for (auto& [sec, keys] : base) {
        for (auto& [key, entries] : keys) {
          for (auto& en : entries) en.line = 0;
        }
      }
      merged = merge(std::move(base), user);
      if (!user["scenario"].count("name")) merged["scenario"]["name"] = {{e.value, 0}};
    }
  }
  return resolve(Reader(std::move(merged)), base_dir);
}

ScenarioConfig load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot read scenario file " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), file.parent_path());
}

std::string to_text(const ScenarioConfig& c) {
  std::ostringstream o;
  auto q = [](double v, Dimension d) {
    std::string s = format_double(v);
    const char* u = si_unit(d);
    return *u ? s + " " + u : s;
  };
  o << "[scenario]\nname = " << c.name << "\n";
  o << "\n[units]\nmass = " << q(c.mass, Dimension::mass) << "\n";
  o << "\n[grid]\nx_min = " << q(c.x_min, Dimension::length) << "\nx_max = " << q(c.x_max, Dimension::length)
    << "\ndx = " << q(c.dx, Dimension::length) << "\n";
  o << "\n[potential]\n";
  switch (c.potential.kind()) {
    case PotentialSpec::Kind::flat:
      o << "kind = flat\nbackground = " << q(c.potential.background(), Dimension::energy) << "\n";
      break;
    case PotentialSpec::Kind::piecewise:
      o << "kind = piecewise\nbackground = " << q(c.potential.background(), Dimension::energy) << "\n";
      for (const auto& b : c.potential.segments()) {
        o << "barrier = " << q(b.lo, Dimension::length) << ", " << q(b.hi, Dimension::length) << ", "
          << q(b.height, Dimension::energy) << "\n";
      }
      break;
    case PotentialSpec::Kind::harmonic:
      o << "kind = harmonic\nstiffness = " << q(c.potential.stiffness(), Dimension::none)
        << "\ncenter = " << q(c.potential.center(), Dimension::length) << "\n";
      break;
    case PotentialSpec::Kind::tabulated:
      o << "# tabulated potential\n";
      break;
  }
  o << "\n[state]\nkind = " << to_string(c.state) << "\n";
  auto packet = [&](const PacketSpec& p, const char* sfx) {
    if (!(p.width > 0.0)) return;
    o << "width" << sfx << " = " << q(p.width, Dimension::length) << "\ncenter" << sfx << " = "
      << q(p.center, Dimension::length) << "\nk" << sfx << " = " << q(p.k, Dimension::wavenumber) << "\n";
  };
  packet(c.packet, "");
  packet(c.packet2, "2");
  o << "weight2 = " << q(c.weight2, Dimension::none) << "\nindex = " << c.eigen_index << "\n";
  if (c.box) o << "box = " << q(c.box->lo, Dimension::length) << ", " << q(c.box->hi, Dimension::length) << "\n";
  if (!c.polar_table.empty()) o << "table = " << c.polar_table.string() << "\n";
  o << "\n[interaction]\n";
  if (c.interaction.strength == 0.0) {
    o << "kind = none\n";
  } else {
    o << "kind = coulomb\nstrength = " << q(c.interaction.strength, Dimension::none)
      << "\nsoftening = " << q(c.interaction.softening, Dimension::length) << "\n";
  }
  o << "\n[solver]\nkind = " << to_string(c.solver) << "\ndt = " << q(c.dt, Dimension::time)
    << "\nstability = " << q(c.stability_target, Dimension::none) << "\nsteps = " << c.steps
    << "\nnonlinearity = " << q(c.nonlinearity, Dimension::coupling) << "\nstartup = "
    << (c.startup == Startup::automatic ? "auto" : c.startup == Startup::exact ? "exact" : "euler")
    << "\ncount = " << c.eigen_count << "\n";
  o << "energy = " << (c.energy ? q(*c.energy, Dimension::energy) : std::string("resonance")) << "\n";
  o << "scheme = " << (c.scheme == LagrangianScheme::rk4 ? "rk4" : "euler") << "\nquantum = "
    << (c.quantum ? "true" : "false") << "\nframe_every = " << c.frame_every << "\n";
  if (!c.particle_positions.empty()) {
    o << "positions = ";
    for (std::size_t i = 0; i < c.particle_positions.size(); ++i) {
      o << (i ? ", " : "") << q(c.particle_positions[i], Dimension::length);
    }
    o << "\n";
  }
  o << "\n[ensemble]\nsize = " << c.ensemble_size << "\nseed = " << c.seed
    << "\nsampling = " << (c.sampling == Sampling::random ? "random" : "quantile") << "\n";
  o << "\n[outputs]\nfields = " << (c.write_fields ? "true" : "false")
    << "\ntrajectories = " << (c.write_trajectories ? "true" : "false")
    << "\nobservables = " << (c.write_observables ? "true" : "false") << "\nsnapshot_every = " << c.snapshot_every
    << "\n";
  if (c.dwell_region) {
    o << "dwell_region = " << q(c.dwell_region->lo, Dimension::length) << ", "
      << q(c.dwell_region->hi, Dimension::length) << "\n";
  }
  if (c.has_scan()) {
    o << "\n[scan]\nemin = " << q(*c.scan_emin, Dimension::energy) << "\nemax = " << q(*c.scan_emax, Dimension::energy)
      << "\nde = " << q(*c.scan_de, Dimension::energy) << "\n";
  }
  o << "\n[override]\nstability = " << (c.override_stability ? "true" : "false") << "\n";
  return o.str();
}

}  // namespace bohm::io
