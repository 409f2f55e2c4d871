#pragma once

// Run configuration: flat `key = value` lines grouped under `[section]`
// headers. `#` starts a comment. Unknown sections and keys, duplicates, and
// keys that do not apply to the chosen law are errors naming the field.
//
//   [run]             experiment, master_seed, workers, output
//   [law]             law = pointmass | twopoint | uniform | mixture
//                     pointmass: r        twopoint: r, b, p     uniform: r, b
//                     mixture: base, epsilon, slow, slow_r, slow_b, slow_p
//   [env-sample]      first, last
//   [lpp-tau]         points, sizes, replicas
//   [coupling-audit]  samples, significance, audit_seed, path_x, path_y,
//                     path_n, path_replicas, max_cells
//   [plateau]         rho_min, rho_max, rho_step
//   [flux-curve]      L, rhos, burn_in, window, batches, realizations
//
// Lists are comma separated; `points` is a `;` separated list of `x, y`.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dtasep/cli/format.hpp"
#include "dtasep/coupling.hpp"
#include "dtasep/env.hpp"
#include "dtasep/errors.hpp"

namespace dtasep::cli {

// Field-level validation failure; `field` is "section.key".
class ConfigError : public ParameterError {
 public:
  ConfigError(std::string field, const std::string& message)
      : ParameterError(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class Experiment { env_sample, lpp_tau, coupling_audit, plateau, flux_curve, fundamental_diagram };

inline const std::vector<std::pair<Experiment, std::string>>& experiment_names() {
  static const std::vector<std::pair<Experiment, std::string>> names{
      {Experiment::env_sample, "env-sample"},         {Experiment::lpp_tau, "lpp-tau"},
      {Experiment::coupling_audit, "coupling-audit"}, {Experiment::plateau, "plateau"},
      {Experiment::flux_curve, "flux-curve"},         {Experiment::fundamental_diagram, "fundamental-diagram"}};
  return names;
}

inline const std::string& to_string(Experiment e) {
  for (const auto& [k, v] : experiment_names())
    if (k == e) return v;
  throw InvariantViolation("unknown experiment");
}

inline std::optional<Experiment> parse_experiment(std::string_view s) {
  for (const auto& [k, v] : experiment_names())
    if (v == s) return k;
  return std::nullopt;
}

struct EnvSampleParams {
  std::int64_t first = 0;
  std::int64_t last = 99;
};

struct LppTauParams {
  std::vector<std::pair<double, double>> points{{0.0, 1.0}, {1.0, 1.0}, {-0.5, 1.0}};
  std::vector<std::int64_t> sizes{125, 250, 500};
  std::size_t replicas = 16;
};

struct CouplingAuditParams {
  std::size_t samples = 100000;
  double significance = 0.01;
  std::uint64_t audit_seed = coupling::default_audit_seed;
  double path_x = 1.0;
  double path_y = 1.0;
  std::int64_t path_n = 200;
  std::size_t path_replicas = 50;
  std::size_t max_cells = lpp::default_max_cells;
};

struct PlateauParams {
  double rho_min = 0.01;
  double rho_max = 0.99;
  double rho_step = 0.01;
};

struct FluxCurveParams {
  std::size_t L = 256;
  std::vector<double> rhos{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::optional<double> burn_in;  // default: sim::default_burn_in(L, r)
  double window = 2500.0;
  std::size_t batches = 16;
  std::size_t realizations = 4;
};

struct RunConfig {
  std::optional<Experiment> experiment;
  std::uint64_t master_seed = 1;
  unsigned workers = 1;
  std::string output = "dtasep-out";
  DisorderLaw law = PointMass{1.0};
  EnvSampleParams env_sample;
  LppTauParams lpp_tau;
  CouplingAuditParams coupling_audit;
  PlateauParams plateau;
  FluxCurveParams flux_curve;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double to_double(const std::string& field, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError(field, "expected a finite number, got '" + v + "'");
  return out;
}

template <class Int>
Int to_integer(const std::string& field, const std::string& v) {
  Int out = 0;
  int base = 10;
  std::string_view digits = v;
  if (digits.size() > 2 && digits[0] == '0' && (digits[1] == 'x' || digits[1] == 'X')) {
    base = 16;
    digits.remove_prefix(2);
  }
  const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), out, base);
  if (digits.empty() || res.ec != std::errc{} || res.ptr != digits.data() + digits.size())
    throw ConfigError(field, "expected an integer, got '" + v + "'");
  return out;
}

inline std::size_t to_positive(const std::string& field, const std::string& v) {
  const auto n = to_integer<std::int64_t>(field, v);
  if (n <= 0) throw ConfigError(field, "must be positive, got " + v);
  return static_cast<std::size_t>(n);
}

inline std::vector<double> to_double_list(const std::string& field, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split(v, ',')) out.push_back(to_double(field, item));
  return out;
}

inline std::string join_numbers(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + format_exact(v[k]);
  return s;
}

// Raw `key -> (value, line)` map per section, before typing.
struct RawEntry {
  std::string value;
  int line = 0;
};
using RawSection = std::map<std::string, RawEntry>;
using RawConfig = std::map<std::string, RawSection>;

inline const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"run", {"experiment", "master_seed", "workers", "output"}},
      {"law", {"law", "r", "b", "p", "base", "epsilon", "slow", "slow_r", "slow_b", "slow_p"}},
      {"env-sample", {"first", "last"}},
      {"lpp-tau", {"points", "sizes", "replicas"}},
      {"coupling-audit",
       {"samples", "significance", "audit_seed", "path_x", "path_y", "path_n", "path_replicas", "max_cells"}},
      {"plateau", {"rho_min", "rho_max", "rho_step"}},
      {"flux-curve", {"L", "rhos", "burn_in", "window", "batches", "realizations"}},
  };
  return keys;
}

inline RawConfig parse_raw(std::string_view text) {
  RawConfig raw;
  std::string section;
  int line_no = 0;
  for (const auto& raw_line : split(text, '\n')) {
    ++line_no;
    std::string line = raw_line;
    if (const auto hash = line.find('#'); hash != std::string::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where, "malformed section header '" + line + "'");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!allowed_keys().count(section)) throw ConfigError(section, "unknown section (" + where + ")");
      if (raw.count(section)) throw ConfigError(section, "section appears twice (" + where + ")");
      raw[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where, "expected 'key = value', got '" + line + "'");
    if (section.empty()) throw ConfigError(where, "key outside of any [section]");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const std::string field = section + "." + key;
    if (!allowed_keys().at(section).count(key)) throw ConfigError(field, "unknown key (" + where + ")");
    if (raw[section].count(key)) throw ConfigError(field, "duplicate key (" + where + ")");
    raw[section][key] = {value, line_no};
  }
  return raw;
}

// Typed access to one section.
class Reader {
 public:
  Reader(RawConfig& raw, std::string section) : raw_(raw), section_(std::move(section)) {}

  const std::string* get(const std::string& key) {
    auto sec = raw_.find(section_);
    if (sec == raw_.end()) return nullptr;
    auto it = sec->second.find(key);
    return it == sec->second.end() ? nullptr : &it->second.value;
  }

  std::string field(const std::string& key) const { return section_ + "." + key; }

  template <class T, class Conv>
  void read(const std::string& key, T& out, Conv conv) {
    if (const auto* v = get(key)) out = conv(field(key), *v);
  }

  void number(const std::string& key, double& out) { read(key, out, to_double); }

 private:
  RawConfig& raw_;
  std::string section_;
};

inline SimpleLaw read_simple_law(Reader& rd, const std::string& kind_key, const std::string& kind,
                                 const std::string& prefix, std::set<std::string>& allowed) {
  auto need = [&](const std::string& key) {
    allowed.insert(prefix + key);
    const auto* v = rd.get(prefix + key);
    if (!v) throw ConfigError(rd.field(prefix + key), "required for " + kind_key + " = " + kind);
    return to_double(rd.field(prefix + key), *v);
  };
  if (kind == "pointmass") return PointMass{need("r")};
  if (kind == "twopoint") return TwoPoint{need("r"), need("b"), need("p")};
  if (kind == "uniform") return Uniform{need("r"), need("b")};
  throw ConfigError(rd.field(kind_key), "unknown law '" + kind + "' (pointmass, twopoint, uniform" +
                                            std::string(prefix.empty() ? ", mixture" : "") + ")");
}

inline DisorderLaw read_law(RawConfig& raw) {
  Reader rd(raw, "law");
  if (!raw.count("law")) return PointMass{1.0};
  const auto* kind = rd.get("law");
  if (!kind) throw ConfigError("law.law", "required when a [law] section is present");
  std::set<std::string> allowed{"law"};
  DisorderLaw law;
  if (*kind == "mixture") {
    allowed.insert({"base", "epsilon", "slow"});
    const auto* base = rd.get("base");
    const auto* eps = rd.get("epsilon");
    const auto* slow = rd.get("slow");
    if (!base) throw ConfigError("law.base", "required for law = mixture");
    if (!eps) throw ConfigError("law.epsilon", "required for law = mixture");
    if (!slow) throw ConfigError("law.slow", "required for law = mixture");
    law = Mixture{to_double("law.base", *base), to_double("law.epsilon", *eps),
                  read_simple_law(rd, "slow", *slow, "slow_", allowed)};
  } else {
    law = std::visit([](const auto& l) -> DisorderLaw { return l; }, read_simple_law(rd, "law", *kind, "", allowed));
  }
  for (const auto& [key, entry] : raw.at("law"))
    if (!allowed.count(key)) throw ConfigError("law." + key, "not used by law = " + *kind);

  // Map library parameter messages back onto config fields.
  auto check = [](bool ok, const char* field, const char* msg) {
    if (!ok) throw ConfigError(field, msg);
  };
  auto check_simple = [&](const SimpleLaw& s, const std::string& pre) {
    std::visit(dtasep::detail::overloaded{
                   [&](const PointMass& l) {
                     check(l.rate > 0.0, ("law." + pre + "r").c_str(), "must be a positive rate");
                   },
                   [&](const TwoPoint& l) {
                     check(l.slow > 0.0, ("law." + pre + "r").c_str(), "must be a positive rate");
                     check(l.fast >= l.slow, ("law." + pre + "b").c_str(), "must be >= r");
                     check(l.p_slow >= 0.0 && l.p_slow <= 1.0, ("law." + pre + "p").c_str(), "must lie in [0, 1]");
                   },
                   [&](const Uniform& l) {
                     check(l.lo > 0.0, ("law." + pre + "r").c_str(), "must be a positive rate");
                     check(l.hi >= l.lo, ("law." + pre + "b").c_str(), "must be >= r");
                   },
               },
               s);
  };
  if (const auto* m = std::get_if<Mixture>(&law)) {
    check(m->base_rate > 0.0, "law.base", "must be a positive rate");
    check(m->epsilon >= 0.0 && m->epsilon <= 1.0, "law.epsilon", "must lie in [0, 1]");
    check_simple(m->slow, "slow_");
  } else {
    check_simple(dtasep::detail::as_simple(law), "");
  }
  validate(law);
  return law;
}

inline void require_density(const std::string& field, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError(field, "density " + format_exact(rho) + " is outside (0, 1)");
}

}  // namespace detail

/// Parses and validates a configuration text.
inline RunConfig parse_config(std::string_view text) {
  using namespace detail;
  RawConfig raw = parse_raw(text);
  RunConfig cfg;

  Reader run(raw, "run");
  if (const auto* e = run.get("experiment")) {
    cfg.experiment = parse_experiment(*e);
    if (!cfg.experiment) throw ConfigError("run.experiment", "unknown experiment '" + *e + "'");
  }
  run.read("master_seed", cfg.master_seed, to_integer<std::uint64_t>);
  if (const auto* w = run.get("workers")) cfg.workers = static_cast<unsigned>(to_positive("run.workers", *w));
  if (const auto* o = run.get("output")) {
    if (o->empty()) throw ConfigError("run.output", "must not be empty");
    cfg.output = *o;
  }

  cfg.law = read_law(raw);

  Reader es(raw, "env-sample");
  es.read("first", cfg.env_sample.first, to_integer<std::int64_t>);
  es.read("last", cfg.env_sample.last, to_integer<std::int64_t>);
  if (cfg.env_sample.last < cfg.env_sample.first) throw ConfigError("env-sample.last", "must be >= first");

  Reader lt(raw, "lpp-tau");
  if (const auto* v = lt.get("points")) {
    cfg.lpp_tau.points.clear();
    for (const auto& item : split(*v, ';')) {
      const auto xy = to_double_list("lpp-tau.points", item);
      if (xy.size() != 2) throw ConfigError("lpp-tau.points", "each point needs 'x, y', got '" + item + "'");
      if (!(xy[1] >= 0.0 && xy[0] + xy[1] >= 0.0))
        throw ConfigError("lpp-tau.points", "(" + item + ") is outside y >= 0, x + y >= 0");
      cfg.lpp_tau.points.emplace_back(xy[0], xy[1]);
    }
  }
  if (const auto* v = lt.get("sizes")) {
    cfg.lpp_tau.sizes.clear();
    for (const auto& item : split(*v, ','))
      cfg.lpp_tau.sizes.push_back(static_cast<std::int64_t>(to_positive("lpp-tau.sizes", item)));
    for (std::size_t k = 1; k < cfg.lpp_tau.sizes.size(); ++k)
      if (cfg.lpp_tau.sizes[k] <= cfg.lpp_tau.sizes[k - 1])
        throw ConfigError("lpp-tau.sizes", "must be strictly increasing");
  }
  lt.read("replicas", cfg.lpp_tau.replicas, to_positive);
  if (cfg.lpp_tau.replicas < 2) throw ConfigError("lpp-tau.replicas", "must be >= 2");

  Reader ca(raw, "coupling-audit");
  auto& c = cfg.coupling_audit;
  ca.read("samples", c.samples, to_positive);
  if (c.samples < 1000) throw ConfigError("coupling-audit.samples", "must be >= 1000");
  ca.number("significance", c.significance);
  if (!(c.significance > 0.0 && c.significance < 1.0))
    throw ConfigError("coupling-audit.significance", "must lie in (0, 1)");
  ca.read("audit_seed", c.audit_seed, to_integer<std::uint64_t>);
  ca.number("path_x", c.path_x);
  ca.number("path_y", c.path_y);
  if (c.path_x < 0.0) throw ConfigError("coupling-audit.path_x", "must be >= 0");
  if (c.path_y < 0.0) throw ConfigError("coupling-audit.path_y", "must be >= 0");
  if (const auto* v = ca.get("path_n")) c.path_n = static_cast<std::int64_t>(to_positive("coupling-audit.path_n", *v));
  ca.read("path_replicas", c.path_replicas, to_positive);
  if (c.path_replicas < 2) throw ConfigError("coupling-audit.path_replicas", "must be >= 2");
  ca.read("max_cells", c.max_cells, to_positive);

  Reader pl(raw, "plateau");
  pl.number("rho_min", cfg.plateau.rho_min);
  pl.number("rho_max", cfg.plateau.rho_max);
  pl.number("rho_step", cfg.plateau.rho_step);
  require_density("plateau.rho_min", cfg.plateau.rho_min);
  require_density("plateau.rho_max", cfg.plateau.rho_max);
  if (cfg.plateau.rho_max < cfg.plateau.rho_min) throw ConfigError("plateau.rho_max", "must be >= rho_min");
  if (!(cfg.plateau.rho_step > 0.0)) throw ConfigError("plateau.rho_step", "must be positive");
  if ((cfg.plateau.rho_max - cfg.plateau.rho_min) / cfg.plateau.rho_step > 1e6)
    throw ConfigError("plateau.rho_step", "grid would exceed 10^6 points");

  Reader fc(raw, "flux-curve");
  auto& f = cfg.flux_curve;
  fc.read("L", f.L, to_positive);
  if (f.L < 4) throw ConfigError("flux-curve.L", "must be >= 4");
  if (const auto* v = fc.get("rhos")) f.rhos = to_double_list("flux-curve.rhos", *v);
  for (double rho : f.rhos) {
    require_density("flux-curve.rhos", rho);
    const auto n = std::llround(rho * static_cast<double>(f.L));
    if (n < 1 || n >= static_cast<long long>(f.L))
      throw ConfigError("flux-curve.rhos", "density " + format_exact(rho) + " gives a ring with no particles or no holes");
  }
  if (const auto* v = fc.get("burn_in")) {
    if (*v != "auto") {
      f.burn_in = to_double("flux-curve.burn_in", *v);
      if (*f.burn_in < 0.0) throw ConfigError("flux-curve.burn_in", "must be >= 0 or 'auto'");
    }
  }
  fc.number("window", f.window);
  if (!(f.window > 0.0)) throw ConfigError("flux-curve.window", "must be positive");
  fc.read("batches", f.batches, to_positive);
  if (f.batches < 8) throw ConfigError("flux-curve.batches", "must be >= 8");
  fc.read("realizations", f.realizations, to_positive);

  return cfg;
}

inline std::vector<double> plateau_grid(const PlateauParams& p) {
  std::vector<double> out;
  for (std::int64_t k = 0;; ++k) {
    const double rho = round12(p.rho_min + static_cast<double>(k) * p.rho_step);
    if (rho > p.rho_max + 1e-12) break;
    out.push_back(rho);
  }
  return out;
}

inline std::string law_section(const DisorderLaw& law) {
  std::string s = "[law]\n";
  auto simple = [&s](const SimpleLaw& l, const std::string& pre) {
    std::visit(dtasep::detail::overloaded{
                   [&](const PointMass& m) { s += pre + "r = " + format_exact(m.rate) + "\n"; },
                   [&](const TwoPoint& m) {
                     s += pre + "r = " + format_exact(m.slow) + "\n" + pre + "b = " + format_exact(m.fast) + "\n" +
                          pre + "p = " + format_exact(m.p_slow) + "\n";
                   },
                   [&](const Uniform& m) {
                     s += pre + "r = " + format_exact(m.lo) + "\n" + pre + "b = " + format_exact(m.hi) + "\n";
                   },
               },
               l);
  };
  auto kind = [](const SimpleLaw& l) {
    return std::visit(dtasep::detail::overloaded{[](const PointMass&) { return "pointmass"; },
                                                 [](const TwoPoint&) { return "twopoint"; },
                                                 [](const Uniform&) { return "uniform"; }},
                      l);
  };
  if (const auto* m = std::get_if<Mixture>(&law)) {
    s += "law = mixture\nbase = " + format_exact(m->base_rate) + "\nepsilon = " + format_exact(m->epsilon) +
         "\nslow = " + kind(m->slow) + "\n";
    simple(m->slow, "slow_");
  } else {
    const auto l = dtasep::detail::as_simple(law);
    s += std::string("law = ") + kind(l) + "\n";
    simple(l, "");
  }
  return s;
}

/// Canonical text: fixed section and key order, every value explicit,
/// shortest round-trip numbers. Parsing it yields the same RunConfig.
inline std::string canonical_config(const RunConfig& cfg) {
  std::string s = "[run]\n";
  if (cfg.experiment) s += "experiment = " + to_string(*cfg.experiment) + "\n";
  s += "master_seed = " + std::to_string(cfg.master_seed) + "\n";
  s += "workers = " + std::to_string(cfg.workers) + "\n";
  s += "output = " + cfg.output + "\n\n";
  s += law_section(cfg.law) + "\n";

  s += "[env-sample]\nfirst = " + std::to_string(cfg.env_sample.first) +
       "\nlast = " + std::to_string(cfg.env_sample.last) + "\n\n";

  s += "[lpp-tau]\npoints = ";
  for (std::size_t k = 0; k < cfg.lpp_tau.points.size(); ++k)
    s += (k ? "; " : "") + format_exact(cfg.lpp_tau.points[k].first) + ", " +
         format_exact(cfg.lpp_tau.points[k].second);
  s += "\nsizes = ";
  for (std::size_t k = 0; k < cfg.lpp_tau.sizes.size(); ++k)
    s += (k ? ", " : "") + std::to_string(cfg.lpp_tau.sizes[k]);
  s += "\nreplicas = " + std::to_string(cfg.lpp_tau.replicas) + "\n\n";

  const auto& c = cfg.coupling_audit;
  s += "[coupling-audit]\nsamples = " + std::to_string(c.samples) + "\nsignificance = " +
       format_exact(c.significance) + "\naudit_seed = " + std::to_string(c.audit_seed) + "\npath_x = " +
       format_exact(c.path_x) + "\npath_y = " + format_exact(c.path_y) + "\npath_n = " + std::to_string(c.path_n) +
       "\npath_replicas = " + std::to_string(c.path_replicas) + "\nmax_cells = " + std::to_string(c.max_cells) +
       "\n\n";

  s += "[plateau]\nrho_min = " + format_exact(cfg.plateau.rho_min) + "\nrho_max = " +
       format_exact(cfg.plateau.rho_max) + "\nrho_step = " + format_exact(cfg.plateau.rho_step) + "\n\n";

  const auto& f = cfg.flux_curve;
  s += "[flux-curve]\nL = " + std::to_string(f.L) + "\nrhos = " + detail::join_numbers(f.rhos) +
       "\nburn_in = " + (f.burn_in ? format_exact(*f.burn_in) : std::string("auto")) + "\nwindow = " +
       format_exact(f.window) + "\nbatches = " + std::to_string(f.batches) + "\nrealizations = " +
       std::to_string(f.realizations) + "\n";
  return s;
}

}  // namespace dtasep::cli
