#pragma once

// Experiment execution and artifact emission. Every experiment returns its
// artifacts in memory; `run` writes them plus manifest.json to the output
// directory. Artifact bytes depend only on the configuration (worker count
// included only as a scheduling hint).

#include <chrono>
#include <ctime>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtasep/cli/config.hpp"
#include "dtasep/cli/format.hpp"
#include "dtasep/coupling.hpp"
#include "dtasep/env.hpp"
#include "dtasep/lpp.hpp"
#include "dtasep/random.hpp"
#include "dtasep/shape.hpp"
#include "dtasep/sim.hpp"

namespace dtasep::cli {

using Json = nlohmann::ordered_json;

struct Artifact {
  std::string name;
  std::string content;
};

struct ExperimentOutput {
  std::vector<Artifact> artifacts;
  Json seeds = Json::object();
};

inline std::string num(double v) { return format_number(v); }
inline double jnum(double v) { return round12(v); }

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline Json law_json(const DisorderLaw& law) {
  return Json{{"law", describe(law)}, {"r", jnum(essential_infimum(law))}, {"mu", jnum(mu(law))},
              {"mean_inverse_rate", jnum(mean_inverse_rate(law))}};
}

inline ExperimentOutput run_env_sample(const RunConfig& cfg) {
  ExperimentOutput out;
  const auto& p = cfg.env_sample;
  const std::uint64_t seed = derive_seed(cfg.master_seed, "env-sample", 0, "alpha");
  out.seeds["alpha"] = seed;
  const Environment env(cfg.law, seed, p.first, p.last);

  CsvWriter csv({"i", "alpha"});
  double inv = 0.0;
  double lo = env.alpha(p.first);
  for (std::int64_t i = p.first; i <= p.last; ++i) {
    csv.row({std::to_string(i), num(env[i])});
    inv += 1.0 / env[i];
    lo = std::min(lo, env[i]);
  }
  const double n = static_cast<double>(env.size());
  Json j = law_json(cfg.law);
  j["first"] = p.first;
  j["last"] = p.last;
  j["sample_min"] = jnum(lo);
  j["sample_mean_inverse_rate"] = jnum(inv / n);
  j["sample_mu"] = jnum(1.0 / env.infimum() - inv / n);
  out.artifacts.push_back({"env-sample.csv", csv.text()});
  out.artifacts.push_back({"env-sample.json", dump(j)});
  return out;
}

inline ExperimentOutput run_lpp_tau(const RunConfig& cfg) {
  ExperimentOutput out;
  const auto& p = cfg.lpp_tau;
  const auto model = shape::model_from_law(cfg.law);
  const std::string law = describe(cfg.law);
  CsvWriter csv({"law", "x", "y", "n", "replicas", "mean", "sem", "tilde_tau"});
  Json points = Json::array();
  for (std::size_t k = 0; k < p.points.size(); ++k) {
    const auto [x, y] = p.points[k];
    const std::uint64_t seed = derive_seed(cfg.master_seed, "lpp-tau", k, "point");
    out.seeds["point_" + std::to_string(k)] = seed;
    const auto est = lpp::tau_estimate(cfg.law, x, y, p.sizes, p.replicas, {seed, cfg.workers});
    const double bound = shape::tilde_tau(model, x, y);
    for (const auto& s : est.per_size)
      csv.row({law, num(x), num(y), std::to_string(s.n), std::to_string(s.replicas), num(s.mean), num(s.sem),
               num(bound)});
    const auto& last = est.per_size.back();
    points.push_back({{"x", jnum(x)},
                      {"y", jnum(y)},
                      {"largest_n_mean", jnum(last.mean)},
                      {"largest_n_sem", jnum(last.sem)},
                      {"extrapolated", jnum(est.extrapolated)},
                      {"tilde_tau", jnum(bound)},
                      {"below_bound", last.mean <= bound + 3.0 * last.sem}});
  }
  Json j = law_json(cfg.law);
  j["replicas"] = p.replicas;
  j["sizes"] = p.sizes;
  j["points"] = points;
  out.artifacts.push_back({"lpp-tau.csv", csv.text()});
  out.artifacts.push_back({"lpp-tau.json", dump(j)});
  return out;
}

inline ExperimentOutput run_coupling_audit(const RunConfig& cfg) {
  ExperimentOutput out;
  const auto& p = cfg.coupling_audit;
  out.seeds["audit"] = p.audit_seed;
  const auto z = coupling::audit_Z_distribution(cfg.law, p.samples, p.audit_seed, p.significance);
  const std::uint64_t path_seed = derive_seed(cfg.master_seed, "coupling-audit", 0, "path");
  out.seeds["path"] = path_seed;
  const auto pb = coupling::audit_path_bound(cfg.law, p.path_x, p.path_y, p.path_n, p.path_replicas,
                                             {path_seed, cfg.workers, p.max_cells});

  CsvWriter csv({"replica", "env_seed", "conditional_sum", "coverage_bound", "sampled_u_sum", "path_length",
                 "covers_columns"});
  for (std::size_t k = 0; k < pb.replicas.size(); ++k) {
    const auto& r = pb.replicas[k];
    csv.row({std::to_string(k), std::to_string(r.env_seed), num(r.conditional_sum), num(r.coverage_bound),
             num(r.sampled_u_sum), std::to_string(r.path_length), r.covers_columns ? "true" : "false"});
  }
  Json j = law_json(cfg.law);
  j["z_audit"] = {{"samples", z.samples},
                  {"significance", jnum(z.significance)},
                  {"ks_statistic", jnum(z.ks.statistic)},
                  {"ks_p_value", jnum(z.ks.p_value)},
                  {"mean", jnum(z.mean_z)},
                  {"mean_sem", jnum(z.mean_z_sem)},
                  {"expected_mean", jnum(z.expected_mean)},
                  {"tail_fraction", jnum(z.tail_fraction)},
                  {"expected_tail", jnum(z.expected_tail)},
                  {"zero_u_fraction", jnum(z.zero_u_fraction)},
                  {"expected_zero_u_fraction", jnum(z.expected_zero_u_fraction)},
                  {"ks_pass", z.ks_pass},
                  {"mean_pass", z.mean_pass},
                  {"tail_pass", z.tail_pass}};
  j["path_bound"] = {{"x", jnum(pb.x)},
                     {"y", jnum(pb.y)},
                     {"n", pb.n},
                     {"replicas", pb.replicas.size()},
                     {"conditional_mean", jnum(pb.conditional.mean)},
                     {"conditional_sem", jnum(pb.conditional.sem)},
                     {"sampled_mean", jnum(pb.sampled.mean)},
                     {"sampled_sem", jnum(pb.sampled.sem)},
                     {"lower_bound", jnum(pb.lower_bound)},
                     {"bound_pass", pb.bound_pass},
                     {"coverage_pass", pb.coverage_pass},
                     {"tower_pass", pb.tower_pass}};
  out.artifacts.push_back({"coupling-path.csv", csv.text()});
  out.artifacts.push_back({"coupling-audit.json", dump(j)});
  return out;
}

struct PlateauRow {
  double rho = 0.0;
  double flux = 0.0;  // variational flux over the tilde_tau k
  shape::PlateauVerdict verdict;
};

inline std::vector<PlateauRow> plateau_rows(const shape::ShapeModel& model, const std::vector<double>& grid) {
  std::vector<PlateauRow> rows;
  auto k = [&](double v) { return shape::k_tilde(model, v); };
  for (double rho : grid)
    rows.push_back({rho, shape::flux_from_k(k, rho, shape::default_bracket(model.r)).value,
                    shape::plateau_check(model, rho)});
  return rows;
}

inline ExperimentOutput run_plateau(const RunConfig& cfg) {
  ExperimentOutput out;
  const auto model = shape::model_from_law(cfg.law);
  const auto [lo, hi] = shape::plateau_interval(model);
  const auto rows = plateau_rows(model, plateau_grid(cfg.plateau));

  CsvWriter csv({"rho", "flux_variational", "max_g", "argmax_g", "bound", "inside_interval", "verdict"});
  Json per = Json::array();
  for (const auto& r : rows) {
    const bool inside = r.rho >= lo && r.rho <= hi;
    csv.row({num(r.rho), num(r.flux), num(r.verdict.max_value), num(r.verdict.argmax), num(r.verdict.bound),
             inside ? "true" : "false", r.verdict.pass ? "PASS" : "FAIL"});
    per.push_back({{"rho", jnum(r.rho)}, {"flux", jnum(r.flux)}, {"verdict", r.verdict.pass ? "PASS" : "FAIL"}});
  }
  Json j = law_json(cfg.law);
  j["interval"] = {jnum(lo), jnum(hi)};
  j["plateau_level"] = jnum(model.r / 4.0);
  j["grid"] = per;
  out.artifacts.push_back({"plateau.csv", csv.text()});
  out.artifacts.push_back({"plateau.json", dump(j)});
  return out;
}

struct FluxCurveRun {
  sim::FluxCurve curve;
  double burn_in = 0.0;
};

inline FluxCurveRun flux_curve_run(const RunConfig& cfg) {
  const auto& p = cfg.flux_curve;
  const double r = essential_infimum(cfg.law);
  FluxCurveRun run;
  run.burn_in = p.burn_in ? *p.burn_in : sim::default_burn_in(p.L, r);
  const sim::MeasureParams mp{run.burn_in, p.window, p.batches};
  run.curve = sim::flux_curve(cfg.law, p.L, p.rhos, mp, {cfg.master_seed, "flux-curve", p.realizations, cfg.workers});
  return run;
}

inline void flux_curve_artifacts(const RunConfig& cfg, const FluxCurveRun& run, ExperimentOutput& out) {
  const auto& p = cfg.flux_curve;
  const bool homogeneous = std::holds_alternative<PointMass>(cfg.law);
  const double r = essential_infimum(cfg.law);
  const auto& c = run.curve;

  const std::string law = describe(cfg.law);
  CsvWriter csv({"law", "L", "rho", "N", "burn_in", "window", "batches", "realizations", "estimate", "sem",
                 "homogeneous_exact"});
  for (std::size_t k = 0; k < c.estimates.size(); ++k) {
    const std::size_t n = c.measurements[k * p.realizations].N;
    csv.row({law, std::to_string(p.L), num(c.estimates[k].rho), std::to_string(n), num(run.burn_in), num(p.window),
             std::to_string(p.batches), std::to_string(p.realizations), num(c.estimates[k].value),
             num(c.estimates[k].sem), homogeneous ? num(sim::homogeneous_ring_flux(r, p.L, n)) : ""});
  }
  CsvWriter runs({"rho", "realization", "environment_seed", "placement_seed", "dynamics_seed", "estimate",
                  "batch_sem", "first_half", "second_half", "events"});
  for (std::size_t t = 0; t < c.measurements.size(); ++t) {
    const auto& m = c.measurements[t];
    const std::size_t e = t % p.realizations;
    runs.row({num(m.rho), std::to_string(e), std::to_string(c.environment_seeds[e]), std::to_string(m.placement_seed),
              std::to_string(m.dynamics_seed), num(m.estimate), num(m.sem), num(m.first_half), num(m.second_half),
              std::to_string(m.events)});
  }
  for (std::size_t e = 0; e < c.environment_seeds.size(); ++e)
    out.seeds["environment_" + std::to_string(e)] = c.environment_seeds[e];
  out.artifacts.push_back({"flux-curve.csv", csv.text()});
  out.artifacts.push_back({"flux-curve-runs.csv", runs.text()});
}

inline void flux_curve_summary(const RunConfig& cfg, const FluxCurveRun& run, ExperimentOutput& out) {
  Json j = law_json(cfg.law);
  j["L"] = cfg.flux_curve.L;
  j["burn_in"] = jnum(run.burn_in);
  j["window"] = jnum(cfg.flux_curve.window);
  j["batches"] = cfg.flux_curve.batches;
  j["realizations"] = cfg.flux_curve.realizations;
  out.artifacts.push_back({"flux-curve.json", dump(j)});
}

inline ExperimentOutput run_flux_curve(const RunConfig& cfg) {
  ExperimentOutput out;
  const auto run = flux_curve_run(cfg);
  flux_curve_artifacts(cfg, run, out);
  flux_curve_summary(cfg, run, out);
  return out;
}

// Flux curve and plateau analysis joined on the flux-curve densities.
inline ExperimentOutput run_fundamental_diagram(const RunConfig& cfg) {
  ExperimentOutput out;
  const auto run = flux_curve_run(cfg);
  flux_curve_artifacts(cfg, run, out);
  flux_curve_summary(cfg, run, out);
  auto plateau = run_plateau(cfg);
  for (auto& a : plateau.artifacts) out.artifacts.push_back(std::move(a));

  const auto model = shape::model_from_law(cfg.law);
  const auto [lo, hi] = shape::plateau_interval(model);
  const auto run_rows = plateau_rows(model, cfg.flux_curve.rhos);
  const auto& curve = run.curve;

  CsvWriter csv({"rho", "simulated_flux", "simulated_sem", "variational_flux", "plateau_level", "inside_interval",
                 "plateau_verdict"});
  Json rows = Json::array();
  for (std::size_t k = 0; k < run_rows.size(); ++k) {
    const auto& e = curve.estimates[k];
    const auto& pr = run_rows[k];
    const bool inside = pr.rho >= lo && pr.rho <= hi;
    csv.row({num(pr.rho), num(e.value), num(e.sem), num(pr.flux), num(model.r / 4.0), inside ? "true" : "false",
             pr.verdict.pass ? "PASS" : "FAIL"});
    rows.push_back({{"rho", jnum(pr.rho)},
                    {"simulated_flux", jnum(e.value)},
                    {"simulated_sem", jnum(e.sem)},
                    {"variational_flux", jnum(pr.flux)},
                    {"inside_interval", inside},
                    {"plateau_verdict", pr.verdict.pass ? "PASS" : "FAIL"}});
  }
  Json j = law_json(cfg.law);
  j["interval"] = {jnum(lo), jnum(hi)};
  j["plateau_level"] = jnum(model.r / 4.0);
  j["L"] = cfg.flux_curve.L;
  j["rows"] = rows;
  out.artifacts.push_back({"fundamental-diagram.csv", csv.text()});
  out.artifacts.push_back({"fundamental-diagram.json", dump(j)});
  return out;
}

inline ExperimentOutput run_experiment(const RunConfig& cfg, Experiment e) {
  switch (e) {
    case Experiment::env_sample: return run_env_sample(cfg);
    case Experiment::lpp_tau: return run_lpp_tau(cfg);
    case Experiment::coupling_audit: return run_coupling_audit(cfg);
    case Experiment::plateau: return run_plateau(cfg);
    case Experiment::flux_curve: return run_flux_curve(cfg);
    case Experiment::fundamental_diagram: return run_fundamental_diagram(cfg);
  }
  throw InvariantViolation("unknown experiment");
}

struct RunResult {
  std::filesystem::path directory;
  std::vector<Artifact> artifacts;  // including run.cfg, excluding the manifest
  Json manifest;
};

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Runs `experiment` and writes its artifacts, `run.cfg` (the configuration
/// text exactly as given) and `manifest.json` into cfg.output.
inline RunResult run(const RunConfig& cfg, Experiment experiment, const std::string& config_text) {
  if (cfg.experiment && *cfg.experiment != experiment)
    throw ConfigError("run.experiment", "config names '" + to_string(*cfg.experiment) + "' but '" +
                                            to_string(experiment) + "' was requested");
  const auto started = std::chrono::system_clock::now();
  const auto t0 = std::chrono::steady_clock::now();
  auto out = run_experiment(cfg, experiment);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  RunResult res;
  res.directory = cfg.output;
  std::error_code ec;
  std::filesystem::create_directories(res.directory, ec);
  if (ec) throw ResourceError("cannot create output directory " + cfg.output + ": " + ec.message());

  res.artifacts.push_back({"run.cfg", config_text});
  for (auto& a : out.artifacts) res.artifacts.push_back(std::move(a));

  Json outputs = Json::array();
  for (const auto& a : res.artifacts) {
    write_file((res.directory / a.name).string(), a.content);
    outputs.push_back({{"file", a.name}, {"bytes", a.content.size()}, {"git_sha1", git_blob_sha1(a.content)}});
  }
  RunConfig effective = cfg;
  effective.experiment = experiment;
  res.manifest = Json{{"experiment", to_string(experiment)},
                      {"config", config_text},
                      {"config_canonical", canonical_config(effective)},
                      {"master_seed", cfg.master_seed},
                      {"workers", cfg.workers},
                      {"seeds", out.seeds},
                      {"started_utc", utc_timestamp(started)},
                      {"wall_clock_seconds", jnum(wall)},
                      {"outputs", outputs}};
  write_file((res.directory / "manifest.json").string(), dump(res.manifest));
  return res;
}

}  // namespace dtasep::cli
