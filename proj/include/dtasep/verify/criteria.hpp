#pragma once

// Acceptance criteria, shared by the acceptance test binary and the CLI's
// `verify` subcommand. Every tolerance is fixed here.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dtasep/coupling.hpp"
#include "dtasep/env.hpp"
#include "dtasep/lpp.hpp"
#include "dtasep/random.hpp"
#include "dtasep/shape.hpp"
#include "dtasep/sim.hpp"
#include "dtasep/stats.hpp"
#include "dtasep/verify/brute_force_lpp.hpp"
#include "dtasep/verify/ring_generator.hpp"

namespace dtasep::verify {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::vector<std::string> details;
};

struct VerifyOptions {
  std::uint64_t master_seed = 20261016;
  unsigned workers = 1;
  // Optional progress sink for long criteria.
  std::function<void(const std::string&)> log;
};

namespace detail {

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

inline void note(const VerifyOptions& opt, const std::string& s) {
  if (opt.log) opt.log(s);
}

}  // namespace detail

// 1. Homogeneous ring flux against the exact finite-L value, after the
//    generator solve confirms that value at L <= 8.
inline CriterionResult homogeneous_flux_exactness(const VerifyOptions& opt) {
  using detail::fmt;
  CriterionResult res{1, "homogeneous flux exactness", true, {}};

  double worst_oracle = 0.0;
  for (int L = 2; L <= 8; ++L)
    for (int n = 1; n < L; ++n) {
      const auto sol = oracle::solve_ring(std::vector<double>(static_cast<std::size_t>(L), 1.0), n);
      for (double f : sol.bond_flux)
        worst_oracle = std::max(worst_oracle, std::abs(f - sim::homogeneous_ring_flux(1.0, L, n)));
    }
  const bool oracle_ok = worst_oracle < 1e-12;
  res.details.push_back(fmt("generator solve L<=8: max |flux - N(L-N)/(L(L-1))| = %.3g", worst_oracle));
  res.pass = oracle_ok;

  // Error bars come from independent runs: batch means inside one run
  // understate them unless batches exceed the relaxation time ~L^1.5.
  constexpr std::size_t L = 256;
  constexpr double sem_target = 0.002;
  sim::FluxCurveOptions fo{derive_seed(opt.master_seed, "criterion-1", 0, "master"), "criterion-1", 16, opt.workers};
  for (int k = 1; k <= 9; ++k) {
    const double rho = 0.1 * k;
    sim::MeasureParams p{sim::default_burn_in(L, 1.0), 2500.0, 16};
    sim::FluxCurve c;
    for (int attempt = 0; attempt < 4; ++attempt) {
      c = sim::flux_curve(PointMass{1.0}, L, {rho}, p, fo);
      if (c.estimates[0].sem < sem_target) break;
      p.window *= 4.0;
    }
    const auto& e = c.estimates[0];
    const std::size_t n = c.measurements[0].N;
    const double exact = sim::homogeneous_ring_flux(1.0, L, n);
    const bool ok = e.sem < sem_target && std::abs(e.value - exact) <= 3.0 * e.sem;
    res.pass = res.pass && ok;
    res.details.push_back(fmt("rho=%.1f N=%zu estimate=%.6f exact=%.6f sem=%.2e (16 runs x window %g) %s", rho, n,
                              e.value, exact, e.sem, p.window, ok ? "ok" : "FAIL"));
  }
  return res;
}

inline const std::vector<std::pair<double, double>>& shape_points() {
  static const std::vector<std::pair<double, double>> pts{{0.0, 1.0}, {1.0, 1.0}, {-0.5, 1.0}};
  return pts;
}

inline const std::vector<std::int64_t>& shape_ladder() {
  static const std::vector<std::int64_t> ladder{250, 500, 1000, 2000};
  return ladder;
}

inline constexpr std::size_t shape_replicas = 64;

// 2. Homogeneous limit shape: ladder means nondecreasing within 2 sem and
//    below the closed form plus 3 sem.
inline CriterionResult homogeneous_limit_shape(const VerifyOptions& opt) {
  using detail::fmt;
  CriterionResult res{2, "homogeneous limit shape", true, {}};
  for (const auto& [x, y] : shape_points()) {
    const auto est = lpp::tau_estimate(PointMass{1.0}, x, y, shape_ladder(), shape_replicas,
                                       {derive_seed(opt.master_seed, "criterion-2", 0, "master"), opt.workers});
    const double bound = shape::tau_hom(1.0, x, y);
    for (std::size_t k = 0; k < est.per_size.size(); ++k) {
      const auto& s = est.per_size[k];
      bool ok = s.mean <= bound + 3.0 * s.sem;
      if (k > 0) {
        const auto& prev = est.per_size[k - 1];
        ok = ok && s.mean >= prev.mean - 2.0 * combined_sem(s.sem, prev.sem);
      }
      res.pass = res.pass && ok;
      res.details.push_back(fmt("(x,y)=(%g,%g) n=%lld mean=%.5f sem=%.5f tau_hom=%.5f %s", x, y,
                                static_cast<long long>(s.n), s.mean, s.sem, bound, ok ? "ok" : "FAIL"));
    }
    detail::note(opt, res.details.back());
  }
  return res;
}

// 3. Disorder bound: ladder means stay below tilde_tau plus 3 sem.
inline CriterionResult disorder_bound(const VerifyOptions& opt) {
  using detail::fmt;
  CriterionResult res{3, "disorder bound tau <= tilde_tau", true, {}};
  const DisorderLaw law = TwoPoint{0.5, 1.0, 0.5};
  const auto model = shape::model_from_law(law);
  for (const auto& [x, y] : shape_points()) {
    const auto est = lpp::tau_estimate(law, x, y, shape_ladder(), shape_replicas,
                                       {derive_seed(opt.master_seed, "criterion-3", 0, "master"), opt.workers});
    const double bound = shape::tilde_tau(model, x, y);
    for (const auto& s : est.per_size) {
      const bool ok = s.mean <= bound + 3.0 * s.sem;
      res.pass = res.pass && ok;
      res.details.push_back(fmt("(x,y)=(%g,%g) n=%lld mean=%.5f sem=%.5f tilde_tau=%.5f %s", x, y,
                                static_cast<long long>(s.n), s.mean, s.sem, bound, ok ? "ok" : "FAIL"));
    }
    detail::note(opt, res.details.back());
  }
  return res;
}

// 4. Coupling audits: Z ~ Exp(r) and the conditional path-sum bound.
inline CriterionResult coupling_audits(const VerifyOptions& opt) {
  using detail::fmt;
  CriterionResult res{4, "coupling audits", true, {}};
  const DisorderLaw law = TwoPoint{0.5, 1.0, 0.5};
  const auto z = coupling::audit_Z_distribution(law, 100000, coupling::default_audit_seed, 0.01);
  res.details.push_back(fmt("Z audit: KS D=%.5f p=%.4f (alpha 0.01) mean=%.5f tail=%.5f %s", z.ks.statistic,
                            z.ks.p_value, z.mean_z, z.tail_fraction, z.ks_pass ? "ok" : "FAIL"));
  const auto pb = coupling::audit_path_bound(law, 1.0, 1.0, 500, 200,
                                             {derive_seed(opt.master_seed, "criterion-4", 0, "master"), opt.workers});
  const bool bound_ok = pb.bound_pass;
  res.details.push_back(fmt("path bound: conditional mean=%.5f sem=%.5f mu*x=%.5f %s", pb.conditional.mean,
                            pb.conditional.sem, pb.lower_bound, bound_ok ? "ok" : "FAIL"));
  res.details.push_back(fmt("path bound: per-replica coverage %s, sampled-U mean=%.5f (tower check %s)",
                            pb.coverage_pass ? "ok" : "FAIL", pb.sampled.mean, pb.tower_pass ? "ok" : "FAIL"));
  res.pass = z.ks_pass && bound_ok;
  return res;
}

// 5. Plateau analytics for r = 0.5, mu = 0.5.
inline CriterionResult plateau_analytics(const VerifyOptions&) {
  using detail::fmt;
  CriterionResult res{5, "plateau analytics", true, {}};
  const shape::ShapeModel model{0.5, 0.5};
  const double level = model.r / 4.0;
  auto k = [&](double v) { return shape::k_tilde(model, v); };
  auto flux = [&](double rho) { return shape::flux_from_k(k, rho, shape::default_bracket(model.r)).value; };

  double worst_inside = 0.0;
  for (int step = 0; step <= 25; ++step) {
    const double rho = 0.4375 + 0.005 * step;
    if (rho > 0.5625 + 1e-12) break;
    worst_inside = std::max(worst_inside, std::abs(flux(rho) - level));
  }
  const bool inside_ok = worst_inside <= 1e-6;
  res.details.push_back(fmt("inside [0.4375, 0.5625]: max |f - 0.125| = %.3g %s", worst_inside, inside_ok ? "ok" : "FAIL"));

  const double below = flux(0.4375 - 0.02);
  const double above = flux(0.5625 + 0.02);
  const bool outside_ok = below < level - 1e-4 && above < level - 1e-4;
  res.details.push_back(fmt("f(0.4175)=%.7f f(0.5825)=%.7f (< 0.1249) %s", below, above, outside_ok ? "ok" : "FAIL"));

  int agree = 0;
  int total = 0;
  int passes = 0;
  for (int step = 1; step < 200; ++step) {
    const double rho = 0.005 * step;
    const bool by_flux = flux(rho) >= level - 1e-6;
    const bool by_max = shape::plateau_check(model, rho).pass;
    agree += by_flux == by_max;
    passes += by_max;
    ++total;
  }
  const bool chain_ok = agree == total;
  res.details.push_back(fmt("biconditional on 0.005-grid: %d/%d agree, %d plateau points %s", agree, total, passes,
                            chain_ok ? "ok" : "FAIL"));
  res.pass = inside_ok && outside_ok && chain_ok;
  return res;
}

// 6. One-sided finite differences of g at 0 against (2 - 4 rho)/r +/- mu.
inline CriterionResult derivative_formulas(const VerifyOptions& opt) {
  using detail::fmt;
  CriterionResult res{6, "one-sided derivative formulas", true, {}};
  std::mt19937_64 gen(derive_seed(opt.master_seed, "criterion-6", 0, "triples"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double r = 0.2 + 1.8 * unit(gen);
    const double m = 0.95 * unit(gen) / r;
    const double rho = 0.05 + 0.9 * unit(gen);
    const shape::ShapeModel model{r, m};
    const double h = 1e-6;
    const double g0 = shape::g_profile(model, rho, 0.0);
    const double left = (g0 - shape::g_profile(model, rho, -h)) / h;
    const double right = (shape::g_profile(model, rho, h) - g0) / h;
    const double base = (2.0 - 4.0 * rho) / r;
    const double err = std::max(std::abs(left - (base + m)), std::abs(right - (base - m)));
    worst = std::max(worst, err);
    if (err > 1e-4) {
      res.pass = false;
      res.details.push_back(fmt("r=%.4f mu=%.4f rho=%.4f error %.3g FAIL", r, m, rho, err));
    }
  }
  res.details.push_back(fmt("20 triples, max error %.3g (tolerance 1e-4)", worst));
  return res;
}

struct EmpiricalPlateauParams {
  std::vector<std::size_t> sizes{512, 2048, 8192};
  std::vector<double> rhos{0.46, 0.50, 0.54};
  std::size_t environments = 4;
  // Window length per L in time units; burn-in is sim::default_burn_in.
  std::function<double(std::size_t)> window = [](std::size_t L) {
    return L <= 512 ? 200000.0 : L <= 2048 ? 80000.0 : 40000.0;
  };
};

// 7. Finite-L surrogate for the plateau: flat across rho within each L,
//    nonincreasing in L, and close to r/4 at the largest L.
inline CriterionResult empirical_plateau(const VerifyOptions& opt, const EmpiricalPlateauParams& pp = {}) {
  using detail::fmt;
  CriterionResult res{7, "empirical plateau", true, {}};
  const DisorderLaw law = TwoPoint{0.5, 1.0, 0.5};
  const double r = essential_infimum(law);
  const double level = r / 4.0;
  const std::size_t nl = pp.sizes.size();
  const std::size_t nr = pp.rhos.size();
  const std::size_t ne = pp.environments;

  std::vector<MeanSem> agg(nl * nr);
  for (std::size_t li = 0; li < nl; ++li) {
    const std::size_t L = pp.sizes[li];
    const sim::MeasureParams mp{sim::default_burn_in(L, r), pp.window(L), 16};
    std::vector<double> est(nr * ne);
    parallel_for(nr * ne, opt.workers, [&](std::size_t t) {
      const std::size_t ri = t / ne;
      const std::size_t e = t % ne;
      const Environment env(law, derive_seed(opt.master_seed, "criterion-7", e, "alpha"), 0,
                            static_cast<std::int64_t>(L) - 1);
      const std::uint64_t key = (li * nr + ri) * ne + e;
      est[t] = sim::measure_flux(env, L, pp.rhos[ri], mp, derive_seed(opt.master_seed, "criterion-7", key, "placement"),
                                 derive_seed(opt.master_seed, "criterion-7", key, "dynamics"))
                   .estimate;
    });
    for (std::size_t ri = 0; ri < nr; ++ri) {
      agg[li * nr + ri] = mean_sem(std::span<const double>(est.data() + ri * ne, ne));
      std::string per;
      for (std::size_t e = 0; e < ne; ++e) per += fmt(" %.5f", est[ri * ne + e]);
      res.details.push_back(fmt("L=%zu rho=%.2f mean=%.5f sem=%.5f per-environment:", L, pp.rhos[ri],
                                agg[li * nr + ri].mean, agg[li * nr + ri].sem) + per);
      detail::note(opt, res.details.back());
    }
  }

  bool flat = true;
  for (std::size_t li = 0; li < nl; ++li)
    for (std::size_t a = 0; a < nr; ++a)
      for (std::size_t b = a + 1; b < nr; ++b) {
        const auto& x = agg[li * nr + a];
        const auto& y = agg[li * nr + b];
        if (std::abs(x.mean - y.mean) > 3.0 * combined_sem(x.sem, y.sem)) {
          flat = false;
          res.details.push_back(fmt("(a) L=%zu rho %.2f vs %.2f differ by %.5f > 3 sem %.5f", pp.sizes[li], pp.rhos[a],
                                    pp.rhos[b], std::abs(x.mean - y.mean), 3.0 * combined_sem(x.sem, y.sem)));
        }
      }
  res.details.push_back(std::string("(a) flatness within each L: ") + (flat ? "ok" : "FAIL"));

  bool monotone = true;
  for (std::size_t li = 1; li < nl; ++li)
    for (std::size_t ri = 0; ri < nr; ++ri) {
      const auto& small = agg[(li - 1) * nr + ri];
      const auto& large = agg[li * nr + ri];
      if (large.mean > small.mean + 2.0 * combined_sem(small.sem, large.sem)) {
        monotone = false;
        res.details.push_back(fmt("(b) rho=%.2f: L=%zu mean %.5f exceeds L=%zu mean %.5f by more than 2 sem",
                                  pp.rhos[ri], pp.sizes[li], large.mean, pp.sizes[li - 1], small.mean));
      }
    }
  res.details.push_back(std::string("(b) nonincreasing in L: ") + (monotone ? "ok" : "FAIL"));

  bool band = true;
  for (std::size_t ri = 0; ri < nr; ++ri) {
    const double v = agg[(nl - 1) * nr + ri].mean;
    const bool ok = v >= level - 0.01 && v <= level + 0.01;
    band = band && ok;
    res.details.push_back(fmt("(b) L=%zu rho=%.2f mean=%.5f in [%.3f, %.3f]: %s", pp.sizes.back(), pp.rhos[ri], v,
                              level - 0.01, level + 0.01, ok ? "ok" : "FAIL"));
  }
  res.pass = flat && monotone && band;
  return res;
}

// 8. Passage table against exhaustive path enumeration, exact equality.
inline CriterionResult small_instance_equivalence(const VerifyOptions& opt) {
  using detail::fmt;
  CriterionResult res{8, "small-instance oracle equivalence", true, {}};
  std::mt19937_64 gen(derive_seed(opt.master_seed, "criterion-8", 0, "instances"));
  std::exponential_distribution<double> expo(1.0);
  int mismatches = 0;
  std::size_t paths = 0;
  for (int inst = 0; inst < 500; ++inst) {
    // Steps to (i, j) number i + 2j; keep them <= 12.
    std::uniform_int_distribution<std::int64_t> jd(0, 6);
    const std::int64_t j = jd(gen);
    std::uniform_int_distribution<std::int64_t> id(-j, 12 - 2 * j);
    const lpp::WedgePoint target{id(gen), j};
    const std::int64_t width = target.i + target.j + 1;
    std::vector<double> w(static_cast<std::size_t>(width * (j + 1)));
    for (auto& v : w) v = expo(gen);
    auto weight = [&](std::int64_t i, std::int64_t jj) { return w[static_cast<std::size_t>(jj * width + i + jj)]; };
    const auto bf = oracle::brute_force(weight, target);
    paths += bf.paths;
    if (lpp::passage_table(weight, target).at(target) != bf.best) ++mismatches;
  }
  res.pass = mismatches == 0;
  res.details.push_back(fmt("500 instances, %zu paths enumerated, %d mismatches", paths, mismatches));
  return res;
}

inline CriterionResult run_criterion(int id, const VerifyOptions& opt) {
  switch (id) {
    case 1: return homogeneous_flux_exactness(opt);
    case 2: return homogeneous_limit_shape(opt);
    case 3: return disorder_bound(opt);
    case 4: return coupling_audits(opt);
    case 5: return plateau_analytics(opt);
    case 6: return derivative_formulas(opt);
    case 7: return empirical_plateau(opt);
    case 8: return small_instance_equivalence(opt);
    default: throw ParameterError("unknown acceptance criterion " + std::to_string(id));
  }
}

inline std::string summary_line(const CriterionResult& r) {
  return std::string(r.pass ? "[PASS] " : "[FAIL] ") + "criterion " + std::to_string(r.id) + ": " + r.name;
}

}  // namespace dtasep::verify
