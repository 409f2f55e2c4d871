#pragma once

// Coupling of the disordered weights with homogeneous rate-r exponentials:
// Z = Y + U where Y ~ Exp(alpha(i)) and U = B * E with B ~ Ber(1 - r/alpha(i)),
// E ~ Exp(r), so that Z ~ Exp(r) whatever alpha(i) is.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dtasep/env.hpp"
#include "dtasep/errors.hpp"
#include "dtasep/lpp.hpp"
#include "dtasep/parallel.hpp"
#include "dtasep/random.hpp"
#include "dtasep/stats.hpp"

namespace dtasep::coupling {

using lpp::WedgePoint;

struct CouplingSample {
  WedgePoint point;
  double y = 0.0;
  double u = 0.0;
  double z = 0.0;
  double alpha = 0.0;
};

/// E[U | environment] = (1 - r/alpha) / r = 1/r - 1/alpha.
inline double conditional_mean_U(double alpha, double r) {
  if (!(r > 0.0)) throw DomainError("r must be positive");
  if (!(alpha >= r)) throw DomainError("alpha must be >= r");
  return 1.0 / r - 1.0 / alpha;
}

/// U_ij = B * E. B and E come from two disjoint streams of the per-cell
/// counter, so they are independent of each other and of Y.
inline double sample_U(const Environment& env, std::uint64_t u_seed, WedgePoint p) {
  lpp::require_wedge(p);
  const double alpha = env.alpha(p.i);
  const double r = env.infimum();
  if (alpha < r) throw InvariantViolation("alpha(" + std::to_string(p.i) + ") is below the essential infimum");
  const double keep = 1.0 - r / alpha;
  if (!(cell_uniform(u_seed, stream::coupling_b, p.i, p.j) < keep)) return 0.0;
  return exponential_from_uniform(cell_uniform(u_seed, stream::coupling_e, p.i, p.j), r);
}

inline CouplingSample sample_coupling(const Environment& env, std::uint64_t y_seed, std::uint64_t u_seed,
                                      WedgePoint p) {
  CouplingSample s;
  s.point = p;
  s.alpha = env.alpha(p.i);
  s.y = lpp::sample_weight(env, y_seed, p);
  s.u = sample_U(env, u_seed, p);
  s.z = s.y + s.u;
  return s;
}

// ---------------------------------------------------------------------------
// Distributional audit of Z

struct ZAuditReport {
  std::string law;
  std::size_t samples = 0;
  double r = 0.0;
  double significance = 0.01;
  KsResult ks;
  double mean_z = 0.0;
  double mean_z_sem = 0.0;
  double expected_mean = 0.0;
  double tail_threshold = 0.0;  // 2/r
  double tail_fraction = 0.0;
  double expected_tail = 0.0;  // e^-2
  double tail_sigma = 0.0;
  double zero_u_fraction = 0.0;
  double expected_zero_u_fraction = 0.0;  // E[r / alpha]; only reported
  bool ks_pass = false;
  bool mean_pass = false;
  bool tail_pass = false;
  bool pass() const { return ks_pass && mean_pass && tail_pass; }
};

inline constexpr std::uint64_t default_audit_seed = 0x5eed'a0d1'7c0f'fee5ULL;

/// Draws `samples` cells (k, 0), each with a fresh alpha(k), forms Z = Y + U
/// and compares the sample with Exp(r): KS at `significance`, mean within
/// 3 sem, and P[Z > 2/r] within 3 binomial sigma of e^-2.
inline ZAuditReport audit_Z_distribution(const DisorderLaw& law, std::size_t samples,
                                         std::uint64_t seed = default_audit_seed, double significance = 0.01) {
  if (samples < 1000) throw ParameterError("audit needs at least 1000 samples");
  const auto last = static_cast<std::int64_t>(samples) - 1;
  const Environment env(law, derive_seed(seed, "coupling-audit", 0, "alpha"), 0, last);
  const std::uint64_t y_seed = derive_seed(seed, "coupling-audit", 0, "Y");
  const std::uint64_t u_seed = derive_seed(seed, "coupling-audit", 0, "U");
  const double r = env.infimum();

  ZAuditReport rep;
  rep.law = describe(law);
  rep.samples = samples;
  rep.r = r;
  rep.significance = significance;
  rep.tail_threshold = 2.0 / r;
  rep.expected_mean = 1.0 / r;
  rep.expected_tail = std::exp(-2.0);

  std::vector<double> z(samples);
  std::size_t tail = 0;
  std::size_t zeros = 0;
  double r_over_alpha = 0.0;
  for (std::int64_t k = 0; k <= last; ++k) {
    const auto s = sample_coupling(env, y_seed, u_seed, {k, 0});
    z[static_cast<std::size_t>(k)] = s.z;
    if (s.z > rep.tail_threshold) ++tail;
    if (s.u == 0.0) ++zeros;
    r_over_alpha += r / s.alpha;
  }
  const double n = static_cast<double>(samples);
  const auto ms = mean_sem(z);
  rep.mean_z = ms.mean;
  rep.mean_z_sem = ms.sem;
  rep.tail_fraction = static_cast<double>(tail) / n;
  rep.tail_sigma = std::sqrt(rep.expected_tail * (1.0 - rep.expected_tail) / n);
  rep.zero_u_fraction = static_cast<double>(zeros) / n;
  rep.expected_zero_u_fraction = r_over_alpha / n;
  rep.ks = ks_test(std::move(z), [r](double v) { return v <= 0.0 ? 0.0 : -std::expm1(-r * v); });

  rep.ks_pass = rep.ks.p_value >= significance;
  rep.mean_pass = std::abs(rep.mean_z - rep.expected_mean) <= 3.0 * rep.mean_z_sem;
  rep.tail_pass = std::abs(rep.tail_fraction - rep.expected_tail) <= 3.0 * rep.tail_sigma;
  return rep;
}

// ---------------------------------------------------------------------------
// Lower-bound mechanism along maximal paths

struct PathBoundReplica {
  std::uint64_t env_seed = 0;
  double conditional_sum = 0.0;  // sum over the argmax path of E[U | F], / n
  double coverage_bound = 0.0;   // sum over columns 0..floor(xn) of E[U | F], / n
  double sampled_u_sum = 0.0;    // (sum_path Z - sum_path Y) / n with U drawn
  std::size_t path_length = 0;
  bool covers_columns = false;   // every column in [0, floor(xn)] visited
};

struct PathBoundReport {
  std::string law;
  double x = 0.0;
  double y = 0.0;
  std::int64_t n = 0;
  double r = 0.0;
  double mu = 0.0;
  std::vector<PathBoundReplica> replicas;
  MeanSem conditional;
  MeanSem sampled;
  double lower_bound = 0.0;  // mu * x
  bool bound_pass = false;   // conditional.mean >= mu x - 3 sem
  bool coverage_pass = false;  // per replica: conditional_sum >= coverage_bound and all columns covered
  bool tower_pass = false;   // |sampled.mean - conditional.mean| <= 3 combined sem
  bool pass() const { return bound_pass && coverage_pass && tower_pass; }
};

struct PathBoundOptions {
  std::uint64_t master_seed = 1;
  unsigned workers = 1;
  std::size_t max_cells = lpp::default_max_cells;
};

/// For each replica: the argmax path of the (environment, Y) field to
/// (floor(xn), floor(yn)) is computed without looking at U, then
/// E[U | F] = 1/r - 1/alpha(i) is summed along it. The conditional sum must
/// dominate the column-coverage sum exactly and average at least mu x.
///
/// The conditional sum is accumulated per column, in column order, from
/// visit counts; floating-point addition and multiplication by an integer
/// count >= 1 are monotone, so the replica-wise comparison against the
/// coverage sum is exact rather than up to rounding.
inline PathBoundReport audit_path_bound(const DisorderLaw& law, double x, double y, std::int64_t n,
                                        std::size_t replicas, const PathBoundOptions& opt = {}) {
  validate(law);
  if (x < 0.0) throw ParameterError("path-bound audit supports x >= 0 only");
  if (!(y >= 0.0)) throw DomainError("(x, y) must satisfy y >= 0 and x + y >= 0");
  if (n <= 0) throw ParameterError("n must be positive");
  if (replicas < 2) throw ParameterError("replicas must be >= 2");

  PathBoundReport rep;
  rep.law = describe(law);
  rep.x = x;
  rep.y = y;
  rep.n = n;
  rep.r = essential_infimum(law);
  rep.mu = mu(law);
  rep.lower_bound = rep.mu * x;
  rep.replicas.resize(replicas);

  const WedgePoint target = lpp::scaled_point(x, y, n);
  const double nd = static_cast<double>(n);
  parallel_for(replicas, opt.workers, [&](std::size_t k) {
    auto& out = rep.replicas[k];
    out.env_seed = derive_seed(opt.master_seed, "coupling-path", k, "alpha");
    const std::uint64_t y_seed = derive_seed(opt.master_seed, "coupling-path", k, "Y");
    const std::uint64_t u_seed = derive_seed(opt.master_seed, "coupling-path", k, "U");
    const Environment env(law, out.env_seed, lpp::min_column(target), lpp::max_column(target));
    const double r = env.infimum();

    const auto table = lpp::passage_table(env, y_seed, target, opt.max_cells);
    const auto path = lpp::backtrack_path(table, target);
    out.path_length = path.vertices.size();

    const std::int64_t lo = env.first();
    std::vector<std::int64_t> visits(env.size(), 0);
    double z_sum = 0.0;
    double y_sum = 0.0;
    for (const auto& v : path.vertices) {
      ++visits[static_cast<std::size_t>(v.i - lo)];
      const auto s = sample_coupling(env, y_seed, u_seed, v);
      z_sum += s.z;
      y_sum += s.y;
    }
    double cond = 0.0;
    double cover = 0.0;
    out.covers_columns = true;
    for (std::int64_t c = lo; c <= env.last(); ++c) {
      const auto count = visits[static_cast<std::size_t>(c - lo)];
      const double m = conditional_mean_U(env[c], r);
      if (count > 0) cond += static_cast<double>(count) * m;
      if (c >= 0 && c <= target.i) {
        cover += m;
        if (count == 0) out.covers_columns = false;
      }
    }
    out.conditional_sum = cond / nd;
    out.coverage_bound = cover / nd;
    out.sampled_u_sum = (z_sum - y_sum) / nd;
  });

  std::vector<double> cond(replicas), sampled(replicas);
  rep.coverage_pass = true;
  for (std::size_t k = 0; k < replicas; ++k) {
    cond[k] = rep.replicas[k].conditional_sum;
    sampled[k] = rep.replicas[k].sampled_u_sum;
    if (!rep.replicas[k].covers_columns || cond[k] < rep.replicas[k].coverage_bound) rep.coverage_pass = false;
  }
  rep.conditional = mean_sem(cond);
  rep.sampled = mean_sem(sampled);
  rep.bound_pass = rep.conditional.mean >= rep.lower_bound - 3.0 * rep.conditional.sem;
  rep.tower_pass = std::abs(rep.sampled.mean - rep.conditional.mean) <=
                   3.0 * combined_sem(rep.sampled.sem, rep.conditional.sem);
  return rep;
}

}  // namespace dtasep::coupling
