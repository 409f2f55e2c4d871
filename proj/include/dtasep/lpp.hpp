#pragma once

// Last-passage percolation on the wedge W = {(i, j) : j >= 0, i + j >= 0}
// with east (1, 0) and northwest (-1, 1) steps.
//
// Both steps keep the diagonal coordinate d = i + j nondecreasing, and the
// cells that can feed a target (I, J) are exactly 0 <= j <= J, 0 <= d <= I + J.
// In (d, j) coordinates the recurrence is the ordinary corner-growth one:
//
//   T(d, j) = Y + max(T(d - 1, j), T(d, j - 1)),
//
// where (d - 1, j) is the east predecessor (i - 1, j) and (d, j - 1) is the
// northwest predecessor (i + 1, j - 1). Tables are stored row-major in (j, d).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dtasep/env.hpp"
#include "dtasep/errors.hpp"
#include "dtasep/parallel.hpp"
#include "dtasep/random.hpp"
#include "dtasep/stats.hpp"

namespace dtasep::lpp {

struct WedgePoint {
  std::int64_t i = 0;
  std::int64_t j = 0;
  friend bool operator==(const WedgePoint&, const WedgePoint&) = default;
};

inline bool in_wedge(WedgePoint p) noexcept { return p.j >= 0 && p.i + p.j >= 0; }

inline std::string to_string(WedgePoint p) {
  return "(" + std::to_string(p.i) + "," + std::to_string(p.j) + ")";
}

inline void require_wedge(WedgePoint p) {
  if (!in_wedge(p)) throw DomainError("point " + to_string(p) + " is outside the wedge");
}

// Column range [-J, I + J] of the environment a table for `target` reads.
inline std::int64_t min_column(WedgePoint target) noexcept { return -target.j; }
inline std::int64_t max_column(WedgePoint target) noexcept { return target.i + target.j; }

/// Y_ij ~ Exp(alpha(i)), a pure function of (weight_seed, i, j).
inline double sample_weight(const Environment& env, std::uint64_t weight_seed, WedgePoint p) {
  require_wedge(p);
  return exponential_from_uniform(cell_uniform(weight_seed, stream::weight_y, p.i, p.j), env.alpha(p.i));
}

namespace detail {

// Unchecked variant for inner loops; the caller guarantees coverage.
struct EnvironmentWeights {
  const Environment& env;
  std::uint64_t seed;
  double operator()(std::int64_t i, std::int64_t j) const noexcept {
    return exponential_from_uniform(cell_uniform(seed, stream::weight_y, i, j), env[i]);
  }
};

inline void require_covers(const Environment& env, WedgePoint target) {
  if (!env.contains(min_column(target)) || !env.contains(max_column(target)))
    throw DomainError("environment does not cover columns [" + std::to_string(min_column(target)) + ", " +
                      std::to_string(max_column(target)) + "]");
}

}  // namespace detail

inline constexpr std::size_t default_max_cells = std::size_t{1} << 26;

/// Full table of T over the trapezoid feeding one target.
class PassageTable {
public:
  PassageTable(WedgePoint target, std::vector<double> values)
      : target_(target), width_(static_cast<std::size_t>(target.i + target.j + 1)), values_(std::move(values)) {}

  WedgePoint target() const noexcept { return target_; }
  std::int64_t rows() const noexcept { return target_.j + 1; }

  bool contains(WedgePoint p) const noexcept {
    return p.j >= 0 && p.j <= target_.j && p.i + p.j >= 0 && p.i + p.j <= target_.i + target_.j;
  }

  double at(WedgePoint p) const {
    if (!contains(p)) throw DomainError("point " + to_string(p) + " is not covered by the table");
    return (*this)(p);
  }

  double operator()(WedgePoint p) const noexcept {
    return values_[static_cast<std::size_t>(p.j) * width_ + static_cast<std::size_t>(p.i + p.j)];
  }

private:
  WedgePoint target_;
  std::size_t width_;
  std::vector<double> values_;
};

/// Fills T over every cell that can feed `target`. `weight(i, j)` supplies
/// Y_ij; tests inject fixed weights through it.
template <class WeightFn>
PassageTable passage_table(WeightFn&& weight, WedgePoint target, std::size_t max_cells = default_max_cells) {
  require_wedge(target);
  const auto width = static_cast<std::size_t>(target.i + target.j + 1);
  const auto rows = static_cast<std::size_t>(target.j + 1);
  if (width > max_cells / rows)
    throw ResourceError("passage table for target " + to_string(target) + " needs " + std::to_string(width) +
                        " x " + std::to_string(rows) + " cells, over the budget of " + std::to_string(max_cells));
  std::vector<double> t(width * rows);
  for (std::size_t j = 0; j < rows; ++j) {
    double* row = t.data() + j * width;
    const double* below = j > 0 ? row - width : nullptr;
    const auto jj = static_cast<std::int64_t>(j);
    for (std::size_t d = 0; d < width; ++d) {
      double best = -std::numeric_limits<double>::infinity();
      if (d > 0) best = row[d - 1];
      if (below && below[d] > best) best = below[d];
      if (d == 0 && j == 0) best = 0.0;
      row[d] = best + weight(static_cast<std::int64_t>(d) - jj, jj);
    }
  }
  return PassageTable(target, std::move(t));
}

inline PassageTable passage_table(const Environment& env, std::uint64_t weight_seed, WedgePoint target,
                                  std::size_t max_cells = default_max_cells) {
  require_wedge(target);
  detail::require_covers(env, target);
  return passage_table(detail::EnvironmentWeights{env, weight_seed}, target, max_cells);
}

/// T(target) using a single row of O(I + J) memory. No backtracking possible.
template <class WeightFn>
double last_passage_time(WeightFn&& weight, WedgePoint target) {
  require_wedge(target);
  const auto width = static_cast<std::size_t>(target.i + target.j + 1);
  std::vector<double> row(width, -std::numeric_limits<double>::infinity());
  for (std::int64_t j = 0; j <= target.j; ++j) {
    double left = j == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < width; ++d) {
      const double best = left > row[d] ? left : row[d];
      row[d] = best + weight(static_cast<std::int64_t>(d) - j, j);
      left = row[d];
    }
  }
  return row.back();
}

inline double last_passage_time(const Environment& env, std::uint64_t weight_seed, WedgePoint target) {
  require_wedge(target);
  detail::require_covers(env, target);
  return last_passage_time(detail::EnvironmentWeights{env, weight_seed}, target);
}

// ---------------------------------------------------------------------------
// Paths

struct LatticePath {
  std::vector<WedgePoint> vertices;
};

inline bool is_step(WedgePoint from, WedgePoint to) noexcept {
  const auto di = to.i - from.i;
  const auto dj = to.j - from.j;
  return (di == 1 && dj == 0) || (di == -1 && dj == 1);
}

inline void validate_path(const LatticePath& path) {
  if (path.vertices.empty()) throw PathError("empty path");
  for (std::size_t k = 0; k < path.vertices.size(); ++k) {
    if (!in_wedge(path.vertices[k])) throw PathError("vertex " + to_string(path.vertices[k]) + " leaves the wedge");
    if (k > 0 && !is_step(path.vertices[k - 1], path.vertices[k]))
      throw PathError("illegal step " + to_string(path.vertices[k - 1]) + " -> " + to_string(path.vertices[k]));
  }
}

/// An argmax path from (0, 0) to `target`. When both predecessors carry the
/// same passage time the east one, (i - 1, j), is taken.
inline LatticePath backtrack_path(const PassageTable& table, WedgePoint target) {
  require_wedge(target);
  if (!table.contains(target)) throw DomainError("target " + to_string(target) + " is not covered by the table");
  std::vector<WedgePoint> rev;
  rev.reserve(static_cast<std::size_t>(target.i + 2 * target.j + 1));
  WedgePoint p = target;
  rev.push_back(p);
  while (!(p.i == 0 && p.j == 0)) {
    const WedgePoint east{p.i - 1, p.j};
    const WedgePoint northwest_from{p.i + 1, p.j - 1};
    const bool has_east = in_wedge(east) && table.contains(east);
    const bool has_nw = p.j > 0 && table.contains(northwest_from);
    if (has_east && (!has_nw || table(east) >= table(northwest_from)))
      p = east;
    else if (has_nw)
      p = northwest_from;
    else
      throw InvariantViolation("no predecessor while backtracking from " + to_string(p));
    rev.push_back(p);
  }
  return LatticePath{{rev.rbegin(), rev.rend()}};
}

/// Sorted distinct columns visited by a valid path.
inline std::vector<std::int64_t> column_coverage(const LatticePath& path) {
  validate_path(path);
  std::int64_t lo = path.vertices.front().i;
  std::int64_t hi = lo;
  for (const auto& v : path.vertices) {
    lo = std::min(lo, v.i);
    hi = std::max(hi, v.i);
  }
  // Unit steps in i mean the visited columns form the contiguous range [lo, hi].
  std::vector<std::int64_t> cols;
  cols.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (std::int64_t c = lo; c <= hi; ++c) cols.push_back(c);
  return cols;
}

template <class WeightFn>
double path_weight(const LatticePath& path, WeightFn&& weight) {
  double s = 0.0;
  for (const auto& v : path.vertices) s += weight(v.i, v.j);
  return s;
}

// ---------------------------------------------------------------------------
// Limit-shape estimation

inline WedgePoint scaled_point(double x, double y, std::int64_t n) {
  return {static_cast<std::int64_t>(std::floor(x * static_cast<double>(n))),
          static_cast<std::int64_t>(std::floor(y * static_cast<double>(n)))};
}

struct TauSizeEstimate {
  std::int64_t n = 0;
  std::size_t replicas = 0;
  double mean = 0.0;  // of T(floor(xn), floor(yn)) / n
  double sem = 0.0;
};

struct TauEstimate {
  double x = 0.0;
  double y = 0.0;
  std::vector<TauSizeEstimate> per_size;
  double point_estimate = 0.0;  // largest-n mean
  // Two-point fit of mean_n = tau + c n^(-2/3) on the last two sizes.
  // Diagnostic only.
  double extrapolated = 0.0;
};

struct TauOptions {
  std::uint64_t master_seed = 1;
  unsigned workers = 1;
};

/// Monte Carlo estimate of T(floor(xn), floor(yn)) / n over a ladder of sizes.
///
/// Replica k uses environment seed derive_seed(master, "lpp-tau", k, "alpha")
/// and weight seed derive_seed(master, "lpp-tau", k, "Y") at every size, so
/// the ladder is evaluated on one nested weight field per replica.
inline TauEstimate tau_estimate(const DisorderLaw& law, double x, double y, const std::vector<std::int64_t>& sizes,
                                std::size_t replicas, const TauOptions& opt = {}) {
  validate(law);
  if (!(y >= 0.0) || !(x + y >= 0.0)) throw DomainError("(x, y) must satisfy y >= 0 and x + y >= 0");
  if (sizes.empty()) throw ParameterError("sizes must be nonempty");
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k] <= 0) throw ParameterError("sizes must be positive");
    if (k > 0 && sizes[k] <= sizes[k - 1]) throw ParameterError("sizes must be strictly increasing");
  }
  if (replicas < 2) throw ParameterError("replicas must be >= 2");

  const std::size_t ns = sizes.size();
  std::vector<double> samples(ns * replicas);
  parallel_for(replicas, opt.workers, [&](std::size_t rep) {
    const std::uint64_t env_seed = derive_seed(opt.master_seed, "lpp-tau", rep, "alpha");
    const std::uint64_t y_seed = derive_seed(opt.master_seed, "lpp-tau", rep, "Y");
    for (std::size_t s = 0; s < ns; ++s) {
      const WedgePoint target = scaled_point(x, y, sizes[s]);
      const Environment env(law, env_seed, min_column(target), max_column(target));
      samples[s * replicas + rep] = last_passage_time(env, y_seed, target) / static_cast<double>(sizes[s]);
    }
  });

  TauEstimate out;
  out.x = x;
  out.y = y;
  for (std::size_t s = 0; s < ns; ++s) {
    const auto ms = mean_sem(std::span<const double>(samples.data() + s * replicas, replicas));
    out.per_size.push_back({sizes[s], replicas, ms.mean, ms.sem});
  }
  out.point_estimate = out.per_size.back().mean;
  out.extrapolated = out.point_estimate;
  if (ns >= 2) {
    const auto& a = out.per_size[ns - 2];
    const auto& b = out.per_size[ns - 1];
    const double wa = std::pow(static_cast<double>(a.n), 2.0 / 3.0);
    const double wb = std::pow(static_cast<double>(b.n), 2.0 / 3.0);
    out.extrapolated = (b.mean * wb - a.mean * wa) / (wb - wa);
  }
  return out;
}

}  // namespace dtasep::lpp
