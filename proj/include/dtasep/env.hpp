#pragma once

// Disorder laws for the jump rates alpha(i) and seeded environments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "dtasep/errors.hpp"
#include "dtasep/random.hpp"

namespace dtasep {

struct PointMass {
  double rate = 1.0;
};

// alpha = slow with probability p_slow, fast otherwise.
struct TwoPoint {
  double slow = 0.5;
  double fast = 1.0;
  double p_slow = 0.5;
};

struct Uniform {
  double lo = 0.5;
  double hi = 1.0;
};

using SimpleLaw = std::variant<PointMass, TwoPoint, Uniform>;

// alpha = base_rate except on an epsilon fraction of sites, where it is drawn
// from `slow`.
struct Mixture {
  double base_rate = 1.0;
  double epsilon = 0.1;
  SimpleLaw slow = PointMass{0.5};
};

using DisorderLaw = std::variant<PointMass, TwoPoint, Uniform, Mixture>;

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline void require_rate(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ParameterError(std::string(what) + " must be a positive finite rate");
}

inline void require_probability(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw ParameterError(std::string(what) + " must lie in [0, 1]");
}

inline void validate_simple(const SimpleLaw& law) {
  std::visit(overloaded{
                 [](const PointMass& l) { require_rate(l.rate, "pointmass rate"); },
                 [](const TwoPoint& l) {
                   require_rate(l.slow, "twopoint r");
                   require_rate(l.fast, "twopoint b");
                   require_probability(l.p_slow, "twopoint p");
                   if (l.fast < l.slow) throw ParameterError("twopoint b must be >= r");
                 },
                 [](const Uniform& l) {
                   require_rate(l.lo, "uniform r");
                   require_rate(l.hi, "uniform b");
                   if (l.hi < l.lo) throw ParameterError("uniform b must be >= r");
                 },
             },
             law);
}

inline double simple_infimum(const SimpleLaw& law) {
  return std::visit(overloaded{
                        [](const PointMass& l) { return l.rate; },
                        [](const TwoPoint& l) { return l.p_slow > 0.0 ? l.slow : l.fast; },
                        [](const Uniform& l) { return l.lo; },
                    },
                    law);
}

inline double simple_supremum(const SimpleLaw& law) {
  return std::visit(overloaded{
                        [](const PointMass& l) { return l.rate; },
                        [](const TwoPoint& l) { return l.p_slow < 1.0 ? l.fast : l.slow; },
                        [](const Uniform& l) { return l.hi; },
                    },
                    law);
}

inline double simple_mean_inverse(const SimpleLaw& law) {
  return std::visit(overloaded{
                        [](const PointMass& l) { return 1.0 / l.rate; },
                        [](const TwoPoint& l) {
                          return l.p_slow / l.slow + (1.0 - l.p_slow) / l.fast;
                        },
                        [](const Uniform& l) {
                          if (l.hi == l.lo) return 1.0 / l.lo;
                          return (std::log(l.hi) - std::log(l.lo)) / (l.hi - l.lo);
                        },
                    },
                    law);
}

inline double simple_draw(const SimpleLaw& law, double u) {
  return std::visit(overloaded{
                        [](const PointMass& l) { return l.rate; },
                        [u](const TwoPoint& l) { return u < l.p_slow ? l.slow : l.fast; },
                        [u](const Uniform& l) { return std::max(l.lo, l.lo + (l.hi - l.lo) * u); },
                    },
                    law);
}

inline SimpleLaw as_simple(const DisorderLaw& law) {
  return std::visit(
      [](const auto& l) -> SimpleLaw {
        if constexpr (std::is_same_v<std::decay_t<decltype(l)>, Mixture>)
          throw InvariantViolation("mixture is not a simple law");
        else
          return l;
      },
      law);
}

}  // namespace detail

inline void validate(const DisorderLaw& law) {
  if (const auto* m = std::get_if<Mixture>(&law)) {
    detail::require_rate(m->base_rate, "mixture base rate");
    detail::require_probability(m->epsilon, "mixture epsilon");
    detail::validate_simple(m->slow);
    return;
  }
  detail::validate_simple(detail::as_simple(law));
}

/// Essential infimum r of the law: inf{s : P[alpha >= s] < 1}.
inline double essential_infimum(const DisorderLaw& law) {
  validate(law);
  if (const auto* m = std::get_if<Mixture>(&law)) {
    if (m->epsilon == 0.0) return m->base_rate;
    if (m->epsilon == 1.0) return detail::simple_infimum(m->slow);
    return std::min(m->base_rate, detail::simple_infimum(m->slow));
  }
  return detail::simple_infimum(detail::as_simple(law));
}

// Largest point of the support.
inline double essential_supremum(const DisorderLaw& law) {
  validate(law);
  if (const auto* m = std::get_if<Mixture>(&law)) {
    if (m->epsilon == 0.0) return m->base_rate;
    if (m->epsilon == 1.0) return detail::simple_supremum(m->slow);
    return std::max(m->base_rate, detail::simple_supremum(m->slow));
  }
  return detail::simple_supremum(detail::as_simple(law));
}

// E[1/alpha], in closed form for every variant.
inline double mean_inverse_rate(const DisorderLaw& law) {
  validate(law);
  if (const auto* m = std::get_if<Mixture>(&law))
    return (1.0 - m->epsilon) / m->base_rate + m->epsilon * detail::simple_mean_inverse(m->slow);
  return detail::simple_mean_inverse(detail::as_simple(law));
}

/// mu = 1/r - E[1/alpha]. Zero exactly for degenerate laws; clamped at zero
/// against rounding in the closed forms.
inline double mu(const DisorderLaw& law) {
  const double r = essential_infimum(law);
  return std::max(0.0, 1.0 / r - mean_inverse_rate(law));
}

// Rate at index i; a pure function of (law, seed, i).
inline double rate_at(const DisorderLaw& law, std::uint64_t seed, std::int64_t i) {
  const double u = cell_uniform(seed, stream::alpha, i);
  if (const auto* m = std::get_if<Mixture>(&law)) {
    if (!(u < m->epsilon)) return m->base_rate;
    return detail::simple_draw(m->slow, cell_uniform(seed, stream::alpha_aux, i));
  }
  return detail::simple_draw(detail::as_simple(law), u);
}

// Short tag/parameter description, e.g. "twopoint(r=0.5,b=1,p=0.5)".
inline std::string describe(const DisorderLaw& law) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  auto simple = [&os](const SimpleLaw& s) {
    std::visit(detail::overloaded{
                   [&](const PointMass& l) { os << "pointmass(r=" << l.rate << ")"; },
                   [&](const TwoPoint& l) {
                     os << "twopoint(r=" << l.slow << ",b=" << l.fast << ",p=" << l.p_slow << ")";
                   },
                   [&](const Uniform& l) { os << "uniform(r=" << l.lo << ",b=" << l.hi << ")"; },
               },
               s);
  };
  if (const auto* m = std::get_if<Mixture>(&law)) {
    os << "mixture(base=" << m->base_rate << ",epsilon=" << m->epsilon << ",slow=";
    simple(m->slow);
    os << ")";
  } else {
    simple(detail::as_simple(law));
  }
  return os.str();
}

/// A realization of i.i.d. rates over the index range [first, last].
///
/// Rates depend only on (law, seed, i), so two environments with the same
/// law and seed agree on every index they share.
class Environment {
public:
  Environment(DisorderLaw law, std::uint64_t seed, std::int64_t first, std::int64_t last)
      : law_(std::move(law)), seed_(seed), first_(first), r_(essential_infimum(law_)) {
    if (last < first) throw ParameterError("environment range must be nonempty");
    rates_.reserve(static_cast<std::size_t>(last - first + 1));
    for (std::int64_t i = first; i <= last; ++i) rates_.push_back(rate_at(law_, seed_, i));
  }

  const DisorderLaw& law() const noexcept { return law_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::int64_t first() const noexcept { return first_; }
  std::int64_t last() const noexcept { return first_ + static_cast<std::int64_t>(rates_.size()) - 1; }
  std::size_t size() const noexcept { return rates_.size(); }
  double infimum() const noexcept { return r_; }
  const std::vector<double>& rates() const noexcept { return rates_; }

  bool contains(std::int64_t i) const noexcept { return i >= first_ && i <= last(); }

  double alpha(std::int64_t i) const {
    if (!contains(i)) throw DomainError("index " + std::to_string(i) + " outside environment range");
    return rates_[static_cast<std::size_t>(i - first_)];
  }

  // Unchecked access for inner loops.
  double operator[](std::int64_t i) const noexcept {
    return rates_[static_cast<std::size_t>(i - first_)];
  }

private:
  DisorderLaw law_;
  std::uint64_t seed_;
  std::int64_t first_;
  double r_;
  std::vector<double> rates_;
};

inline Environment sample_environment(const DisorderLaw& law, std::uint64_t seed, std::int64_t first,
                                      std::int64_t last) {
  return Environment(law, seed, first, last);
}

}  // namespace dtasep
