#pragma once

// Counter-based random numbers. Every draw in the library is a pure function
// of (seed, stream, coordinates), so replicas are replayable in isolation and
// growing a sampling window never perturbs values that were already drawn.

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace dtasep {

// SplitMix64 finalizer; a bijection on 64-bit words with good avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a over the bytes of a label.
constexpr std::uint64_t hash_label(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace stream {
inline constexpr std::uint64_t alpha = hash_label("alpha");
inline constexpr std::uint64_t alpha_aux = hash_label("alpha/aux");
inline constexpr std::uint64_t weight_y = hash_label("Y");
inline constexpr std::uint64_t coupling_b = hash_label("U/bernoulli");
inline constexpr std::uint64_t coupling_e = hash_label("U/exponential");
}  // namespace stream

// 64 random bits for cell (i, j) of the given stream under `seed`.
constexpr std::uint64_t cell_bits(std::uint64_t seed, std::uint64_t stream_tag, std::int64_t i,
                                  std::int64_t j = 0) noexcept {
  std::uint64_t h = mix64(seed ^ mix64(stream_tag));
  h = mix64(h ^ static_cast<std::uint64_t>(i) * 0xd1342543de82ef95ULL);
  h = mix64(h ^ static_cast<std::uint64_t>(j) * 0xaf251af3b0f025b5ULL);
  return h;
}

// Maps 64 bits to the open interval (0, 1); 0 and 1 are never returned.
constexpr double to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

inline double cell_uniform(std::uint64_t seed, std::uint64_t stream_tag, std::int64_t i,
                           std::int64_t j = 0) noexcept {
  return to_open_unit(cell_bits(seed, stream_tag, i, j));
}

// Inverse-CDF exponential with the given rate from a uniform in (0, 1).
inline double exponential_from_uniform(double u, double rate) noexcept {
  return -std::log(u) / rate;
}

/// Derives an independent 64-bit seed for (experiment, replica, stream).
///
/// The tuple is absorbed field by field through the SplitMix64 finalizer,
/// keyed by the master seed. Labels are hashed with FNV-1a first, so
/// `derive_seed(m, "lpp-tau", 3, "Y")` and `derive_seed(m, "lpp-tau", 3, "U")`
/// land on unrelated streams.
constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view experiment,
                                    std::uint64_t replica, std::string_view stream_label) noexcept {
  std::uint64_t h = mix64(master_seed ^ 0x6a09e667f3bcc909ULL);
  h = mix64(h ^ hash_label(experiment));
  h = mix64(h ^ replica);
  h = mix64(h ^ hash_label(stream_label));
  return h;
}

// Sequential generator for the event-driven simulator. The mt19937_64 engine
// is bit-specified by the standard; the std:: distributions are not, so draws
// go through the conversions above.
class EventRng {
public:
  explicit EventRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }
  double uniform() { return to_open_unit(engine_()); }
  double exponential(double rate) { return exponential_from_uniform(uniform(), rate); }

private:
  std::mt19937_64 engine_;
};

}  // namespace dtasep
