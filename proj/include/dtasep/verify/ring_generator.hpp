#pragma once

// Stationary law of ring TASEP by a direct solve of the generator over all
// configurations with N particles on L sites. Independent of the simulator.

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dtasep::oracle {

struct RingStationary {
  std::vector<std::uint32_t> states;  // bitmasks, bit i = site i occupied
  std::vector<double> pi;
  std::vector<double> bond_flux;  // per bond i -> i+1
};

inline RingStationary solve_ring(const std::vector<double>& rates, int n_particles) {
  const int L = static_cast<int>(rates.size());
  RingStationary out;
  for (std::uint32_t s = 0; s < (1u << L); ++s)
    if (__builtin_popcount(s) == n_particles) out.states.push_back(s);
  const std::size_t m = out.states.size();
  std::map<std::uint32_t, std::size_t> index;
  for (std::size_t k = 0; k < m; ++k) index[out.states[k]] = k;

  // Rows of A are the balance equations pi Q = 0, i.e. Q^T pi = 0.
  std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
  for (std::size_t k = 0; k < m; ++k) {
    const std::uint32_t s = out.states[k];
    for (int i = 0; i < L; ++i) {
      const int nx = (i + 1) % L;
      if ((s >> i & 1u) && !(s >> nx & 1u)) {
        const std::uint32_t t = (s & ~(1u << i)) | (1u << nx);
        const std::size_t kt = index.at(t);
        a[kt][k] += rates[i];
        a[k][k] -= rates[i];
      }
    }
  }
  // Replace the last equation by normalization.
  for (std::size_t c = 0; c < m; ++c) a[m - 1][c] = 1.0;
  a[m - 1][m] = 1.0;

  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-300) throw std::runtime_error("singular generator");
    std::swap(a[piv], a[col]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c <= m; ++c) a[r][c] -= f * a[col][c];
    }
  }
  out.pi.resize(m);
  for (std::size_t k = 0; k < m; ++k) out.pi[k] = a[k][m] / a[k][k];

  out.bond_flux.assign(L, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const std::uint32_t s = out.states[k];
    for (int i = 0; i < L; ++i) {
      const int nx = (i + 1) % L;
      if ((s >> i & 1u) && !(s >> nx & 1u)) out.bond_flux[i] += out.pi[k] * rates[i];
    }
  }
  return out;
}

}  // namespace dtasep::oracle
