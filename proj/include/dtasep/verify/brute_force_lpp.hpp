#pragma once

// Exhaustive path enumeration for small targets; independent of the DP.

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "dtasep/lpp.hpp"

namespace dtasep::oracle {

using lpp::WedgePoint;

struct BruteForceResult {
  double best = -std::numeric_limits<double>::infinity();
  std::size_t paths = 0;
  std::vector<std::vector<WedgePoint>> argmax_paths;
};

// Visits every east/northwest path from (0,0) to target inside the wedge.
inline void enumerate_paths(WedgePoint target, const std::function<void(const std::vector<WedgePoint>&)>& visit) {
  std::vector<WedgePoint> path{{0, 0}};
  std::function<void()> rec = [&] {
    const WedgePoint p = path.back();
    if (p == target) {
      visit(path);
      return;
    }
    // East raises i + j by one, northwest raises j by one; neither can be undone.
    const WedgePoint east{p.i + 1, p.j};
    const WedgePoint nw{p.i - 1, p.j + 1};
    for (const auto& q : {east, nw}) {
      if (!lpp::in_wedge(q)) continue;
      if (q.j > target.j || q.i + q.j > target.i + target.j) continue;
      path.push_back(q);
      rec();
      path.pop_back();
    }
  };
  rec();
}

template <class W>
BruteForceResult brute_force(W&& weight, WedgePoint target) {
  BruteForceResult out;
  enumerate_paths(target, [&](const std::vector<WedgePoint>& path) {
    ++out.paths;
    double s = 0.0;
    for (const auto& v : path) s += weight(v.i, v.j);
    if (s > out.best) {
      out.best = s;
      out.argmax_paths.assign(1, path);
    } else if (s == out.best) {
      out.argmax_paths.push_back(path);
    }
  });
  return out;
}

}  // namespace dtasep::oracle
