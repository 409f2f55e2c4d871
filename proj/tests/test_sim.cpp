#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "dtasep/sim.hpp"
#include "dtasep/verify/ring_generator.hpp"

using namespace dtasep;
using namespace dtasep::sim;

TEST(RateTree, FindAndTotal) {
  const std::vector<double> w{1.0, 0.0, 3.0, 0.5, 0.0};
  RateTree t(w);
  EXPECT_DOUBLE_EQ(t.total(), 4.5);
  EXPECT_EQ(t.find(0.0), 0u);
  EXPECT_EQ(t.find(0.999), 0u);
  EXPECT_EQ(t.find(1.0), 2u);
  EXPECT_EQ(t.find(3.999), 2u);
  EXPECT_EQ(t.find(4.2), 3u);
  t.add(1, 2.0);
  EXPECT_DOUBLE_EQ(t.total(), 6.5);
  EXPECT_EQ(t.find(1.5), 1u);
}

TEST(InitRing, ParticleCountAndValidation) {
  const auto env = sample_environment(PointMass{1.0}, 1, 0, 9);
  const auto s = init_ring(env, 10, 0.5, 3);
  EXPECT_EQ(s.particles(), 5u);
  EXPECT_EQ(std::accumulate(s.occupancy().begin(), s.occupancy().end(), 0), 5);
  EXPECT_TRUE(s.index_consistent());
  EXPECT_THROW(init_ring(env, 10, 0.01, 3), ParameterError);  // N = 0
  EXPECT_THROW(init_ring(env, 10, 0.99, 3), ParameterError);  // N = L
  EXPECT_THROW(init_ring(env, 10, 1.0, 3), ParameterError);
  EXPECT_THROW(init_ring(env, 3, 0.5, 3), ParameterError);
  EXPECT_THROW(init_ring(env, 20, 0.5, 3), DomainError);  // environment too short
}

TEST(InitRing, PlacementIsReproducible) {
  const auto env = sample_environment(PointMass{1.0}, 1, 0, 99);
  EXPECT_EQ(init_ring(env, 100, 0.3, 8).occupancy(), init_ring(env, 100, 0.3, 8).occupancy());
  EXPECT_NE(init_ring(env, 100, 0.3, 8).occupancy(), init_ring(env, 100, 0.3, 9).occupancy());
}

TEST(RingState, AlternatingConfigurationIsFullyActive) {
  const RingState s(std::vector<double>(8, 0.7), {1, 0, 1, 0, 1, 0, 1, 0});
  EXPECT_EQ(s.active_count(), 4u);
  EXPECT_NEAR(s.total_rate(), 4 * 0.7, 1e-15);
}

TEST(RingState, ClusteredBlockHasOneActiveBond) {
  const RingState s(std::vector<double>(8, 1.0), {0, 1, 1, 1, 1, 0, 0, 0});
  EXPECT_EQ(s.active_count(), 1u);
  EXPECT_TRUE(s.active(4));
}

TEST(Step, SingleActiveBondAlwaysChosen) {
  RingState s(std::vector<double>(6, 1.0), {1, 1, 1, 0, 0, 0});
  EventRng rng(5);
  const auto e = s.step(rng);
  EXPECT_EQ(e.bond, 2u);
  EXPECT_EQ(s.occupancy(), (std::vector<std::uint8_t>{1, 1, 0, 1, 0, 0}));
}

TEST(Step, SelectionProportionalToRates) {
  const RingState start({1.0, 1.0, 3.0, 1.0, 1.0, 1.0}, {1, 0, 1, 0, 0, 0});
  EventRng rng(99);
  const int n = 100000;
  int first = 0;
  for (int k = 0; k < n; ++k) {
    RingState s = start;
    first += s.step(rng).bond == 0;
  }
  EXPECT_NEAR(static_cast<double>(first) / n, 0.25, 3.0 * std::sqrt(0.25 * 0.75 / n));
}

TEST(Step, JammedRingIsAnInvariantViolation) {
  RingState s(std::vector<double>(4, 1.0), {1, 1, 1, 1});
  EventRng rng(1);
  EXPECT_THROW(s.step(rng), InvariantViolation);
}

TEST(Step, InvariantsHoldOverAMillionEvents) {
  const auto env = sample_environment(Uniform{0.5, 1.0}, 4, 0, 199);
  RingState s = init_ring(env, 200, 0.37, 6);
  EventRng rng(7);
  for (int k = 0; k < 1'000'000; ++k) {
    s.step(rng);
    if (k % 100'000 == 0) {
      ASSERT_TRUE(s.index_consistent());
    }
  }
  EXPECT_TRUE(s.index_consistent());
  EXPECT_EQ(std::accumulate(s.occupancy().begin(), s.occupancy().end(), std::size_t{0}), s.particles());
  const auto total = std::accumulate(s.crossings().begin(), s.crossings().end(), std::uint64_t{0});
  EXPECT_EQ(total, s.events());
  EXPECT_EQ(s.events(), 1'000'000u);
}

// The generator solve is the oracle; it must confirm the uniform stationary
// law before the closed form is used anywhere else.
TEST(RingGenerator, HomogeneousStationaryLawIsUniform) {
  for (int L = 2; L <= 8; ++L) {
    for (int n = 1; n < L; ++n) {
      const auto sol = oracle::solve_ring(std::vector<double>(L, 1.0), n);
      const double uniform = 1.0 / static_cast<double>(sol.states.size());
      for (double p : sol.pi) ASSERT_NEAR(p, uniform, 1e-12) << L << " " << n;
      for (double f : sol.bond_flux)
        ASSERT_NEAR(f, homogeneous_ring_flux(1.0, L, n), 1e-12) << L << " " << n;
    }
  }
}

TEST(RingGenerator, DisorderedBondFluxesAreEqual) {
  const auto env = sample_environment(TwoPoint{0.5, 1.0, 0.5}, 3, 0, 7);
  const auto sol = oracle::solve_ring(env.rates(), 3);
  for (double f : sol.bond_flux) EXPECT_NEAR(f, sol.bond_flux[0], 1e-12);
}

TEST(MeasureFlux, FourSiteRingTwoParticles) {
  const double r = 1.0;
  const auto env = sample_environment(PointMass{r}, 1, 0, 3);
  const auto m = measure_flux(env, 4, 0.5, {50.0, 40000.0, 16}, 1, 2);
  EXPECT_EQ(m.N, 2u);
  EXPECT_NEAR(m.estimate, r / 3.0, 3.0 * m.sem);
}

TEST(MeasureFlux, SmallHomogeneousRingsMatchExactFlux) {
  for (std::size_t L = 4; L <= 10; L += 2) {
    for (double rho : {0.25, 0.5, 0.75}) {
      const auto env = sample_environment(PointMass{1.0}, 1, 0, static_cast<std::int64_t>(L) - 1);
      const auto m = measure_flux(env, L, rho, {20.0, 20000.0, 16}, L, 3);
      EXPECT_NEAR(m.estimate, homogeneous_ring_flux(1.0, L, m.N), 3.0 * m.sem) << L << " " << rho;
    }
  }
}

TEST(MeasureFlux, SmallDisorderedRingMatchesGeneratorSolve) {
  const auto env = sample_environment(Uniform{0.5, 1.0}, 17, 0, 6);
  const auto sol = oracle::solve_ring(env.rates(), 3);
  const auto m = measure_flux(env, 7, 3.0 / 7.0, {20.0, 40000.0, 16}, 1, 2);
  EXPECT_NEAR(m.estimate, sol.bond_flux[0], 3.0 * m.sem);
}

TEST(MeasureFlux, HomogeneousRingAtLargeL) {
  // Batches shorter than the ring relaxation time (~L^1.5) understate the
  // error, so the comparison uses the spread over independent runs.
  FluxCurveOptions opt;
  opt.realizations = 12;
  const auto c = flux_curve(PointMass{1.0}, 256, {0.5}, {default_burn_in(256, 1.0), 4000.0, 16}, opt);
  EXPECT_NEAR(c.estimates[0].value, homogeneous_ring_flux(1.0, 256, 128), 3.0 * c.estimates[0].sem);
  EXPECT_LT(c.estimates[0].sem, 0.002);

  const auto s = flux_curve(PointMass{0.5}, 256, {0.3}, {default_burn_in(256, 0.5), 4000.0, 16}, opt);
  EXPECT_NEAR(s.estimates[0].value, homogeneous_ring_flux(0.5, 256, s.measurements[0].N), 3.0 * s.estimates[0].sem);
  EXPECT_NEAR(s.estimates[0].value, 0.105, 0.002);
}

TEST(MeasureFlux, PerBondCrossingsDifferByAtMostN) {
  // Conservation: crossings of neighbouring bonds differ by the occupancy
  // change of the site between them.
  const auto env = sample_environment(TwoPoint{0.5, 1.0, 0.5}, 2, 0, 127);
  const auto m = measure_flux(env, 128, 0.5, {500.0, 2000.0, 8}, 5, 6);
  const auto [lo, hi] = std::minmax_element(m.bond_crossings.begin(), m.bond_crossings.end());
  EXPECT_LE(*hi - *lo, m.N);
  EXPECT_EQ(std::accumulate(m.batch_crossings.begin(), m.batch_crossings.end(), std::uint64_t{0}), m.events);
}

TEST(MeasureFlux, Validation) {
  const auto env = sample_environment(PointMass{1.0}, 1, 0, 15);
  EXPECT_THROW(measure_flux(env, 16, 0.5, {0.0, 10.0, 4}, 1, 2), ParameterError);
  EXPECT_THROW(measure_flux(env, 16, 0.5, {0.0, 0.0, 8}, 1, 2), ParameterError);
  EXPECT_THROW(measure_flux(env, 16, 0.0, {0.0, 10.0, 8}, 1, 2), ParameterError);
}

TEST(FluxCurve, HomogeneousShapePeaksAtOneHalf) {
  std::vector<double> grid;
  for (int k = 1; k <= 9; ++k) grid.push_back(0.1 * k);
  const auto c = flux_curve(PointMass{1.0}, 128, grid, {500.0, 1500.0, 8}, {3});
  ASSERT_EQ(c.estimates.size(), 9u);
  std::size_t argmax = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto& e = c.estimates[k];
    EXPECT_EQ(e.source, shape::FluxSource::simulation);
    EXPECT_NEAR(e.value, homogeneous_ring_flux(1.0, 128, particle_count(128, grid[k])), 4.0 * e.sem + 1e-3);
    if (e.value > c.estimates[argmax].value) argmax = k;
  }
  EXPECT_NEAR(grid[argmax], 0.5, 0.1 + 1e-12);
}

TEST(FluxCurve, CrossRealizationModeAndDeterminism) {
  const std::vector<double> grid{0.4, 0.6};
  const FluxCurveOptions opt{11, "t", 3, 1};
  const auto a = flux_curve(TwoPoint{0.5, 1.0, 0.5}, 64, grid, {100.0, 400.0, 8}, opt);
  auto opt2 = opt;
  opt2.workers = 4;
  const auto b = flux_curve(TwoPoint{0.5, 1.0, 0.5}, 64, grid, {100.0, 400.0, 8}, opt2);
  ASSERT_EQ(a.measurements.size(), 6u);
  ASSERT_EQ(a.environment_seeds.size(), 3u);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(a.estimates[k].value, b.estimates[k].value);
    EXPECT_EQ(a.estimates[k].sem, b.estimates[k].sem);
  }
}

TEST(FluxCurve, ParticleHoleDiagnostic) {
  // Not an exact symmetry under site disorder; only checked loosely.
  const auto c = flux_curve(TwoPoint{0.5, 1.0, 0.5}, 128, {0.3, 0.7}, {2000.0, 4000.0, 8}, {5});
  const double diff = std::abs(c.estimates[0].value - c.estimates[1].value);
  EXPECT_LT(diff, 0.02);
}
