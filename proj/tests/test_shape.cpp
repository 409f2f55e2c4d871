#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dtasep/shape.hpp"

using namespace dtasep;
using namespace dtasep::shape;

namespace {
const ShapeModel kModel{0.5, 0.5};

double tau_hom_1(double x, double y) { return tau_hom(1.0, x, y); }
}  // namespace

TEST(TauHom, ClosedFormValues) {
  EXPECT_DOUBLE_EQ(tau_hom(0.5, 0.0, 1.0), 8.0);
  EXPECT_DOUBLE_EQ(tau_hom(1.0, 1.0, 0.0), 1.0);
  for (double r : {0.3, 1.0, 2.5}) EXPECT_DOUBLE_EQ(tau_hom(r, -1.0, 1.0), 1.0 / r);
  EXPECT_THROW(tau_hom(1.0, -2.0, 1.0), DomainError);
  EXPECT_THROW(tau_hom(1.0, 0.0, -0.1), DomainError);
  EXPECT_THROW(tau_hom(0.0, 0.0, 1.0), ParameterError);
}

TEST(TauHom, PositivelyOneHomogeneous) {
  for (double x = -1.0; x <= 2.0; x += 0.25)
    for (double y = 1.0; y <= 3.0; y += 0.5)
      for (double c : {0.1, 0.5, 3.0, 17.0})
        EXPECT_NEAR(tau_hom(0.7, c * x, c * y), c * tau_hom(0.7, x, y), 1e-12 * c * tau_hom(0.7, x, y));
}

TEST(TauHom, MidpointConcave) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int k = 0; k < 2000; ++k) {
    const double y1 = u(gen), y2 = u(gen);
    const double x1 = u(gen) - y1, x2 = u(gen) - y2;  // x + y >= 0
    const double mid = tau_hom(0.5, 0.5 * (x1 + x2), 0.5 * (y1 + y2));
    EXPECT_GE(mid + 1e-12, 0.5 * (tau_hom(0.5, x1, y1) + tau_hom(0.5, x2, y2)));
  }
}

TEST(TildeTau, Values) {
  EXPECT_DOUBLE_EQ(tilde_tau(kModel, 0.0, 1.0), 8.0);
  const double s = std::sqrt(2.0) + 1.0;
  EXPECT_NEAR(tilde_tau(kModel, 1.0, 1.0), 2.0 * s * s - 0.5, 1e-12);
  EXPECT_NEAR(tilde_tau(kModel, 1.0, 1.0), 11.156854249492380, 1e-12);
  EXPECT_THROW(tilde_tau(kModel, -3.0, 1.0), DomainError);
}

TEST(TildeTau, BelowHomogeneousWithEqualityOnAxis) {
  for (double x = -1.0; x <= 2.0; x += 0.125) {
    for (double y = 1.0; y <= 2.0; y += 0.5) {
      EXPECT_EQ(tilde_tau({0.5, 0.0}, x, y), tau_hom(0.5, x, y));
      if (x == 0.0)
        EXPECT_EQ(tilde_tau(kModel, x, y), tau_hom(0.5, x, y));
      else
        EXPECT_LT(tilde_tau(kModel, x, y), tau_hom(0.5, x, y));
    }
  }
}

TEST(KHom, Values) {
  for (double r : {0.5, 1.0, 2.0}) {
    EXPECT_DOUBLE_EQ(k_hom(r, 0.0), r / 4.0);
    EXPECT_DOUBLE_EQ(k_hom(r, -r), r);
    EXPECT_DOUBLE_EQ(k_hom(r, -r * (1.0 + 1e-12)), r * (1.0 + 1e-12));
    EXPECT_NEAR(k_hom(r, -r * (1.0 - 1e-9)), r, 1e-8);
    EXPECT_DOUBLE_EQ(k_hom(r, r), 0.0);
    EXPECT_DOUBLE_EQ(k_hom(r, 3.0 * r), 0.0);
    EXPECT_DOUBLE_EQ(k_hom(r, -2.0 * r), 2.0 * r);
  }
}

TEST(HFromTau, HomogeneousInverse) {
  for (double r : {0.5, 1.0}) {
    auto tau = [r](double x, double y) { return tau_hom(r, x, y); };
    EXPECT_NEAR(h_from_tau(tau, 4.0 / r, 0.0, {r}), 1.0, 1e-9);
  }
  EXPECT_NEAR(h_from_tau(tau_hom_1, 2.0, 0.5), 0.28125, 1e-9);
}

TEST(HFromTau, WedgeEdgeClamp) {
  // x <= -rt: tau(x, -x) = -x / r > t already at the ray base.
  EXPECT_EQ(h_from_tau(tau_hom_1, 2.0, -2.5), 2.5);
  EXPECT_EQ(h_from_tau(tau_hom_1, 2.0, -3.0), 3.0);
  // x >= rt: tau(x, 0) = x / r.
  EXPECT_EQ(h_from_tau(tau_hom_1, 2.0, 2.5), 0.0);
}

TEST(HFromTau, MatchesTTimesKHom) {
  for (double r : {0.4, 1.0})
    for (double t : {0.5, 1.0, 3.0})
      for (double x = -2.0; x <= 2.0; x += 0.1) {
        auto tau = [r](double a, double b) { return tau_hom(r, a, b); };
        EXPECT_NEAR(h_from_tau(tau, t, x, {r}), t * k_hom(r, x / t), 1e-9) << r << " " << t << " " << x;
      }
}

TEST(HFromTau, BracketError) {
  auto flat = [](double, double) { return 0.0; };
  EXPECT_THROW(h_from_tau(flat, 1.0, 0.0), BracketError);
  EXPECT_THROW(h_from_tau(tau_hom_1, 0.0, 0.0), ParameterError);
}

TEST(FluxFromK, HomogeneousClosedForm) {
  auto k1 = [](double v) { return k_hom(1.0, v); };
  const auto f = flux_from_k(k1, 0.3, default_bracket(1.0));
  EXPECT_NEAR(f.value, 0.21, 1e-9);
  EXPECT_EQ(f.source, FluxSource::variational);
  EXPECT_EQ(f.sem, 0.0);
  for (double r : {0.5, 2.0}) {
    auto k = [r](double v) { return k_hom(r, v); };
    EXPECT_NEAR(flux_from_k(k, 0.5, default_bracket(r)).value, r / 4.0, 1e-9);
  }
}

TEST(FluxFromK, EndpointsOfDensityRange) {
  auto k1 = [](double v) { return k_hom(1.0, v); };
  EXPECT_NEAR(flux_from_k(k1, 0.0, default_bracket(1.0)).value, 0.0, 1e-9);
  EXPECT_NEAR(flux_from_k(k1, 1.0, default_bracket(1.0)).value, 0.0, 1e-9);
  EXPECT_THROW(flux_from_k(k1, 1.5, default_bracket(1.0)), ParameterError);
}

TEST(FluxFromK, TildePipelineAtPlateauCenter) {
  auto k = [](double v) { return k_tilde(kModel, v); };
  EXPECT_NEAR(flux_from_k(k, 0.5, default_bracket(kModel.r)).value, 0.125, 1e-8);
}

TEST(FluxFromK, UnboundedObjectiveIsABracketError) {
  auto linear = [](double v) { return -2.0 * v; };
  EXPECT_THROW(flux_from_k(linear, 0.0, default_bracket(1.0)), BracketError);
}

TEST(FluxFromK, ConsistencySquareWithHomogeneousFlux) {
  for (double r : {0.5, 1.0}) {
    auto tau = [r](double x, double y) { return tau_hom(r, x, y); };
    auto k = [&](double v) { return h_from_tau(tau, 1.0, v, {r}); };
    for (int step = 1; step <= 19; ++step) {
      const double rho = 0.05 * step;
      EXPECT_NEAR(flux_from_k(k, rho, default_bracket(r)).value, r * rho * (1.0 - rho), 1e-6) << r << " " << rho;
    }
  }
}

TEST(GProfile, ValueAtOriginAndDomain) {
  EXPECT_DOUBLE_EQ(g_profile(kModel, 0.3, 0.0), 8.0);
  const auto [lo, hi] = g_domain(0.25);
  EXPECT_DOUBLE_EQ(lo, -1.0 / 0.75);
  EXPECT_DOUBLE_EQ(hi, 4.0);
  EXPECT_NO_THROW(g_profile(kModel, 0.25, lo));
  EXPECT_NO_THROW(g_profile(kModel, 0.25, hi));
  EXPECT_THROW(g_profile(kModel, 0.25, hi + 0.1), DomainError);
  EXPECT_THROW(g_profile(kModel, 0.25, lo - 0.1), DomainError);
}

TEST(GProfile, OneSidedDerivativesAtOrigin) {
  const double h = 1e-6;
  const double rho = 0.5;
  const double left = (g_profile(kModel, rho, 0.0) - g_profile(kModel, rho, -h)) / h;
  const double right = (g_profile(kModel, rho, h) - g_profile(kModel, rho, 0.0)) / h;
  EXPECT_NEAR(left, 0.5, 1e-4);
  EXPECT_NEAR(right, -0.5, 1e-4);

  const ShapeModel hom{0.5, 0.0};
  EXPECT_NEAR((g_profile(hom, rho, 0.0) - g_profile(hom, rho, -h)) / h, 0.0, 1e-4);
  EXPECT_NEAR((g_profile(hom, rho, h) - g_profile(hom, rho, 0.0)) / h, 0.0, 1e-4);
}

TEST(GProfile, MidpointConcave) {
  std::mt19937_64 gen(8);
  for (double rho : {0.1, 0.4, 0.5, 0.65, 0.9}) {
    const auto [lo, hi] = g_domain(rho);
    std::uniform_real_distribution<double> u(lo, hi);
    for (int k = 0; k < 500; ++k) {
      const double a = u(gen), b = u(gen);
      EXPECT_GE(g_profile(kModel, rho, 0.5 * (a + b)) + 1e-12,
                0.5 * (g_profile(kModel, rho, a) + g_profile(kModel, rho, b)));
    }
  }
}

TEST(PlateauInterval, Values) {
  auto [lo, hi] = plateau_interval(kModel);
  EXPECT_DOUBLE_EQ(lo, 0.4375);
  EXPECT_DOUBLE_EQ(hi, 0.5625);
  std::tie(lo, hi) = plateau_interval({0.5, 0.0});
  EXPECT_EQ(lo, 0.5);
  EXPECT_EQ(hi, 0.5);
  std::tie(lo, hi) = plateau_interval(model_from_law(Uniform{0.5, 1.0}));
  EXPECT_NEAR(lo, 0.4233, 1e-4);
  EXPECT_NEAR(hi, 0.5767, 1e-4);
  EXPECT_THROW(plateau_interval({0.5, 3.0}), ParameterError);
}

TEST(PlateauCheck, Center) {
  const auto v = plateau_check(kModel, 0.5);
  EXPECT_NEAR(v.max_value, 8.0, 1e-12);
  EXPECT_NEAR(v.argmax, 0.0, 1e-6);
  EXPECT_TRUE(v.inside_open_interval);
  EXPECT_TRUE(v.pass);
}

TEST(PlateauCheck, Boundary) {
  const auto v = plateau_check(kModel, 0.4375);
  EXPECT_FALSE(v.inside_open_interval);
  EXPECT_LE(v.max_value, 8.0 + 1e-9);
  EXPECT_TRUE(v.pass);
}

TEST(PlateauCheck, OutsideFails) {
  const auto v = plateau_check(kModel, 0.65);
  EXPECT_GT(v.max_value, 8.0 + 1e-6);
  EXPECT_LT(v.argmax, 0.0);
  EXPECT_FALSE(v.pass);
}

TEST(PlateauCheck, HomogeneousOnlyAtOneHalf) {
  const ShapeModel hom{0.5, 0.0};
  EXPECT_TRUE(plateau_check(hom, 0.5).pass);
  EXPECT_FALSE(plateau_check(hom, 0.49).pass);
  EXPECT_FALSE(plateau_check(hom, 0.51).pass);
}

TEST(PlateauCheck, AgreesWithVariationalFlux) {
  auto k = [](double v) { return k_tilde(kModel, v); };
  for (int step = 1; step <= 99; ++step) {
    const double rho = 0.01 * step;
    const bool flux_at_plateau = flux_from_k(k, rho, default_bracket(kModel.r)).value >= kModel.r / 4.0 - 1e-6;
    EXPECT_EQ(plateau_check(kModel, rho).pass, flux_at_plateau) << rho;
  }
}
