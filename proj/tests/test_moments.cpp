#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "polykin/error.hpp"
#include "polykin/gaussian.hpp"
#include "polykin/initial.hpp"
#include "polykin/moments.hpp"
#include "support.hpp"

using namespace polykin;
using testing_support::grid_for;

TEST(Moments, MaxwellianFields) {
  const Grid g = build_grid(GridSpec{});
  const MacroState m = compute_macro(maxwellian(1.0, {0.0, 0.0, 0.0}, 1.0, 2.0, g));
  EXPECT_NEAR(m.rho, 1.0, 1e-6);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(m.U[i], 0.0, 1e-12);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(m.Theta[i][j], i == j ? 1.0 : 0.0, 1e-6);
  }
  EXPECT_NEAR(m.T_I, 1.0, 1e-6);
  EXPECT_NEAR(m.T_tr, 1.0, 1e-6);
  EXPECT_NEAR(m.T_delta, 1.0, 1e-6);
}

TEST(Moments, CounterStreamingMixture) {
  const double u = 1.2, T = 0.8;
  const Grid g = build_grid(GridSpec::for_temperature(T, T, u, 3.0));
  const MacroState m = compute_macro(bimodal(1.0, u, T, 3.0, g));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(m.U[i], 0.0, 1e-12);
  EXPECT_NEAR(m.Theta[0][0], T + u * u, 1e-6);
  EXPECT_NEAR(m.Theta[1][1], T, 1e-6);
  EXPECT_NEAR(m.Theta[2][2], T, 1e-6);
  EXPECT_NEAR(m.Theta[0][1], 0.0, 1e-12);
  EXPECT_NEAR(m.T_I, T, 1e-6);
}

TEST(Moments, ScalingLeavesIntensiveFieldsUnchanged) {
  const MacroState s = testing_support::moderate_state(11, 2.0);
  const Grid g = grid_for(s, 16, 16);
  const Distribution f = testing_support::random_positive(s, g, 0.3, 4);
  Distribution f3 = f;
  f3 *= 3.0;
  const MacroState a = compute_macro(f);
  const MacroState b = compute_macro(f3);
  EXPECT_NEAR(b.rho, 3.0 * a.rho, 1e-14 * b.rho);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(b.U[i], a.U[i], 1e-14);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(b.Theta[i][j], a.Theta[i][j], 1e-13);
  }
  EXPECT_NEAR(b.T_tr, a.T_tr, 1e-13);
  EXPECT_NEAR(b.T_I, a.T_I, 1e-13);
}

TEST(Moments, EnergySplitIdentity) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CounterRng rng(seed);
    const MacroState m = sample_macrostate(rng);
    const double total = 0.5 * (3.0 + m.delta) * m.rho * m.T_delta;
    EXPECT_NEAR(m.E_tr + m.E_I, total, 1e-12 * total);
  }
  const MacroState s = testing_support::moderate_state(5, 5.0);
  const Grid g = grid_for(s, 16, 16);
  const MacroState m = compute_macro(testing_support::random_positive(s, g, 0.5, 9));
  const double total = 0.5 * (3.0 + m.delta) * m.rho * m.T_delta;
  EXPECT_NEAR(m.E_tr + m.E_I, total, 1e-12 * total);
}

TEST(Moments, TraceAndSymmetryExact) {
  const MacroState s = testing_support::moderate_state(2, 3.0);
  const Grid g = grid_for(s, 16, 16);
  const MacroState m = compute_macro(testing_support::random_positive(s, g, 0.5, 1));
  EXPECT_NEAR(trace(m.Theta), 3.0 * m.T_tr, 4.0 * std::numeric_limits<double>::epsilon() * trace(m.Theta));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_EQ(m.Theta[i][j], m.Theta[j][i]);
}

TEST(Moments, GalileanShift) {
  const Vec3 a{0.7, -0.4, 0.25};
  const Grid g = build_grid(GridSpec::for_temperature(1.0, 1.0, 0.7, 2.0));
  const Mat3 sigma = {{{1.0, 0.2, 0.0}, {0.2, 0.8, 0.1}, {0.0, 0.1, 1.1}}};
  const MacroState rest = compute_macro(ellipsoidal(1.0, {0.0, 0.0, 0.0}, sigma, 0.9, g));
  const MacroState moved = compute_macro(ellipsoidal(1.0, a, sigma, 0.9, g));
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(moved.U[i] - rest.U[i], a[i], 1e-6);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(moved.Theta[i][j], rest.Theta[i][j], 1e-6);
  }
  EXPECT_NEAR(moved.T_tr, rest.T_tr, 1e-6);
  EXPECT_NEAR(moved.T_I, rest.T_I, 1e-12);
}

TEST(Moments, VacuumIsAnError) {
  const Grid g = build_grid(GridSpec::for_temperature(1.0, 1.0, 0.0, 2.0, 8, 8));
  const Distribution zero(g);
  try {
    compute_macro(zero);
    FAIL() << "expected vacuum error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::vacuum);
    EXPECT_EQ(e.exit_code(), 2);
  }
}

TEST(Moments, NonFiniteIsAnError) {
  const Grid g = build_grid(GridSpec::for_temperature(1.0, 1.0, 0.0, 2.0, 8, 8));
  Distribution f = maxwellian(1.0, {0.0, 0.0, 0.0}, 1.0, 2.0, g);
  f[17] = std::numeric_limits<double>::quiet_NaN();
  try {
    compute_macro(f);
    FAIL() << "expected data error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::numerical);
  }
}

TEST(Moments, CollisionFrequencyFormula) {
  MacroState m;
  m.rho = 1.0;
  m.T_delta = 1.6;
  EXPECT_DOUBLE_EQ(collision_frequency(m, {0.0, 0.0, 2.0}), 1.6);
  EXPECT_DOUBLE_EQ(collision_frequency(m, {0.5, 1.0, 2.0}), 1.6);
  EXPECT_NEAR(collision_frequency(m, {0.999, 0.0, 2.0}), 1.6 / 0.001, 1e-9);
  EXPECT_NEAR(collision_frequency(m, {0.5, 0.5, 2.0}), 1.6 / 0.75, 1e-15);
  EXPECT_THROW(collision_frequency(m, {1.0, 0.0, 2.0}), Error);
  EXPECT_THROW((Params{1.0, 0.0, 2.0}.validate()), Error);
}

TEST(Moments, FromFieldsCompletesTemperatures) {
  const MacroState m = MacroState::from_fields(1.0, {0.0, 0.0, 0.0}, diag3({1.0, 2.0, 3.0}), 1.0, 2.0);
  EXPECT_DOUBLE_EQ(m.T_tr, 2.0);
  EXPECT_DOUBLE_EQ(m.T_delta, 1.6);
  EXPECT_DOUBLE_EQ(m.E_tr, 3.0);
  EXPECT_DOUBLE_EQ(m.E_I, 1.0);
}

TEST(Moments, MarginalsMatchFullIntegrals) {
  const MacroState s = testing_support::moderate_state(8, 2.0);
  const Grid g = grid_for(s, 16, 16);
  const Distribution f = testing_support::random_positive(s, g, 0.2, 2);
  const VelocityMarginals vm = velocity_marginals(f);
  double mass = 0.0;
  for (double x : vm.mass) mass += x;
  EXPECT_NEAR(mass * g.velocity_weight(), integrate(f), 1e-13 * integrate(f));
}
