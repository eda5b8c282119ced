#include <cmath>
#include <random>

#include "bogo/classical_obs.hpp"
#include "bogo/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bogo;

namespace {

bool within(const Moment& m, double expect, double sigmas) {
  return std::abs(m.mean - expect) <= sigmas * m.std_error;
}

}  // namespace

TEST_CASE("classical closed forms") {
  CHECK(classical_occupation(1.0, 0.0) == 1.0);
  CHECK(classical_occupation(2.0, 1.0) == 6.0);
  CHECK(classical_occupation(0.0, 5.0) == 0.0);
  CHECK(classical_anomalous_sq(1.0, 0.0) == 0.0);
  CHECK(classical_anomalous_sq(1.0, 1.0) == 8.0);

  CHECK(classical_tmv(1.7, 0.0).V_cl == 1.7);
  CHECK(classical_tmv(1.0, 1.0).V_cl == doctest::Approx(1.0 / 3.0));

  const auto z = classical_density_correlator(1000, 0.0, 0.0);
  CHECK(z.general == 0.0);
  CHECK(z.at_t_m == 0.0);
}

TEST_CASE("classical identities over random draws") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 10000; ++i) {
    const auto s = testing::random_state(rng);
    const double ncl_th = classical_thermal_occupation(s.omega, s.T);
    const auto tc = total_coefficients(s.c, s.u, s.v, s.omega, s.t);
    const auto st = classical_mode_state(ncl_th, tc.lambda, tc.gamma, s.t);
    const double g = std::norm(tc.gamma);
    CHECK(std::abs(st.m_cl) < st.n_cl);
    CHECK(std::abs(st.n_cl * st.n_cl - std::norm(st.m_cl) - ncl_th * ncl_th) <=
          1e-10 * st.n_cl * st.n_cl);
    CHECK(std::abs(std::norm(st.m_cl) - classical_anomalous_sq(ncl_th, g)) <=
          1e-10 * std::max(1.0, std::norm(st.m_cl)));
    // sub-Poissonian flag equals V_cl < 1 away from the boundary
    const auto v = classical_tmv(ncl_th, g);
    if (std::abs(v.V_cl - 1.0) > 1e-9) CHECK(v.sub_poissonian == (v.V_cl < 1.0));
    CHECK(v.sub_poissonian == (g > s.T / (2.0 * s.omega) - 0.5));
  }
}

TEST_CASE("quantum minus classical density correlator is N") {
  std::mt19937_64 rng(19);
  for (int i = 0; i < 1000; ++i) {
    const auto s = testing::random_state(rng);
    const auto st = mode_state(s.c, mode_physics(1.0, 1.0, 1.0), s.n_th, s.t);
    const auto q = density_correlator(1000, st.n_k, st.m_k);
    const auto c = classical_density_correlator(1000, st.n_k, st.m_k);
    CHECK(std::abs(q.at_t_m - c.at_t_m - 1000.0) <= 1e-9 * 1000.0);
    CHECK(std::abs(q.general - c.general - 1000.0) <= 1e-9 * std::max(1000.0, std::abs(q.general)));
  }
}

TEST_CASE("Monte Carlo ensemble reproduces equipartition and Isserlis moments") {
  EnsembleOptions opt;
  opt.sample_count = 100000;
  opt.seed = 42;
  const double ncl = 2.5;
  const auto e = monte_carlo_ensemble(complex{1.0, 0.0}, complex{0.0, 0.0}, ncl, opt);
  CHECK(e.sample_count == 100000);
  CHECK(within(e.quasi_intensity, ncl, 3.0));
  CHECK(within(e.intensity_a, ncl, 3.0));
  // E(I_a I_a) / E(I_a)^2 = 2
  const double ratio = e.intensity_aa.mean / (e.intensity_a.mean * e.intensity_a.mean);
  const double ratio_err = std::hypot(e.intensity_aa.std_error / e.intensity_aa.mean,
                                      2.0 * e.intensity_a.std_error / e.intensity_a.mean) *
                           ratio;
  CHECK(std::abs(ratio - 2.0) <= 3.0 * ratio_err);

  // driven: lambda, gamma from a squeeze of r = 1.1
  const complex lam = std::polar(std::cosh(1.1), 0.4), gam = std::polar(std::sinh(1.1), -0.7);
  const auto d = monte_carlo_ensemble(lam, gam, ncl, opt);
  const double g = std::norm(gam);
  const double n = classical_occupation(ncl, g);
  const complex m = classical_anomalous(ncl, lam, gam);
  CHECK(within(d.intensity_a, n, 4.0));
  CHECK(within(d.intensity_b, n, 4.0));
  CHECK(within(d.intensity_aa, 2.0 * n * n, 4.0));
  CHECK(within(d.intensity_ab, n * n + std::norm(m), 4.0));
  CHECK(within(d.anomalous_re, m.real(), 4.0));
  CHECK(within(d.anomalous_im, m.imag(), 4.0));
  CHECK(within(d.v_cl, classical_tmv(ncl, g).V_cl, 3.0));
}

TEST_CASE("Monte Carlo errors scale as one over root N and are thread independent") {
  EnsembleOptions a;
  a.sample_count = 50000;
  a.seed = 3;
  EnsembleOptions b = a;
  b.sample_count = 200000;
  const complex lam = std::cosh(0.5), gam = std::sinh(0.5);
  const auto ea = monte_carlo_ensemble(lam, gam, 1.0, a);
  const auto eb = monte_carlo_ensemble(lam, gam, 1.0, b);
  CHECK(ea.intensity_a.std_error / eb.intensity_a.std_error == doctest::Approx(2.0).epsilon(0.05));

  EnsembleOptions c = a;
  c.threads = 4;
  const auto ec = monte_carlo_ensemble(lam, gam, 1.0, c);
  CHECK(ec.intensity_a.mean == ea.intensity_a.mean);
  CHECK(ec.v_cl.mean == ea.v_cl.mean);
  CHECK(ec.v_cl.std_error == ea.v_cl.std_error);

  EnsembleOptions small = a;
  small.sample_count = 999;
  CHECK_THROWS_AS(monte_carlo_ensemble(lam, gam, 1.0, small), DomainError);
}
