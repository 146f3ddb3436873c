#include "doctest.h"

#include <cmath>

#include "doqkd/error.hpp"
#include "doqkd/noise_channel.hpp"
#include "doqkd/security_bounds.hpp"

using namespace doqkd;

namespace {

const SourceParams kSrc;
const DispersionParams kDisp;

}  // namespace

TEST_CASE("xi map agrees with the difference-variance ratio of Gamma'") {
  const auto g = build_noiseless_cov(kSrc, kDisp);
  for (double eps : {0.0, 1e-5, 6.3e-5, 2e-3})
    for (double eta : {0.0, 1e-5, 6.3e-5, 1e-3}) {
      const EveNoise n{eps, eta};
      const auto gp = apply_eve_noise(g, n);
      const double xi_matrix = var_time_difference(gp) / var_time_difference(g) - 1.0;
      const double theta_matrix = 1.0 - var_time_sum(gp) / var_time_sum(g);
      CAPTURE(eps);
      CAPTURE(eta);
      CHECK(xi_from_eps_eta(n, 64.0) == doctest::Approx(xi_matrix).epsilon(1e-9).scale(1e-12));
      CHECK(theta_from_eps_eta(n, 64.0) == doctest::Approx(theta_matrix).epsilon(1e-7).scale(1e-12));
    }
}

TEST_CASE("measured scenario values for d = 64") {
  const double eps = eps_from_eta_xi(6.3e-5, 0.78, 64.0);
  CHECK(eps >= 6.3e-5);
  CHECK(eps <= 6.6e-5);
  CHECK(sigma_delta_from_xi(0.78, 30.0) == doctest::Approx(10.0).epsilon(0.01));
  CHECK(xi_from_eps_eta({6.3e-5, 6.3e-5}, 64.0) == doctest::Approx(0.7741).epsilon(1e-3));
}

TEST_CASE("noise maps invert each other") {
  for (double xi : {0.0, 0.1, 0.78, 3.0}) {
    CHECK(xi_from_sigma_delta(sigma_delta_from_xi(xi, 30.0), 30.0) == doctest::Approx(xi).scale(1.0));
    const double eta = 0.3 * max_eta_for_xi(xi, 64.0);
    const double eps = eps_from_eta_xi(eta, xi, 64.0);
    CHECK(xi_from_eps_eta({eps, eta}, 64.0) == doctest::Approx(xi).scale(1.0));
    CHECK(eps_from_eta_xi(max_eta_for_xi(xi, 64.0), xi, 64.0) == doctest::Approx(0.0).scale(1.0));
  }
  const auto m = measured_noise({1e-4, 2e-4}, kSrc);
  CHECK(m.sigma_delta_ps == doctest::Approx(sigma_delta_from_xi(m.xi, 30.0)));
}

TEST_CASE("eve noise scales the cross and Bob blocks only") {
  const auto g = build_noiseless_cov(kSrc, kDisp);
  const auto gp = apply_eve_noise(g, {0.25, 0.1});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      CHECK(gp(i, j) == g(i, j));
      CHECK(gp(i, j + 2) == doctest::Approx(0.9 * g(i, j + 2)));
      CHECK(gp(i + 2, j + 2) == doctest::Approx(1.25 * g(i + 2, j + 2)));
    }
  CHECK_THROWS_AS(apply_eve_noise(g, {-0.1, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(apply_eve_noise(g, {0.0, 1.5}), InvalidArgument);
}

TEST_CASE("link budget") {
  LinkParams link;
  link.length_km = 100.0;
  CHECK(channel_transmission(link) == doctest::Approx(0.01));
  CHECK(loss_a(link) == doctest::Approx(0.07));
  CHECK(loss_b(link) == doctest::Approx(1.0 - 0.0093));
  CHECK(frame_duration_ps(kSrc) == doctest::Approx(11520.0));
  CHECK(dark_count_prob(link, kSrc) == doctest::Approx(1.152e-5));
}

TEST_CASE("click probabilities") {
  LinkParams link;
  link.length_km = 100.0;
  const auto c = click_probabilities(kSrc, link);
  const double pd = 1.152e-5;
  CHECK(c.p_b == doctest::Approx(0.607 * 0.0093 * (1 - pd)));
  CHECK(c.d_b == doctest::Approx((0.607 * (1 - 0.0093) + 0.393) * pd));
  CHECK(c.r_nu_b + c.r_d_b == doctest::Approx(1.0));
  CHECK(c.r_nu_b == doctest::Approx(c.p_b / (c.p_b + c.d_b)));

  SourceParams off = kSrc;
  off.pair_prob = 0.0;
  LinkParams dark_free = link;
  dark_free.dark_rate_hz = 0.0;
  CHECK_THROWS_AS(click_probabilities(off, dark_free), NumericalError);
}

TEST_CASE("detector model entries") {
  const auto gp = apply_eve_noise(build_noiseless_cov(kSrc, kDisp), {1e-4, 1e-4});
  LinkParams link;
  link.length_km = 50.0;
  const auto c = click_probabilities(kSrc, link);
  const auto g2 = apply_detector_model(gp, c, link);
  const double j2 = 400.0;
  CHECK(g2(TA, TA) == doctest::Approx(c.r_nu_a * (gp(TA, TA) + j2) + c.r_d_a * 3.0 * gp(TA, TA)));
  CHECK(g2(DB, DB) == doctest::Approx(c.r_nu_b * (gp(DB, DB) + j2) + c.r_d_b * 3.0 * gp(DA, DA)));
  CHECK(g2(TA, TB) == doctest::Approx(c.r_nu_a * c.r_nu_b * gp(TA, TB)));
  CHECK(g2(TA, DA) == doctest::Approx(c.r_nu_a * gp(TA, DA)));

  SUBCASE("ideal detectors leave Gamma' unchanged") {
    LinkParams ideal;
    ideal.eta_det_a = ideal.eta_det_b = 1.0;
    ideal.sigma_jitter_ps = 0.0;
    ideal.dark_rate_hz = 0.0;
    const auto same = apply_detector_model(gp, click_probabilities(kSrc, ideal), ideal);
    CHECK((same.ps2() - gp.ps2()).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("physical noise region") {
  const double xi = xi_from_sigma_delta(10.0, 30.0);
  const auto region = physical_noise_region(xi, 200, kSrc, kDisp);
  REQUIRE(region.size() >= 2);
  const double eta_max = max_eta_for_xi(xi, 64.0);
  CHECK(region.front().eta == 0.0);
  CHECK(region.back().eta == eta_max);
  CHECK(region.back().epsilon == 0.0);
  const auto g = build_noiseless_cov(kSrc, kDisp);
  for (const auto& e : region) {
    CHECK(e.epsilon >= 0.0);
    CHECK(e.eta >= 0.0);
    CHECK(e.eta <= eta_max);
    CHECK(xi_from_eps_eta(e, 64.0) == doctest::Approx(xi).epsilon(1e-9));
    const auto gp = apply_eve_noise(g, e);
    CHECK(mutual_information(gp) <= mutual_information(g) * (1 + 1e-12));
    CHECK(symplectic_invariants(gp).d_minus >= 0.5 - 1e-9);
  }

  SUBCASE("zero noise collapses to the origin") {
    const auto origin = physical_noise_region(0.0, 200, kSrc, kDisp);
    REQUIRE(origin.size() == 1);
    CHECK(origin[0] == EveNoise{0.0, 0.0});
  }
  SUBCASE("serial and parallel agree") {
    const auto serial = physical_noise_region(xi, 200, kSrc, kDisp, Exec::serial);
    CHECK(serial == region);
  }
  SUBCASE("xi demanding eta > 1 has no region") {
    CHECK_THROWS_AS(physical_noise_region(1e5, 200, kSrc, kDisp), NoPhysicalRegion);
  }
  SUBCASE("negative xi is rejected") {
    CHECK_THROWS_AS(physical_noise_region(-0.1, 200, kSrc, kDisp), InvalidArgument);
  }
}
