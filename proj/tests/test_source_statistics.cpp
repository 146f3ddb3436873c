#include "doctest.h"
#include "oracles.hpp"

#include <cmath>
#include <numeric>

#include "doqkd/error.hpp"
#include "doqkd/source_statistics.hpp"

using namespace doqkd;

TEST_CASE("Bose-Einstein pmf") {
  SUBCASE("matches the product recurrence") {
    for (int g : {1, 8, 64})
      for (double mu : {0.01, 0.5, 3.0}) {
        const auto ref = oracle::be_pmf_table(mu, g, 30);
        for (int m = 0; m <= 30; ++m) CHECK(bose_einstein_pmf(mu, m, g) == doctest::Approx(ref[m]).epsilon(1e-12));
      }
  }
  SUBCASE("single mode is geometric") {
    const double mu = 0.7;
    for (int m = 0; m < 10; ++m)
      CHECK(bose_einstein_pmf(mu, m, 1) == doctest::Approx(std::pow(mu, m) / std::pow(1 + mu, m + 1)));
  }
  SUBCASE("many modes approach Poisson") {
    const double mu = 1.0;
    for (int m = 0; m < 6; ++m) {
      const double poisson = std::exp(-mu) * std::pow(mu, m) / std::tgamma(m + 1.0);
      CHECK(bose_einstein_pmf(mu, m, 1'000'000) == doctest::Approx(poisson).epsilon(1e-5));
    }
  }
  SUBCASE("normalized") {
    for (int g : {1, 8, 64}) {
      double sum = 0.0;
      for (int m = 0; m < 2000; ++m) sum += bose_einstein_pmf(2.0, m, g);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK(bose_einstein_pmf(0.0, 0, 4) == 1.0);
  CHECK(bose_einstein_pmf(0.0, 3, 4) == 0.0);
  CHECK_THROWS_AS(bose_einstein_pmf(-1.0, 0, 4), InvalidArgument);
}

TEST_CASE("herald failure series against the generating function") {
  for (int d : {8, 16, 32, 64})
    for (double mu : {0.0, 0.01, 0.2, 1.0, 3.0, 10.0})
      for (double eta : {0.0, 0.5, 0.93, 1.0}) {
        HeraldParams hp;
        hp.mu_f = mu;
        hp.d = d;
        hp.eta_d = eta;
        CAPTURE(d);
        CAPTURE(mu);
        CAPTURE(eta);
        CHECK(std::abs(herald_failure_prob(hp) - oracle::herald_failure_closed(mu, d, eta)) < 1e-10);
      }
}

TEST_CASE("heralded output distribution") {
  HeraldParams hp;
  hp.mu_f = 1.6;
  const auto dist = heralded_output_dist(hp, 6);
  const double total = std::accumulate(dist.pmf.begin(), dist.pmf.end(), 0.0) + dist.tail;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(dist.pmf[0] >= herald_failure_prob(hp));

  const auto ref = oracle::heralded_stats(hp.mu_f, hp.d, hp.eta_d, hp.eta_s);
  const auto s = heralded_stats(hp);
  CHECK(s.p_zero == doctest::Approx(ref.p_zero).epsilon(1e-10));
  CHECK(s.p_one == doctest::Approx(ref.p_one).epsilon(1e-10));
  CHECK(s.p_multi_given_nonvacuum == doctest::Approx(ref.p_multi_given_nonvacuum).epsilon(1e-8));
  CHECK(dist.pmf[1] == doctest::Approx(s.p_one).epsilon(1e-10));

  CHECK_THROWS_AS(heralded_output_dist(hp, 1), InvalidArgument);
}

TEST_CASE("heralded statistics against the explicit double sum") {
  for (int d : {8, 64})
    for (double mu : {0.05, 0.5, 2.0, 5.0}) {
      HeraldParams hp;
      hp.d = d;
      hp.mu_f = mu;
      const auto s = heralded_stats(hp);
      const auto ref = oracle::heralded_stats(mu, d, hp.eta_d, hp.eta_s);
      CAPTURE(d);
      CAPTURE(mu);
      CHECK(s.p_one == doctest::Approx(ref.p_one).epsilon(1e-10));
      CHECK(s.p_multi_given_nonvacuum == doctest::Approx(ref.p_multi_given_nonvacuum).epsilon(1e-8));
    }
}

TEST_CASE("vacuum pump") {
  HeraldParams hp;
  hp.mu_f = 0.0;
  const auto s = heralded_stats(hp);
  CHECK(s.p_one == 0.0);
  CHECK(s.p_zero == 1.0);
  CHECK(unheralded_stats(0.0, 64).p_one == 0.0);
}

TEST_CASE("heralding never increases the multiphoton share") {
  for (int d : {8, 16, 32, 64})
    for (double mu = 0.05; mu <= 3.0; mu += 0.05) {
      HeraldParams hp;
      hp.d = d;
      hp.mu_f = mu;
      CHECK(heralded_stats(hp).p_multi_given_nonvacuum <= unheralded_stats(mu, d).p_multi_given_nonvacuum);
    }
}

TEST_CASE("operating point") {
  const auto op = operating_point(64, 0.93, kOneDbSwitchTransmissivity, 0.01);
  CHECK(op.p_multi_given_nonvacuum <= 0.01);
  CHECK(op.p_multi_given_nonvacuum == doctest::Approx(0.01).epsilon(1e-8));
  CHECK(op.p_one == doctest::Approx(0.607).epsilon(0.005 / 0.607));

  // Monotone in the bound.
  const auto loose = operating_point(64, 0.93, kOneDbSwitchTransmissivity, 0.05);
  CHECK(loose.mu_f > op.mu_f);

  // Larger d holds more pairs per frame at the same purity.
  double prev = 0.0;
  for (int d : {8, 16, 32, 64}) {
    const auto p = operating_point(d, 0.93, kOneDbSwitchTransmissivity, 0.01);
    CHECK(p.p_one > prev);
    prev = p.p_one;
  }
  CHECK_THROWS_AS(operating_point(64, 0.93, 0.79, 1.5), InvalidArgument);
}

TEST_CASE("parameter validation") {
  HeraldParams hp;
  hp.d = 1;
  CHECK_THROWS_WITH_AS(hp.validate(), doctest::Contains("d"), InvalidArgument);
  hp = HeraldParams{};
  hp.eta_s = 1.2;
  CHECK_THROWS_AS(hp.validate(), InvalidArgument);
  hp = HeraldParams{};
  hp.bin_fraction = 0.5;
  hp.mu_f = 2.0;
  CHECK(hp.bin_mean() == doctest::Approx(1.0));
}
