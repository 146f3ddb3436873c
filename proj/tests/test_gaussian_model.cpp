#include "doctest.h"
#include "oracles.hpp"

#include "doqkd/error.hpp"
#include "doqkd/gaussian_model.hpp"
#include "doqkd/security_bounds.hpp"

using namespace doqkd;

namespace {

void check_matrix_close(const Eigen::Matrix4d& got, const Eigen::Matrix4d& want, double rel) {
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      INFO("entry (" << i << ", " << j << ")");
      CHECK(got(i, j) == doctest::Approx(want(i, j)).epsilon(rel));
    }
}

}  // namespace

TEST_CASE("schmidt dimension and auxiliary scales") {
  const SourceParams src;
  CHECK(schmidt_dimension(src) == doctest::Approx(64.0));
  const auto s = aux_scales(src);
  CHECK(s.u == doctest::Approx(16.0 * 1920.0 * 1920.0));
  CHECK(s.v == doctest::Approx(4.0 * 900.0));
  CHECK(s.d == doctest::Approx(64.0));
}

TEST_CASE("noiseless covariance matches the closed-form blocks") {
  for (double coh : {240.0, 1920.0, 5000.0})
    for (double cor : {10.0, 30.0})
      for (double k : {1e6, 1e8, -3e7}) {
        const SourceParams src{coh, cor, 0.5, 780.0};
        const auto disp = DispersionParams::from_k(k);
        const auto g = build_noiseless_cov(src, disp);
        CAPTURE(coh);
        CAPTURE(cor);
        CAPTURE(k);
        check_matrix_close(g.normalized(), oracle::gamma_blocks(coh, cor, k), 1e-12);
        CHECK(g.beta2L() == doctest::Approx(k / 2.0));
      }
}

TEST_CASE("time-basis second moments") {
  const SourceParams src;
  const auto g = build_noiseless_cov(src, DispersionParams{});
  CHECK(var_time_difference(g) == doctest::Approx(30.0 * 30.0).epsilon(1e-12));
  CHECK(var_time_sum(g) == doctest::Approx(4.0 * 1920.0 * 1920.0).epsilon(1e-12));
  CHECK(g(TA, TA) == doctest::Approx(1920.0 * 1920.0 + 30.0 * 30.0 / 4.0));
}

TEST_CASE("covariance is symmetric and positive definite") {
  const auto g = build_noiseless_cov(SourceParams{}, DispersionParams{});
  CHECK((g.ps2() - g.ps2().transpose()).norm() == 0.0);
  Eigen::LLT<Eigen::Matrix4d> llt(g.ps2());
  CHECK(llt.info() == Eigen::Success);
}

TEST_CASE("noiseless state is pure at every dispersion scale") {
  for (double coh : {300.0, 1920.0})
    for (double k : {1e5, 1e7, 1e8, 1e10}) {
      CAPTURE(coh);
      CAPTURE(k);
      const auto g = build_noiseless_cov({coh, 30.0, 0.5, 780.0}, DispersionParams::from_k(k));
      // det of a pure two-mode state in [T, D] = i units is (1/4)^2.
      CHECK(g.normalized().determinant() == doctest::Approx(1.0 / 16.0).epsilon(1e-6));
      const auto inv = symplectic_invariants(g);
      CHECK(inv.d_plus == doctest::Approx(0.5).epsilon(1e-9));
      CHECK(inv.d_minus == doctest::Approx(0.5).epsilon(1e-9));
    }
}

TEST_CASE("normalized and ps2 representations round trip") {
  const auto g = build_noiseless_cov(SourceParams{}, DispersionParams{});
  const auto back = CovMatrix4::from_normalized(g.normalized(), g.beta2L());
  check_matrix_close(back.ps2(), g.ps2(), 1e-14);
}

TEST_CASE("conjugacy ratio and residual within-party correlation") {
  const SourceParams src;
  const DispersionParams disp;
  const double ratio = conjugacy_ratio(disp, src);
  CHECK(ratio == doctest::Approx(5e7 / (1920.0 * 30.0)));
  CHECK(is_conjugate(ratio));
  CHECK_FALSE(is_conjugate(conjugacy_ratio(DispersionParams{1e4, 1.0}, src)));
  const auto g = build_noiseless_cov(src, disp);
  CHECK(residual_cross_correlation(g) == doctest::Approx(2.0 / ratio).epsilon(1e-6));
}

TEST_CASE("nonlocal dispersion cancellation") {
  CHECK(dispersed_correlation_time(30.0, 5e7, -5e7) == doctest::Approx(30.0));
  const double expect = std::sqrt((std::pow(30.0, 4) + 1e14) / 900.0);
  CHECK(dispersed_correlation_time(30.0, 1e7, 0.0) == doctest::Approx(expect));
}

TEST_CASE("invalid inputs are rejected") {
  CHECK_THROWS_AS(build_noiseless_cov(SourceParams{}, DispersionParams{0.0, 1.0}), InvalidArgument);
  CHECK_THROWS_WITH_AS(build_noiseless_cov({1920.0, -1.0, 0.5, 780.0}, DispersionParams{}),
                       doctest::Contains("sigma_cor_ps"), InvalidArgument);
  CHECK_THROWS_AS(build_noiseless_cov({20.0, 30.0, 0.5, 780.0}, DispersionParams{}), InvalidArgument);
  CHECK_THROWS_AS((SourceParams{1920.0, 30.0, 1.5, 780.0}.validate()), InvalidArgument);
}
