#include "doqkd/security_bounds.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "doqkd/error.hpp"

namespace doqkd {

namespace {

using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;

/// Relative mismatch allowed between the two copies of each d^2.
constexpr double kPairingTolerance = 1e-8;

/// Local symplectic rescaling (T, D) -> (T / s, D s) per party so both
/// quadratures carry comparable magnitudes. Leaves every invariant unchanged.
Mat4 balanced_normalized(const CovMatrix4& gamma) {
  Mat4 n = gamma.normalized();
  Eigen::Vector4d s;
  for (int party = 0; party < 2; ++party) {
    const int t = 2 * party;
    const double scale = std::pow(n(t, t) / n(t + 1, t + 1), 0.25);
    s(t) = 1.0 / scale;
    s(t + 1) = scale;
  }
  n = s.asDiagonal() * n * s.asDiagonal();
  return 0.5 * (n + n.transpose());
}

double log2_inv_one_minus_sq(double mu) {
  if (!(std::abs(mu) < 1.0))
    throw NumericalError("correlation coefficient |mu| >= 1 is unphysical (mu = " +
                         std::to_string(mu) + ")");
  return -std::log1p(-mu * mu) / std::numbers::ln2;
}

}  // namespace

std::string_view to_string(RateConvention c) {
  return c == RateConvention::paper ? "paper" : "strict";
}

RateConvention rate_convention_from_string(std::string_view s) {
  if (s == "paper") return RateConvention::paper;
  if (s == "strict") return RateConvention::strict;
  throw InvalidArgument("rate convention must be 'paper' or 'strict', got '" + std::string(s) + "'");
}

double entropy_f(double x) {
  if (!(x >= 0.5 - kEntropyClampTolerance))
    throw InvalidArgument("entropy_f needs x >= 1/2, got " + std::to_string(x));
  if (x <= 0.5) return 0.0;
  const double hi = x + 0.5;
  const double lo = x - 0.5;
  return hi * std::log2(hi) - lo * std::log2(lo);
}

SymplecticInvariants symplectic_invariants(const CovMatrix4& gamma_p) {
  const Mat4 n = balanced_normalized(gamma_p);
  SymplecticInvariants inv{};
  inv.i1 = n.block<2, 2>(0, 0).determinant() + n.block<2, 2>(2, 2).determinant() +
           2.0 * n.block<2, 2>(0, 2).determinant();
  inv.i2 = n.determinant();

  // d+- from the spectrum of M^T M with M = n^(1/2) Omega n^(1/2); its
  // eigenvalues are d-^2, d-^2, d+^2, d+^2. Unlike sqrt(I1^2 - 4 I2), this
  // keeps full relative precision when d+ and d- nearly coincide.
  Eigen::SelfAdjointEigenSolver<Mat4> es(n);
  if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() > 0.0))
    throw NumericalError("covariance is not positive definite");
  const Mat4 root = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
                    es.eigenvectors().transpose();
  Mat4 omega = Mat4::Zero();
  omega(0, 1) = omega(2, 3) = 1.0;
  omega(1, 0) = omega(3, 2) = -1.0;
  const Mat4 m = root * omega * root;
  const Mat4 k = m.transpose() * m;
  Eigen::SelfAdjointEigenSolver<Mat4> spectrum(0.5 * (k + k.transpose()), Eigen::EigenvaluesOnly);
  const Eigen::Vector4d e = spectrum.eigenvalues();  // ascending
  const double scale = e(3);
  if (e(0) < -kPairingTolerance * scale ||
      std::abs(e(1) - e(0)) > kPairingTolerance * scale ||
      std::abs(e(3) - e(2)) > kPairingTolerance * scale)
    throw NumericalError("symplectic spectrum is not paired; I1^2 >= 4 I2 fails beyond tolerance");
  inv.d_minus = std::sqrt(std::max(0.0, 0.5 * (e(0) + e(1))));
  inv.d_plus = std::sqrt(0.5 * (e(2) + e(3)));
  return inv;
}

Eigen::Matrix2d conditional_cov(const CovMatrix4& gamma_p, MeasurementBasis basis) {
  const Mat4 n = gamma_p.normalized();
  const int pinned = basis == MeasurementBasis::time ? TA : DA;
  const double alice_var = n(pinned, pinned);
  if (!(alice_var > 0.0))
    throw NumericalError("degenerate Alice variance in the conditioning basis");

  // (X gamma_AA X)^+ is rank one: 1/alice_var on the pinned slot.
  const Eigen::Vector2d r = n.block<1, 2>(pinned, 2).transpose();
  Mat2 out = n.block<2, 2>(2, 2) - (r * r.transpose()) / alice_var;
  return 0.5 * (out + out.transpose());
}

double holevo_information(const CovMatrix4& gamma_p) {
  const auto inv = symplectic_invariants(gamma_p);
  const double s_ab = entropy_f(inv.d_plus) + entropy_f(inv.d_minus);
  const double det_t = conditional_cov(gamma_p, MeasurementBasis::time).determinant();
  const double det_w = conditional_cov(gamma_p, MeasurementBasis::dispersed).determinant();
  if (!(det_t >= 0.0) || !(det_w >= 0.0))
    throw NumericalError("conditional covariance has negative determinant");
  const double s_t = entropy_f(std::sqrt(det_t));
  const double s_w = entropy_f(std::sqrt(det_w));
  return s_ab - 0.5 * (s_t + s_w);
}

double mutual_information(const CovMatrix4& gamma_pp) {
  const auto& g = gamma_pp.ps2();
  const double mu_t = g(TA, TB) / std::sqrt(g(TA, TA) * g(TB, TB));
  const double mu_d = g(DA, DB) / std::sqrt(g(DA, DA) * g(DB, DB));
  return 0.25 * (log2_inv_one_minus_sq(mu_t) + log2_inv_one_minus_sq(mu_d));
}

CapacityReport secret_key_capacity(const CovMatrix4& gamma_p, const CovMatrix4& gamma_pp,
                                   double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidArgument("beta must lie in [0, 1]");
  CapacityReport r;
  r.beta = beta;
  r.mutual_info_bits = mutual_information(gamma_pp);
  r.holevo_bits = holevo_information(gamma_p);
  r.delta_i_bpc = beta * r.mutual_info_bits - r.holevo_bits;
  r.abort = !(r.delta_i_bpc > 0.0);
  return r;
}

CapacityReport capacity_at(const EveNoise& noise, const Scenario& sc) {
  const CovMatrix4 gamma = build_noiseless_cov(sc.src, sc.disp);
  const CovMatrix4 gamma_p = apply_eve_noise(gamma, noise);
  const ClickProbabilities clicks = click_probabilities(sc.src, sc.link);
  const CovMatrix4 gamma_pp = apply_detector_model(gamma_p, clicks, sc.link);
  CapacityReport r = secret_key_capacity(gamma_p, gamma_pp, sc.beta);
  r.noise = noise;
  r.xi = xi_from_eps_eta(noise, schmidt_dimension(sc.src));
  return r;
}

CapacityReport worst_case_capacity(double xi, const Scenario& sc, Exec exec) {
  const auto region = physical_noise_region(xi, sc.region_grid, sc.src, sc.disp, exec);
  std::vector<CapacityReport> reports(region.size());
  parallel_for(region.size(), exec, [&](std::size_t i) { reports[i] = capacity_at(region[i], sc); });

  std::size_t best = 0;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const double v = reports[i].delta_i_bpc;
    const double b = reports[best].delta_i_bpc;
    if (v < b || (v == b && reports[i].noise.eta > reports[best].noise.eta)) best = i;
  }
  CapacityReport out = reports[best];
  out.xi = xi;
  return out;
}

RateReport key_rate(const CapacityReport& capacity, const SourceParams& src, const LinkParams& link,
                    const RateOptions& opts) {
  if (!(opts.sifting >= 0.0 && opts.sifting <= 1.0))
    throw InvalidArgument("sifting factor must lie in [0, 1]");
  const double pd = dark_count_prob(link, src);
  auto single_click_given_pair = [pd](double loss) {
    return (1.0 - loss) * (1.0 - pd) + loss * pd;
  };
  const double click_a = single_click_given_pair(loss_a(link));
  const double click_b = single_click_given_pair(loss_b(link));

  RateReport r;
  r.convention = opts.convention;
  r.frame_rate_hz = 1e12 / frame_duration_ps(src);
  r.gamma_nu_hz = src.pair_prob * r.frame_rate_hz;
  if (opts.convention == RateConvention::paper) {
    r.p_c = opts.sifting * click_a * click_b;
    r.rate_bps = capacity.delta_i_bpc * r.p_c * r.gamma_nu_hz;
  } else {
    const double pnu = src.pair_prob;
    r.p_c = opts.sifting * (pnu * click_a * click_b + (1.0 - pnu) * pd * pd);
    r.rate_bps = capacity.delta_i_bpc * r.p_c * r.frame_rate_hz;
  }
  return r;
}

}  // namespace doqkd
