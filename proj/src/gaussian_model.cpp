#include "doqkd/gaussian_model.hpp"

#include <cmath>
#include <string>

#include "doqkd/error.hpp"

namespace doqkd {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument(msg);
}

}  // namespace

void SourceParams::validate() const {
  require(std::isfinite(sigma_coh_ps) && sigma_coh_ps > 0.0, "sigma_coh_ps must be > 0");
  require(std::isfinite(sigma_cor_ps) && sigma_cor_ps > 0.0, "sigma_cor_ps must be > 0");
  require(sigma_coh_ps >= sigma_cor_ps, "sigma_coh_ps must be >= sigma_cor_ps");
  require(pair_prob >= 0.0 && pair_prob <= 1.0, "pair_prob must lie in [0, 1]");
}

AuxScales aux_scales(const SourceParams& src) {
  return {16.0 * src.sigma_coh_ps * src.sigma_coh_ps, 4.0 * src.sigma_cor_ps * src.sigma_cor_ps,
          src.sigma_coh_ps / src.sigma_cor_ps};
}

CovMatrix4::CovMatrix4(const Matrix& m_ps2, double beta2L_ps2)
    : m_(0.5 * (m_ps2 + m_ps2.transpose())), beta2L_(beta2L_ps2) {
  require(beta2L_ps2 != 0.0 && std::isfinite(beta2L_ps2), "covariance needs a nonzero beta2*L");
}

CovMatrix4 CovMatrix4::from_normalized(const Matrix& normalized, double beta2L_ps2) {
  const Eigen::Vector4d s(1.0, beta2L_ps2, 1.0, beta2L_ps2);
  return {s.asDiagonal() * normalized * s.asDiagonal(), beta2L_ps2};
}

CovMatrix4::Matrix CovMatrix4::normalized() const {
  const Eigen::Vector4d s(1.0, 1.0 / beta2L_, 1.0, 1.0 / beta2L_);
  const Matrix n = s.asDiagonal() * m_ * s.asDiagonal();
  return 0.5 * (n + n.transpose());
}

double schmidt_dimension(const SourceParams& src) { return src.sigma_coh_ps / src.sigma_cor_ps; }

double dispersed_correlation_time(double sigma_cor_ps, double beta2A_LA_ps2, double beta2B_LB_ps2) {
  require(sigma_cor_ps > 0.0, "sigma_cor_ps must be > 0");
  const double total = beta2A_LA_ps2 + beta2B_LB_ps2;
  const double s2 = sigma_cor_ps * sigma_cor_ps;
  return std::sqrt((s2 * s2 + total * total) / s2);
}

double conjugacy_ratio(const DispersionParams& disp, const SourceParams& src) {
  return std::abs(disp.beta2L()) / (src.sigma_coh_ps * src.sigma_cor_ps);
}

CovMatrix4 build_noiseless_cov(const SourceParams& src, const DispersionParams& disp) {
  src.validate();
  const double k = disp.k();
  require(k != 0.0 && std::isfinite(k), "dispersion product k = 2 beta2 L must be nonzero");
  const auto [u, v, d] = aux_scales(src);
  require(u > v, "degenerate source: need u > v (d > 1/2)");

  // Normalized blocks: D in 1/ps.
  const double tt_sum = (u + v) / 16.0;
  const double tt_dif = (u - v) / 16.0;
  const double td_sum = (u + v) / (8.0 * k);
  const double td_dif = (u - v) / (8.0 * k);
  const double disp_factor = (4.0 * k * k + u * v) / (4.0 * k * k * u * v);
  const double dd_sum = (u + v) * disp_factor;
  const double dd_dif = (u - v) * disp_factor;

  CovMatrix4::Matrix g;
  // clang-format off
  g <<  tt_sum, -td_sum,  tt_dif,  td_dif,
       -td_sum,  dd_sum, -td_dif, -dd_dif,
        tt_dif, -td_dif,  tt_sum,  td_sum,
        td_dif, -dd_dif,  td_sum,  dd_sum;
  // clang-format on
  return CovMatrix4::from_normalized(g, disp.beta2L());
}

double residual_cross_correlation(const CovMatrix4& gamma) {
  const auto n = gamma.normalized();
  const double a = std::abs(n(TA, DA)) / std::sqrt(n(TA, TA) * n(DA, DA));
  const double b = std::abs(n(TB, DB)) / std::sqrt(n(TB, TB) * n(DB, DB));
  return std::max(a, b);
}

double var_time_difference(const CovMatrix4& gamma) {
  const auto& m = gamma.ps2();
  return m(TA, TA) + m(TB, TB) - 2.0 * m(TA, TB);
}

double var_time_sum(const CovMatrix4& gamma) {
  const auto& m = gamma.ps2();
  return m(TA, TA) + m(TB, TB) + 2.0 * m(TA, TB);
}

}  // namespace doqkd
