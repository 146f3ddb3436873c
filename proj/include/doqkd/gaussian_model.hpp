#pragma once

#include <Eigen/Dense>

namespace doqkd {

/// Biphoton source. Times in ps.
struct SourceParams {
  double sigma_coh_ps = 1920.0;
  double sigma_cor_ps = 30.0;
  double pair_prob = 0.607;  ///< p_nu, pair probability per frame
  double pump_wavelength_nm = 780.0;  ///< informational only

  /// Throws InvalidArgument naming the offending field.
  void validate() const;
  friend bool operator==(const SourceParams&, const SourceParams&) = default;
};

/// Dispersive element. beta2 in ps^2/km (signed), length in km.
struct DispersionParams {
  double beta2_ps2_per_km = 5.0e7;
  double length_km = 1.0;

  double beta2L() const noexcept { return beta2_ps2_per_km * length_km; }
  /// k = 2 beta2 L, in ps^2.
  double k() const noexcept { return 2.0 * beta2L(); }

  static DispersionParams from_k(double k_ps2) { return {k_ps2 / 2.0, 1.0}; }
  friend bool operator==(const DispersionParams&, const DispersionParams&) = default;
};

struct AuxScales {
  double u;  ///< 16 sigma_coh^2, ps^2
  double v;  ///< 4 sigma_cor^2, ps^2
  double d;  ///< sigma_coh / sigma_cor
};

AuxScales aux_scales(const SourceParams& src);

/// Row/column indices of the canonical (T_A, D_A, T_B, D_B) ordering.
enum Quadrature : int { TA = 0, DA = 1, TB = 2, DB = 3 };

/**
 * Covariance over (T_A, D_A, T_B, D_B) with every entry in ps^2.
 *
 * Dispersed-basis rows and columns are kept in time units. The signed scale
 * beta2*L is carried alongside so the matrix can be mapped to the normalized
 * representation, where D is a frequency (1/ps) and [T, D] = i puts the vacuum
 * symplectic floor at 1/2.
 */
class CovMatrix4 {
 public:
  using Matrix = Eigen::Matrix4d;

  CovMatrix4(const Matrix& m_ps2, double beta2L_ps2);

  static CovMatrix4 from_normalized(const Matrix& normalized, double beta2L_ps2);

  const Matrix& ps2() const noexcept { return m_; }
  double beta2L() const noexcept { return beta2L_; }
  double operator()(int row, int col) const { return m_(row, col); }

  /// D rows and columns divided by beta2*L.
  Matrix normalized() const;

  /// Returns a copy with a different matrix but the same dispersion scale.
  CovMatrix4 with(const Matrix& m_ps2) const { return {m_ps2, beta2L_}; }

 private:
  Matrix m_;
  double beta2L_;
};

double schmidt_dimension(const SourceParams& src);

/// sqrt((sigma_cor^4 + (b2A LA + b2B LB)^2) / sigma_cor^2).
double dispersed_correlation_time(double sigma_cor_ps, double beta2A_LA_ps2, double beta2B_LB_ps2);

/// |beta2 L| / (sigma_coh sigma_cor).
double conjugacy_ratio(const DispersionParams& disp, const SourceParams& src);

inline constexpr double kDefaultConjugacyThreshold = 10.0;

inline bool is_conjugate(double ratio, double threshold = kDefaultConjugacyThreshold) {
  return ratio >= threshold;
}

/// Noiseless Gamma with dispersed entries rescaled into ps^2.
CovMatrix4 build_noiseless_cov(const SourceParams& src, const DispersionParams& disp);

/// Largest |corr(T_X, D_X)| within a party, computed on the normalized matrix.
/// For the noiseless state this equals 2 / conjugacy_ratio.
double residual_cross_correlation(const CovMatrix4& gamma);

/// Var[T_A - T_B] and Var[T_A + T_B] in ps^2.
double var_time_difference(const CovMatrix4& gamma);
double var_time_sum(const CovMatrix4& gamma);

}  // namespace doqkd
