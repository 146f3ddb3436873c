#pragma once

#include <Eigen/Dense>
#include <string_view>

#include "doqkd/gaussian_model.hpp"
#include "doqkd/noise_channel.hpp"
#include "doqkd/parallel.hpp"

namespace doqkd {

struct SymplecticInvariants {
  double i1;
  double i2;
  double d_plus;
  double d_minus;
};

enum class MeasurementBasis { time, dispersed };

/// Everything the capacity pipeline needs besides the noise itself.
struct Scenario {
  SourceParams src;
  DispersionParams disp;
  LinkParams link;
  double beta = 0.9;
  std::size_t region_grid = kDefaultRegionGrid;
};

struct CapacityReport {
  double xi = 0.0;
  EveNoise noise;  ///< noise pair the report was evaluated at (worst case for worst_case_capacity)
  double mutual_info_bits = 0.0;
  double holevo_bits = 0.0;
  double delta_i_bpc = 0.0;
  double beta = 0.0;
  bool abort = true;  ///< delta_i_bpc <= 0
};

enum class RateConvention { paper, strict };

std::string_view to_string(RateConvention c);
RateConvention rate_convention_from_string(std::string_view s);

struct RateReport {
  double rate_bps = 0.0;
  double p_c = 0.0;
  double gamma_nu_hz = 0.0;
  double frame_rate_hz = 0.0;
  RateConvention convention = RateConvention::paper;
};

inline constexpr double kEntropyClampTolerance = 1e-9;

/// (x+1/2) log2(x+1/2) - (x-1/2) log2(x-1/2), with f(1/2) = 0.
double entropy_f(double x);

/// Invariants of the normalized Gamma'. I1 and I2 come from the block
/// determinants; d+- from the Williamson spectrum, which equals
/// sqrt((I1 +- sqrt(I1^2 - 4 I2)) / 2) in exact arithmetic. Throws
/// NumericalError when the spectrum is not paired beyond round-off.
SymplecticInvariants symplectic_invariants(const CovMatrix4& gamma_p);

/// Bob's normalized 2x2 covariance conditioned on Alice measuring in `basis`.
Eigen::Matrix2d conditional_cov(const CovMatrix4& gamma_p, MeasurementBasis basis);

/// chi(A;E) = S(AB) - [S(B|t) + S(B|w)] / 2, in bits.
double holevo_information(const CovMatrix4& gamma_p);

/// I(A;B) = [log2 1/(1-mu_T^2) + log2 1/(1-mu_D^2)] / 4, in bits.
double mutual_information(const CovMatrix4& gamma_pp);

CapacityReport secret_key_capacity(const CovMatrix4& gamma_p, const CovMatrix4& gamma_pp,
                                   double beta);

/// Full pipeline (Gamma -> Gamma' -> Gamma'') at a fixed noise pair.
CapacityReport capacity_at(const EveNoise& noise, const Scenario& sc);

/// Minimum of Delta I over physical_noise_region(xi). Ties go to the larger eta.
CapacityReport worst_case_capacity(double xi, const Scenario& sc, Exec exec = Exec::parallel);

struct RateOptions {
  RateConvention convention = RateConvention::paper;
  double sifting = 0.5;
};

/**
 * Secure bits per second. gamma_nu = p_nu / (6 sigma_coh).
 *   paper:  R = dI * P_C * gamma_nu, P_C = s * P1_A|pair * P1_B|pair
 *   strict: R = dI * frame_rate * s * [p_nu P1_A|pair P1_B|pair + (1 - p_nu) p_d^2]
 * where P1_X|pair = (1-L_X)(1-p_d) + L_X p_d is the single-click probability
 * given a pair and s the sifting factor. A negative dI gives a negative rate;
 * callers check CapacityReport::abort.
 */
RateReport key_rate(const CapacityReport& capacity, const SourceParams& src, const LinkParams& link,
                    const RateOptions& opts = {});

}  // namespace doqkd
