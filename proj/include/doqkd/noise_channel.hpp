#pragma once

#include <cstddef>
#include <vector>

#include "doqkd/gaussian_model.hpp"
#include "doqkd/parallel.hpp"

namespace doqkd {

/// Eve-attributable noise: excess variance on Bob and loss of A-B correlation.
struct EveNoise {
  double epsilon = 0.0;
  double eta = 0.0;

  void validate() const;
  friend bool operator==(const EveNoise&, const EveNoise&) = default;
};

/// Experimentally accessible noise parameters.
struct MeasuredNoise {
  double xi = 0.0;
  double theta = 0.0;
  double sigma_delta_ps = 0.0;
};

struct LinkParams {
  double alpha_db_per_km = 0.2;
  double length_km = 0.0;
  double eta_det_a = 0.93;
  double eta_det_b = 0.93;
  double sigma_jitter_ps = 20.0;
  double dark_rate_hz = 1000.0;

  void validate() const;
  friend bool operator==(const LinkParams&, const LinkParams&) = default;
};

/// 6 sigma_coh.
double frame_duration_ps(const SourceParams& src);
/// p_d = r_D x frame duration. Throws if the product leaves [0, 1].
double dark_count_prob(const LinkParams& link, const SourceParams& src);
/// 10^(-alpha L / 10).
double channel_transmission(const LinkParams& link);
/// Total loss of Alice's (detector only) and Bob's (fiber + detector) arms.
double loss_a(const LinkParams& link);
double loss_b(const LinkParams& link);

struct ClickProbabilities {
  double p_a, p_b;  ///< photon (and no dark count)
  double d_a, d_b;  ///< dark count given one detection
  double r_nu_a, r_nu_b;
  double r_d_a, r_d_b;
};

ClickProbabilities click_probabilities(const SourceParams& src, const LinkParams& link);

/// Gamma' = [[g_AA, (1-eta) g_AB], [(1-eta) g_BA, (1+eps) g_BB]].
CovMatrix4 apply_eve_noise(const CovMatrix4& gamma, const EveNoise& noise);

/**
 * Gamma'' from Gamma': each party's outcome is a photon click (jittered) with
 * probability R_nu or a dark count uniform over six standard deviations of
 * Alice's Gamma' marginal with probability R_d.
 */
CovMatrix4 apply_detector_model(const CovMatrix4& gamma_p, const ClickProbabilities& clicks,
                                const LinkParams& link);

double xi_from_eps_eta(const EveNoise& noise, double d);
double eps_from_eta_xi(double eta, double xi, double d);
/// Relative shrinkage of Var[T_A + T_B].
double theta_from_eps_eta(const EveNoise& noise, double d);
MeasuredNoise measured_noise(const EveNoise& noise, const SourceParams& src);

double sigma_delta_from_xi(double xi, double sigma_cor_ps);
double xi_from_sigma_delta(double sigma_delta_ps, double sigma_cor_ps);
/// Largest eta on the (eps >= 0) line for a given xi.
double max_eta_for_xi(double xi, double d);

inline constexpr std::size_t kDefaultRegionGrid = 200;

/**
 * Grid of (eps, eta) on the xi line that satisfies:
 *   (i)   I(A;B) from Gamma' does not exceed the noiseless value,
 *   (ii)  every symplectic eigenvalue of Gamma' is >= 1/2,
 *   (iii) Var[T_A' - T_B'] >= Var[T_A - T_B].
 * The grid is uniform in eta over [0, max_eta] with both endpoints. Throws
 * NoPhysicalRegion when nothing survives.
 */
std::vector<EveNoise> physical_noise_region(double xi, std::size_t grid_size, const SourceParams& src,
                                            const DispersionParams& disp, Exec exec = Exec::parallel);

}  // namespace doqkd
