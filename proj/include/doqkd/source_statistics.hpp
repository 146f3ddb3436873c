#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace doqkd {

/// 10^(-1/10): transmissivity of a switch with 1 dB insertion loss.
inline constexpr double kOneDbSwitchTransmissivity = 0.79432823472428150;

struct HeraldParams {
  double mu_f = 1.0;  ///< expected pairs per frame
  int d = 64;         ///< mode degeneracy g = d, also the number of time bins per frame
  double eta_d = 0.93;  ///< herald detector efficiency
  double eta_s = kOneDbSwitchTransmissivity;  ///< modulator 'on' transmissivity
  double multiphoton_bound = 0.01;
  /// mu_b / mu_f, the share of a frame's pairs expected in one time bin.
  /// Defaults to 1 / d when unset.
  std::optional<double> bin_fraction;

  void validate() const;
  double bin_mean() const;
};

struct PhotonNumberDist {
  std::vector<double> pmf;  ///< index m = 0 .. m_max
  double tail = 0.0;        ///< probability of m > m_max
};

/// Negative-binomial form of g-fold degenerate Bose-Einstein statistics:
/// C(m+g-1, m) (mu/g)^m / (1 + mu/g)^(m+g), evaluated in log space.
double bose_einstein_pmf(double mu, long m, int g);

/// sum_k p(mu_f, k, d) (1 - eta_d)^k, summed until the tail bound drops below 1e-16.
double herald_failure_prob(const HeraldParams& hp);

/**
 * Number of photons leaving Alice per frame.
 *
 * With probability p_fail nothing is heralded and the output is vacuum.
 * Otherwise Alice passes the heralded time bin, which holds k >= 1 pairs with
 * probability p(mu_b, k, d) / (1 - p(mu_b, 0, d)), and each of its k photons
 * survives the modulator with probability eta_s.
 */
PhotonNumberDist heralded_output_dist(const HeraldParams& hp, int m_max);

struct PhotonStats {
  double p_zero = 0.0;
  double p_one = 0.0;
  /// p(>1 | >=1) = (1 - p0 - p1) / (1 - p0), computed without cancellation.
  double p_multi_given_nonvacuum = 0.0;
};

PhotonStats heralded_stats(const HeraldParams& hp);

/// Unheralded source: pair number straight from p(mu_f, m, g).
PhotonStats unheralded_stats(double mu_f, int g);

struct OperatingPoint {
  double mu_f = 0.0;
  double p_one = 0.0;
  double p_multi_given_nonvacuum = 0.0;
};

/// Largest mu_f whose heralded p(>1 | >=1) stays at or below `bound`.
OperatingPoint operating_point(int d, double eta_d, double eta_s, double bound,
                               std::optional<double> bin_fraction = std::nullopt);

}  // namespace doqkd
