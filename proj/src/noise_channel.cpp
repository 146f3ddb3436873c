#include "doqkd/noise_channel.hpp"

#include <cmath>
#include <string>

#include "doqkd/error.hpp"
#include "doqkd/security_bounds.hpp"

namespace doqkd {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument(msg);
}

bool unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

void EveNoise::validate() const {
  require(std::isfinite(epsilon) && epsilon >= 0.0, "epsilon must be >= 0");
  require(unit_interval(eta), "eta must lie in [0, 1]");
}

void LinkParams::validate() const {
  require(std::isfinite(alpha_db_per_km) && alpha_db_per_km >= 0.0, "alpha_db_per_km must be >= 0");
  require(std::isfinite(length_km) && length_km >= 0.0, "length_km must be >= 0");
  require(unit_interval(eta_det_a), "eta_det_a must lie in [0, 1]");
  require(unit_interval(eta_det_b), "eta_det_b must lie in [0, 1]");
  require(std::isfinite(sigma_jitter_ps) && sigma_jitter_ps >= 0.0, "sigma_jitter_ps must be >= 0");
  require(std::isfinite(dark_rate_hz) && dark_rate_hz >= 0.0, "dark_rate_hz must be >= 0");
}

double frame_duration_ps(const SourceParams& src) { return 6.0 * src.sigma_coh_ps; }

double dark_count_prob(const LinkParams& link, const SourceParams& src) {
  const double p = link.dark_rate_hz * frame_duration_ps(src) * 1e-12;
  require(unit_interval(p), "dark-count probability per frame must lie in [0, 1]");
  return p;
}

double channel_transmission(const LinkParams& link) {
  return std::pow(10.0, -link.alpha_db_per_km * link.length_km / 10.0);
}

double loss_a(const LinkParams& link) { return 1.0 - link.eta_det_a; }

double loss_b(const LinkParams& link) { return 1.0 - link.eta_det_b * channel_transmission(link); }

ClickProbabilities click_probabilities(const SourceParams& src, const LinkParams& link) {
  src.validate();
  link.validate();
  const double pnu = src.pair_prob;
  const double pd = dark_count_prob(link, src);

  ClickProbabilities c{};
  auto party = [&](double loss, double& p, double& d, double& r_nu, double& r_d) {
    p = pnu * (1.0 - loss) * (1.0 - pd);
    d = (pnu * loss + (1.0 - pnu)) * pd;
    const double total = p + d;
    if (!(total > 0.0))
      throw NumericalError("no single-click events possible (p + d = 0); R_nu and R_d undefined");
    r_nu = p / total;
    r_d = 1.0 - r_nu;
  };
  party(loss_a(link), c.p_a, c.d_a, c.r_nu_a, c.r_d_a);
  party(loss_b(link), c.p_b, c.d_b, c.r_nu_b, c.r_d_b);
  return c;
}

CovMatrix4 apply_eve_noise(const CovMatrix4& gamma, const EveNoise& noise) {
  noise.validate();
  CovMatrix4::Matrix m = gamma.ps2();
  const double corr = 1.0 - noise.eta;
  m.block<2, 2>(0, 2) *= corr;
  m.block<2, 2>(2, 0) *= corr;
  m.block<2, 2>(2, 2) *= 1.0 + noise.epsilon;
  return gamma.with(m);
}

CovMatrix4 apply_detector_model(const CovMatrix4& gamma_p, const ClickProbabilities& clicks,
                                const LinkParams& link) {
  const auto& g = gamma_p.ps2();
  for (int i = 0; i < 4; ++i)
    if (!(g(i, i) >= 0.0)) throw InvalidArgument("Gamma' has a negative variance on its diagonal");

  const double jitter = link.sigma_jitter_ps * link.sigma_jitter_ps;
  // Uniform over a window of 6 standard deviations: (6 sigma)^2 / 12 = 3 sigma^2.
  const double dark_t = 3.0 * g(TA, TA);
  const double dark_d = 3.0 * g(DA, DA);
  const Eigen::Vector4d r_nu(clicks.r_nu_a, clicks.r_nu_a, clicks.r_nu_b, clicks.r_nu_b);
  const Eigen::Vector4d r_d(clicks.r_d_a, clicks.r_d_a, clicks.r_d_b, clicks.r_d_b);
  const Eigen::Vector4d dark(dark_t, dark_d, dark_t, dark_d);

  CovMatrix4::Matrix out;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i == j) {
        out(i, i) = r_nu(i) * (g(i, i) + jitter) + r_d(i) * dark(i);
      } else if ((i < 2) == (j < 2)) {
        out(i, j) = r_nu(i) * g(i, j);  // same party: one shared click event
      } else {
        out(i, j) = r_nu(i) * r_nu(j) * g(i, j);
      }
    }
  }
  return gamma_p.with(out);
}

double xi_from_eps_eta(const EveNoise& noise, double d) {
  require(d > 0.5, "d must exceed 1/2");
  const double d2 = d * d;
  return noise.epsilon * (d2 + 0.25) + 2.0 * noise.eta * (d2 - 0.25);
}

double eps_from_eta_xi(double eta, double xi, double d) {
  require(d > 0.5, "d must exceed 1/2");
  const double d2 = d * d;
  return (-2.0 * eta * (d2 - 0.25) + xi) / (d2 + 0.25);
}

double theta_from_eps_eta(const EveNoise& noise, double d) {
  require(d > 0.5, "d must exceed 1/2");
  // With u/v = 4 d^2: theta = [2 eta (u - v) - eps (u + v)] / (4u).
  const double r = 4.0 * d * d;
  return (2.0 * noise.eta * (r - 1.0) - noise.epsilon * (r + 1.0)) / (4.0 * r);
}

MeasuredNoise measured_noise(const EveNoise& noise, const SourceParams& src) {
  const double d = schmidt_dimension(src);
  const double xi = xi_from_eps_eta(noise, d);
  return {xi, theta_from_eps_eta(noise, d), sigma_delta_from_xi(xi, src.sigma_cor_ps)};
}

double sigma_delta_from_xi(double xi, double sigma_cor_ps) {
  require(xi >= -1.0, "xi must be >= -1");
  return sigma_cor_ps * (std::sqrt(1.0 + xi) - 1.0);
}

double xi_from_sigma_delta(double sigma_delta_ps, double sigma_cor_ps) {
  require(sigma_cor_ps > 0.0, "sigma_cor_ps must be > 0");
  const double r = 1.0 + sigma_delta_ps / sigma_cor_ps;
  return r * r - 1.0;
}

double max_eta_for_xi(double xi, double d) {
  require(d > 0.5, "d must exceed 1/2");
  return xi / (2.0 * (d * d - 0.25));
}

std::vector<EveNoise> physical_noise_region(double xi, std::size_t grid_size, const SourceParams& src,
                                            const DispersionParams& disp, Exec exec) {
  require(std::isfinite(xi) && xi >= 0.0, "xi must be >= 0");
  require(grid_size >= 2, "region grid needs at least 2 points");
  const double d = schmidt_dimension(src);
  const double eta_max = max_eta_for_xi(xi, d);
  if (eta_max > 1.0) throw NoPhysicalRegion("no physical interpretation: xi requires eta > 1");

  const CovMatrix4 gamma = build_noiseless_cov(src, disp);
  const double mi_noiseless = mutual_information(gamma);
  const double var_diff_noiseless = var_time_difference(gamma);

  const std::size_t n = xi == 0.0 ? 1 : grid_size;
  std::vector<EveNoise> candidates(n);
  std::vector<char> keep(n, 0);

  parallel_for(n, exec, [&](std::size_t i) {
    EveNoise e;
    if (n == 1) {
      e = {0.0, 0.0};
    } else if (i + 1 == n) {
      e = {0.0, eta_max};  // pin the eps = 0 endpoint exactly
    } else {
      e.eta = eta_max * static_cast<double>(i) / static_cast<double>(n - 1);
      e.epsilon = eps_from_eta_xi(e.eta, xi, d);
    }
    candidates[i] = e;
    if (e.epsilon < 0.0) return;

    const CovMatrix4 gp = apply_eve_noise(gamma, e);
    const bool data_processing = mutual_information(gp) <= mi_noiseless * (1.0 + 1e-12);
    const bool var_grows = var_time_difference(gp) >= var_diff_noiseless * (1.0 - 1e-12);
    bool symplectic_ok = false;
    try {
      symplectic_ok = symplectic_invariants(gp).d_minus >= 0.5 - kEntropyClampTolerance;
    } catch (const NumericalError&) {
    }
    keep[i] = data_processing && var_grows && symplectic_ok;
  });

  std::vector<EveNoise> region;
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i]) region.push_back(candidates[i]);
  if (region.empty())
    throw NoPhysicalRegion("no physical interpretation for xi = " + std::to_string(xi));
  return region;
}

}  // namespace doqkd
