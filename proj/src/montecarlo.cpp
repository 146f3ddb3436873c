#include "doqkd/montecarlo.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "doqkd/error.hpp"

namespace doqkd {

int max_threads() { return omp_get_max_threads(); }

std::string_view to_string(Basis b) { return b == Basis::time ? "time" : "dispersed"; }

std::string_view to_string(Click c) {
  switch (c) {
    case Click::none: return "none";
    case Click::photon: return "photon";
    case Click::dark: return "dark";
    case Click::multi: return "multi";
  }
  return "none";
}

void SimConfig::validate() const {
  src.validate();
  link.validate();
  eve.validate();
  if (n_frames < 1) throw InvalidArgument("n_frames must be >= 1");
  if (!(basis_bias >= 0.0 && basis_bias <= 1.0)) throw InvalidArgument("basis_bias must lie in [0, 1]");
  if (photon_number && photon_number->pmf.empty())
    throw InvalidArgument("photon_number distribution is empty");
}

namespace {

/// Frame-independent quantities shared by every frame.
struct Prepared {
  Eigen::Matrix4d chol;
  double pair_prob;
  double transmit_a;
  double transmit_b;
  double p_dark;
  double jitter_ps;
  double window_time_ps;
  double window_dispersed_ps;
  double basis_bias;
  std::vector<double> photon_cdf;  ///< empty unless pair counts are sampled
};

Prepared prepare(const SimConfig& cfg) {
  cfg.validate();
  const CovMatrix4 gamma_p = apply_eve_noise(build_noiseless_cov(cfg.src, cfg.disp), cfg.eve);
  Eigen::LLT<Eigen::Matrix4d> llt(gamma_p.ps2());
  if (llt.info() != Eigen::Success) throw NumericalError("Gamma' is not positive definite");

  Prepared p;
  p.chol = llt.matrixL();
  p.pair_prob = cfg.src.pair_prob;
  p.transmit_a = 1.0 - loss_a(cfg.link);
  p.transmit_b = 1.0 - loss_b(cfg.link);
  p.p_dark = dark_count_prob(cfg.link, cfg.src);
  p.jitter_ps = cfg.link.sigma_jitter_ps;
  p.window_time_ps = 6.0 * std::sqrt(gamma_p(TA, TA));
  p.window_dispersed_ps = 6.0 * std::sqrt(gamma_p(DA, DA));
  p.basis_bias = cfg.basis_bias;
  if (cfg.photon_number) {
    double acc = 0.0;
    for (double w : cfg.photon_number->pmf) p.photon_cdf.push_back(acc += w);
  }
  return p;
}

struct Detection {
  Click click;
  double t_ps;
};

template <class Rng>
Detection detect(Rng& rng, int arrived, double photon_time, double window, const Prepared& p) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const bool dark = unif(rng) < p.p_dark;
  if (arrived > 1 || (arrived == 1 && dark)) return {Click::multi, std::nan("")};
  if (arrived == 1) {
    std::normal_distribution<double> jitter(0.0, 1.0);
    return {Click::photon, photon_time + p.jitter_ps * jitter(rng)};
  }
  if (dark) return {Click::dark, (unif(rng) - 0.5) * window};
  return {Click::none, std::nan("")};
}

FrameOutcome simulate_frame(const Prepared& p, std::uint64_t seed, std::uint64_t index) {
  FrameRng rng(seed, index);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  FrameOutcome f;
  f.frame_index = index;
  f.basis_a = unif(rng) < p.basis_bias ? Basis::time : Basis::dispersed;
  f.basis_b = unif(rng) < p.basis_bias ? Basis::time : Basis::dispersed;

  int photons_to_bob = 0;
  if (p.photon_cdf.empty()) {
    photons_to_bob = unif(rng) < p.pair_prob ? 1 : 0;
  } else {
    const double x = unif(rng);
    photons_to_bob = static_cast<int>(std::upper_bound(p.photon_cdf.begin(), p.photon_cdf.end(), x) -
                                      p.photon_cdf.begin());
  }
  const bool pair = photons_to_bob > 0;

  Eigen::Vector4d x = Eigen::Vector4d::Zero();
  if (pair) {
    Eigen::Vector4d z;
    for (int i = 0; i < 4; ++i) z(i) = normal(rng);
    x = p.chol * z;
  }

  const int arrived_a = pair && unif(rng) < p.transmit_a ? 1 : 0;
  int arrived_b = 0;
  for (int i = 0; i < photons_to_bob; ++i) arrived_b += unif(rng) < p.transmit_b ? 1 : 0;

  const bool time_a = f.basis_a == Basis::time;
  const bool time_b = f.basis_b == Basis::time;
  const auto a = detect(rng, arrived_a, x(time_a ? TA : DA),
                        time_a ? p.window_time_ps : p.window_dispersed_ps, p);
  const auto b = detect(rng, arrived_b, x(time_b ? TB : DB),
                        time_b ? p.window_time_ps : p.window_dispersed_ps, p);
  f.click_a = a.click;
  f.t_a_ps = a.t_ps;
  f.click_b = b.click;
  f.t_b_ps = b.t_ps;
  return f;
}

bool single(Click c) { return c == Click::photon || c == Click::dark; }

void append(SiftedPairs& dst, const SiftedPairs& src) {
  dst.t_a_ps.insert(dst.t_a_ps.end(), src.t_a_ps.begin(), src.t_a_ps.end());
  dst.t_b_ps.insert(dst.t_b_ps.end(), src.t_b_ps.begin(), src.t_b_ps.end());
  dst.both_photon.insert(dst.both_photon.end(), src.both_photon.begin(), src.both_photon.end());
}

SiftedSample sift_range(std::span<const FrameOutcome> outcomes) {
  SiftedSample s;
  for (const auto& f : outcomes) {
    ++s.frames;
    if (f.click_a == Click::none || f.click_b == Click::none) {
      ++s.no_click;
    } else if (!single(f.click_a) || !single(f.click_b)) {
      ++s.multi_click;
    } else if (f.basis_a != f.basis_b) {
      ++s.basis_mismatch;
    } else {
      auto& dst = f.basis_a == Basis::time ? s.time : s.dispersed;
      dst.t_a_ps.push_back(f.t_a_ps);
      dst.t_b_ps.push_back(f.t_b_ps);
      dst.both_photon.push_back(f.click_a == Click::photon && f.click_b == Click::photon);
    }
  }
  return s;
}

struct Moments {
  double var_a = 0.0;
  double var_b = 0.0;
  double cov = 0.0;
  double var_diff = 0.0;
  double var_sum = 0.0;
  std::size_t n = 0;
};

double median_of(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

/// Second moments of the selected pairs, with an optional symmetric window on t_A - t_B.
Moments moments(const SiftedPairs& pairs, const EstimateOptions& opts) {
  std::vector<std::size_t> idx;
  if (opts.use_labels) {
    for (std::size_t i = 0; i < pairs.size(); ++i)
      if (pairs.both_photon[i]) idx.push_back(i);
  } else if (pairs.size() > 0) {
    std::vector<double> diff(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) diff[i] = pairs.t_a_ps[i] - pairs.t_b_ps[i];
    const double med = median_of(diff);
    std::vector<double> dev(diff.size());
    for (std::size_t i = 0; i < diff.size(); ++i) dev[i] = std::abs(diff[i] - med);
    const double robust_sigma = 1.482602218505602 * median_of(dev);
    const double half_width = opts.window_sigmas * robust_sigma;
    for (std::size_t i = 0; i < diff.size(); ++i)
      if (std::abs(diff[i] - med) <= half_width) idx.push_back(i);
  }

  Moments m;
  m.n = idx.size();
  if (m.n < kMinPairsPerBasis) return m;
  double mean_a = 0.0, mean_b = 0.0;
  for (auto i : idx) {
    mean_a += pairs.t_a_ps[i];
    mean_b += pairs.t_b_ps[i];
  }
  mean_a /= static_cast<double>(m.n);
  mean_b /= static_cast<double>(m.n);
  for (auto i : idx) {
    const double da = pairs.t_a_ps[i] - mean_a;
    const double db = pairs.t_b_ps[i] - mean_b;
    m.var_a += da * da;
    m.var_b += db * db;
    m.cov += da * db;
  }
  const double denom = static_cast<double>(m.n - 1);
  m.var_a /= denom;
  m.var_b /= denom;
  m.cov /= denom;
  m.var_diff = m.var_a + m.var_b - 2.0 * m.cov;
  m.var_sum = m.var_a + m.var_b + 2.0 * m.cov;
  if (!opts.use_labels) {
    // Variance of a normal truncated to +-w sigma is (1 - 2 w phi(w) / (2 Phi(w) - 1)) sigma^2.
    const double w = opts.window_sigmas;
    const double phi = std::exp(-0.5 * w * w) / std::sqrt(2.0 * M_PI);
    const double mass = std::erf(w / std::sqrt(2.0));
    m.var_diff /= 1.0 - 2.0 * w * phi / mass;
  }
  return m;
}

}  // namespace

std::vector<FrameOutcome> simulate(const SimConfig& cfg, Exec exec) {
  const Prepared p = prepare(cfg);
  std::vector<FrameOutcome> out(cfg.n_frames);
  parallel_for(out.size(), exec, [&](std::size_t i) { out[i] = simulate_frame(p, cfg.seed, i); });
  return out;
}

void SiftedSample::merge(const SiftedSample& later) {
  append(time, later.time);
  append(dispersed, later.dispersed);
  frames += later.frames;
  no_click += later.no_click;
  multi_click += later.multi_click;
  basis_mismatch += later.basis_mismatch;
}

SiftedSample sift(std::span<const FrameOutcome> outcomes, Exec exec) {
  if (exec == Exec::serial) return sift_range(outcomes);
  const std::size_t chunks = std::max<std::size_t>(1, static_cast<std::size_t>(max_threads()) * 4);
  const std::size_t per = (outcomes.size() + chunks - 1) / chunks;
  std::vector<SiftedSample> parts(chunks);
  parallel_for(chunks, exec, [&](std::size_t c) {
    const std::size_t begin = std::min(outcomes.size(), c * per);
    const std::size_t end = std::min(outcomes.size(), begin + per);
    parts[c] = sift_range(outcomes.subspan(begin, end - begin));
  });
  SiftedSample all;
  for (const auto& part : parts) all.merge(part);
  return all;
}

NoiseEstimate estimate_noise(const SiftedSample& sample, const SourceParams& src,
                             const LinkParams& link, const DispersionParams& disp,
                             const EstimateOptions& opts) {
  if (sample.time.size() < kMinPairsPerBasis)
    throw InsufficientData("too few time-basis pairs to estimate noise", kMinPairsPerBasis,
                           sample.time.size());
  if (sample.dispersed.size() < kMinPairsPerBasis)
    throw InsufficientData("too few dispersed-basis pairs to estimate noise", kMinPairsPerBasis,
                           sample.dispersed.size());

  const Moments t = moments(sample.time, opts);
  const Moments w = moments(sample.dispersed, opts);
  if (t.n < kMinPairsPerBasis)
    throw InsufficientData("too few usable time-basis pairs after filtering", kMinPairsPerBasis, t.n);
  if (w.n < kMinPairsPerBasis)
    throw InsufficientData("too few usable dispersed-basis pairs after filtering", kMinPairsPerBasis,
                           w.n);

  const double jitter2 = 2.0 * link.sigma_jitter_ps * link.sigma_jitter_ps;
  const double cor2 = src.sigma_cor_ps * src.sigma_cor_ps;
  const double coh2 = src.sigma_coh_ps * src.sigma_coh_ps;

  NoiseEstimate e{.noise = {},
                  .xi_standard_error = 0.0,
                  .pairs_time = t.n,
                  .pairs_dispersed = w.n,
                  .var_difference_ps2 = t.var_diff - jitter2,
                  .empirical = CovMatrix4(Eigen::Matrix4d::Zero(), disp.beta2L())};
  e.noise.xi = e.var_difference_ps2 / cor2 - 1.0;
  e.noise.theta = 1.0 - (t.var_sum - jitter2) / (4.0 * coh2);
  e.noise.sigma_delta_ps = sigma_delta_from_xi(std::max(e.noise.xi, -1.0), src.sigma_cor_ps);
  e.xi_standard_error = t.var_diff * std::sqrt(2.0 / static_cast<double>(t.n - 1)) / cor2;

  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(TA, TA) = t.var_a;
  m(TB, TB) = t.var_b;
  m(TA, TB) = m(TB, TA) = t.cov;
  m(DA, DA) = w.var_a;
  m(DB, DB) = w.var_b;
  m(DA, DB) = m(DB, DA) = w.cov;
  e.empirical = e.empirical.with(m);
  return e;
}

}  // namespace doqkd
