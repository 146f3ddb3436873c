#include "doqkd/source_statistics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "doqkd/error.hpp"

namespace doqkd {

namespace {

constexpr double kSeriesTail = 1e-16;
constexpr double kDistTail = 1e-12;
constexpr long kMaxTerms = 1'000'000;

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument(msg);
}

double log_be_pmf(double mu, long m, int g) {
  const double x = mu / g;
  return std::lgamma(static_cast<double>(m + g)) - std::lgamma(static_cast<double>(m) + 1.0) -
         std::lgamma(static_cast<double>(g)) + static_cast<double>(m) * std::log(x) -
         static_cast<double>(m + g) * std::log1p(x);
}

/// p(k+1)/p(k) for the negative binomial. Nonincreasing in k for g >= 1, so
/// p(k) * r / (1 - r) bounds everything past k once r < 1.
double be_ratio(double mu, long k, int g) {
  const double x = mu / g;
  return static_cast<double>(k + g) / static_cast<double>(k + 1) * x / (1.0 + x);
}

double binomial_pmf(long k, long m, double p) {
  if (m < 0 || m > k) return 0.0;
  if (p <= 0.0) return m == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return m == k ? 1.0 : 0.0;
  const double kd = static_cast<double>(k);
  const double md = static_cast<double>(m);
  return std::exp(std::lgamma(kd + 1.0) - std::lgamma(md + 1.0) - std::lgamma(kd - md + 1.0) +
                  md * std::log(p) + (kd - md) * std::log1p(-p));
}

/// Visits k = 1, 2, ... with q(k) = p(mu_b, k, g) / (1 - p(mu_b, 0, g)) until
/// the remaining mass of q is below `tail`.
template <class Visit>
void for_each_nonvacuum_bin(double mu_b, int g, double tail, Visit&& visit) {
  const double nonvacuum = -std::expm1(-static_cast<double>(g) * std::log1p(mu_b / g));
  double bound = 1.0;
  for (long k = 1; k <= kMaxTerms; ++k) {
    const double q = std::exp(log_be_pmf(mu_b, k, g)) / nonvacuum;
    visit(k, q);
    const double r = be_ratio(mu_b, k, g);
    if (r < 1.0) {
      bound = q * r / (1.0 - r);
      if (bound < tail) return;
    }
  }
  throw ConvergenceError("heralded bin series did not converge", bound);
}

}  // namespace

void HeraldParams::validate() const {
  require(std::isfinite(mu_f) && mu_f >= 0.0, "mu_f must be >= 0");
  require(d >= 2, "d must be >= 2");
  require(eta_d >= 0.0 && eta_d <= 1.0, "eta_d must lie in [0, 1]");
  require(eta_s >= 0.0 && eta_s <= 1.0, "eta_s must lie in [0, 1]");
  require(multiphoton_bound > 0.0 && multiphoton_bound < 1.0, "multiphoton_bound must lie in (0, 1)");
  if (bin_fraction) require(*bin_fraction > 0.0, "bin_fraction must be > 0");
}

double HeraldParams::bin_mean() const {
  return mu_f * bin_fraction.value_or(1.0 / static_cast<double>(d));
}

double bose_einstein_pmf(double mu, long m, int g) {
  require(mu >= 0.0, "mu must be >= 0");
  require(g >= 1, "g must be >= 1");
  require(m >= 0, "m must be >= 0");
  if (mu == 0.0) return m == 0 ? 1.0 : 0.0;
  return std::exp(log_be_pmf(mu, m, g));
}

double herald_failure_prob(const HeraldParams& hp) {
  hp.validate();
  if (hp.mu_f == 0.0 || hp.eta_d == 0.0) return 1.0;
  const double miss = 1.0 - hp.eta_d;
  double sum = std::exp(log_be_pmf(hp.mu_f, 0, hp.d));
  if (miss == 0.0) return sum;
  double bound = 1.0;
  for (long k = 1; k <= kMaxTerms; ++k) {
    const double term = std::exp(log_be_pmf(hp.mu_f, k, hp.d) + static_cast<double>(k) * std::log(miss));
    sum += term;
    const double r = be_ratio(hp.mu_f, k, hp.d) * miss;
    if (r < 1.0) {
      bound = term * r / (1.0 - r);
      if (bound < kSeriesTail * sum) return sum;
    }
  }
  throw ConvergenceError("herald failure series did not converge", bound);
}

PhotonNumberDist heralded_output_dist(const HeraldParams& hp, int m_max) {
  hp.validate();
  require(m_max >= 2, "m_max must be >= 2");
  PhotonNumberDist out;
  out.pmf.assign(static_cast<std::size_t>(m_max) + 1, 0.0);

  const double p_fail = herald_failure_prob(hp);
  const double mu_b = hp.bin_mean();
  out.pmf[0] = p_fail;
  if (p_fail >= 1.0 || mu_b == 0.0) {
    out.pmf[0] = 1.0;
    return out;
  }

  const double heralded = 1.0 - p_fail;
  for_each_nonvacuum_bin(mu_b, hp.d, kDistTail, [&](long k, double q) {
    for (long m = 0; m <= k; ++m) {
      const double w = heralded * q * binomial_pmf(k, m, hp.eta_s);
      if (m <= m_max)
        out.pmf[static_cast<std::size_t>(m)] += w;
      else
        out.tail += w;
    }
  });
  return out;
}

PhotonStats heralded_stats(const HeraldParams& hp) {
  hp.validate();
  const double p_fail = herald_failure_prob(hp);
  const double mu_b = hp.bin_mean();
  PhotonStats s;
  if (p_fail >= 1.0 || mu_b == 0.0) {
    s.p_zero = 1.0;
    return s;
  }
  const double heralded = 1.0 - p_fail;
  double one = 0.0, multi = 0.0, nonvacuum = 0.0;
  const double block = 1.0 - hp.eta_s;
  for_each_nonvacuum_bin(mu_b, hp.d, kDistTail, [&](long k, double q) {
    const double none = std::pow(block, static_cast<double>(k));
    const double single = binomial_pmf(k, 1, hp.eta_s);
    one += q * single;
    nonvacuum += q * (1.0 - none);
    if (k >= 2) multi += q * std::max(0.0, 1.0 - none - single);
  });
  s.p_one = heralded * one;
  s.p_zero = p_fail + heralded * (1.0 - nonvacuum);
  s.p_multi_given_nonvacuum = nonvacuum > 0.0 ? multi / nonvacuum : 0.0;
  return s;
}

PhotonStats unheralded_stats(double mu_f, int g) {
  require(mu_f >= 0.0, "mu_f must be >= 0");
  require(g >= 1, "g must be >= 1");
  PhotonStats s;
  if (mu_f == 0.0) {
    s.p_zero = 1.0;
    return s;
  }
  const double log_p0 = -static_cast<double>(g) * std::log1p(mu_f / g);
  const double nonvacuum = -std::expm1(log_p0);
  s.p_zero = std::exp(log_p0);
  s.p_one = bose_einstein_pmf(mu_f, 1, g);
  s.p_multi_given_nonvacuum = std::max(0.0, nonvacuum - s.p_one) / nonvacuum;
  return s;
}

OperatingPoint operating_point(int d, double eta_d, double eta_s, double bound,
                               std::optional<double> bin_fraction) {
  require(bound > 0.0 && bound < 1.0, "multiphoton bound must lie in (0, 1)");
  HeraldParams hp;
  hp.d = d;
  hp.eta_d = eta_d;
  hp.eta_s = eta_s;
  hp.multiphoton_bound = bound;
  hp.bin_fraction = bin_fraction;
  auto ratio = [&](double mu) {
    hp.mu_f = mu;
    return heralded_stats(hp).p_multi_given_nonvacuum;
  };

  double lo = 0.0;
  double hi = 1.0;
  while (ratio(hi) <= bound) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw InvalidArgument("multiphoton bound unattainable: ratio stays below it");
  }
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    (ratio(mid) <= bound ? lo : hi) = mid;
  }
  hp.mu_f = lo;
  const PhotonStats s = heralded_stats(hp);
  return {lo, s.p_one, s.p_multi_given_nonvacuum};
}

}  // namespace doqkd
