#pragma once

#include <ostream>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "doqkd/config.hpp"
#include "doqkd/montecarlo.hpp"
#include "doqkd/parallel.hpp"
#include "doqkd/security_bounds.hpp"
#include "doqkd/source_statistics.hpp"

namespace doqkd {

/// Process exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitAbort = 2;

/// Source scales and p_nu for entry `index` of sweep.d_list under sweep.scaling.
SourceParams source_for_d(const RunConfig& cfg, std::size_t index);

struct CapacityResult {
  CapacityReport capacity;
  RateReport rate;
};

/// Single point. xi-style noise runs the worst case over the noise region;
/// an explicit (epsilon, eta) pair is evaluated as given.
CapacityResult capacity_point(const RunConfig& cfg, Exec exec = Exec::parallel);
nlohmann::json to_json(const CapacityResult& r);

struct SweepRow {
  int d = 0;
  SourceParams src;
  double length_km = 0.0;
  double sigma_delta_ps = 0.0;  ///< NaN when the noise was not given as sigma_delta
  CapacityReport capacity;
  RateReport rate;
};

/// Rows ordered by d_list entry, then by axis point.
std::vector<SweepRow> sweep_length(const RunConfig& cfg, Exec exec = Exec::parallel);
std::vector<SweepRow> sweep_noise(const RunConfig& cfg, Exec exec = Exec::parallel);

/// d, scaling, sigma_coh_ps, sigma_cor_ps, pair_prob, length_km, sigma_delta_ps, xi,
/// epsilon, eta, mutual_info_bits, holevo_bits, delta_i_bpc, abort, rate_bps, p_c,
/// gamma_nu_hz, convention
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, Scaling scaling);

struct HeraldRow {
  int d = 0;
  std::string_view kind;  ///< "heralded", "g-BE" or "operating_point"
  double mu_f = 0.0;
  PhotonStats stats;
};

/// Per d: the mu_f grid for both cases, then the operating point row.
std::vector<HeraldRow> herald_table(const RunConfig& cfg, Exec exec = Exec::parallel);

/// d, kind, mu_f, p_zero, p_one, p_multi_given_nonvacuum
void write_herald_csv(std::ostream& out, const std::vector<HeraldRow>& rows);

struct ClosureBand {
  double lower_bpc = 0.0;  ///< worst-case dI at xi_hat + k SE
  double upper_bpc = 0.0;  ///< worst-case dI at max(0, xi_hat - k SE)
  bool contains(double v) const { return v >= lower_bpc && v <= upper_bpc; }
};

inline constexpr double kClosureSigmas = 5.0;

ClosureBand closure_band(double xi_hat, double xi_se, const Scenario& sc,
                         double sigmas = kClosureSigmas, Exec exec = Exec::parallel);

struct SimulationResult {
  SimConfig sim;
  std::vector<FrameOutcome> outcomes;
  SiftedSample sample;
  NoiseEstimate estimate;
  double xi_injected = 0.0;
  double delta_i_hat_bpc = 0.0;       ///< worst case at max(0, xi_hat)
  double delta_i_analytic_bpc = 0.0;  ///< worst case at xi_injected
  double delta_i_injected_pair_bpc = 0.0;  ///< dI at the injected (epsilon, eta) itself
  ClosureBand band;
  bool closure = false;
};

/// Simulates with the [source], [link], [noise] and [sim] sections and closes
/// the loop through the worst-case capacity.
SimulationResult run_simulation(const RunConfig& cfg, Exec exec = Exec::parallel);
nlohmann::json summary_json(const SimulationResult& r);

}  // namespace doqkd
