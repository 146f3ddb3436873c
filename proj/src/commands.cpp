#include "doqkd/commands.hpp"

#include <cmath>
#include <limits>

#include "doqkd/error.hpp"
#include "doqkd/noise_channel.hpp"
#include "doqkd/serialize.hpp"

namespace doqkd {

namespace {

constexpr int kSimulatedMaxPhotons = 8;

RateOptions rate_options(const RunConfig& cfg) {
  return {cfg.security.convention, cfg.security.sifting};
}

Scenario scenario_for(const RunConfig& cfg, const SourceParams& src) {
  Scenario sc = cfg.scenario();
  sc.src = src;
  return sc;
}

/// Evaluates body(d_index, point_index) over the flattened grid and returns
/// rows in grid order.
template <class Body>
std::vector<SweepRow> run_grid(const RunConfig& cfg, std::size_t points, Exec exec, Body&& body) {
  const std::size_t n_d = cfg.sweep.d_list.size();
  std::vector<SourceParams> sources(n_d);
  for (std::size_t i = 0; i < n_d; ++i) sources[i] = source_for_d(cfg, i);

  std::vector<SweepRow> rows(n_d * points);
  parallel_for(rows.size(), exec, [&](std::size_t task) {
    const std::size_t di = task / points;
    SweepRow& row = rows[task];
    row.d = cfg.sweep.d_list[di];
    row.src = sources[di];
    body(row, task % points);
  });
  return rows;
}

}  // namespace

SourceParams source_for_d(const RunConfig& cfg, std::size_t index) {
  if (index >= cfg.sweep.d_list.size()) throw InvalidArgument("d index out of range");
  const int d = cfg.sweep.d_list[index];
  SourceParams src = cfg.source;
  if (cfg.sweep.scaling == Scaling::fixed_coh) {
    src.sigma_cor_ps = src.sigma_coh_ps / d;
  } else {
    src.sigma_coh_ps = src.sigma_cor_ps * d;
  }
  if (!cfg.sweep.pair_prob_list.empty()) {
    src.pair_prob = cfg.sweep.pair_prob_list[index];
  } else {
    const auto& h = cfg.herald;
    src.pair_prob = operating_point(d, h.eta_d, h.eta_s(), h.multiphoton_bound, h.bin_fraction).p_one;
  }
  return src;
}

CapacityResult capacity_point(const RunConfig& cfg, Exec exec) {
  cfg.validate();
  const Scenario sc = cfg.scenario();
  CapacityResult r;
  if (cfg.noise.input == NoiseInput::eps_eta) {
    r.capacity = capacity_at({cfg.noise.epsilon, cfg.noise.eta}, sc);
  } else {
    r.capacity = worst_case_capacity(cfg.noise.xi_for(cfg.source), sc, exec);
  }
  r.rate = key_rate(r.capacity, cfg.source, cfg.link, rate_options(cfg));
  return r;
}

nlohmann::json to_json(const CapacityResult& r) {
  return {{"capacity", to_json(r.capacity)}, {"rate", to_json(r.rate)}};
}

std::vector<SweepRow> sweep_length(const RunConfig& cfg, Exec exec) {
  cfg.validate();
  const auto lengths = cfg.sweep.length_km.values();
  const bool by_sigma = cfg.noise.input == NoiseInput::sigma_delta;
  return run_grid(cfg, lengths.size(), exec, [&](SweepRow& row, std::size_t p) {
    Scenario sc = scenario_for(cfg, row.src);
    sc.link.length_km = lengths[p];
    row.length_km = lengths[p];
    row.sigma_delta_ps = by_sigma ? cfg.noise.sigma_delta_ps : std::numeric_limits<double>::quiet_NaN();
    row.capacity = cfg.noise.input == NoiseInput::eps_eta
                       ? capacity_at({cfg.noise.epsilon, cfg.noise.eta}, sc)
                       : worst_case_capacity(cfg.noise.xi_for(row.src), sc, Exec::serial);
    row.rate = key_rate(row.capacity, row.src, sc.link, rate_options(cfg));
  });
}

std::vector<SweepRow> sweep_noise(const RunConfig& cfg, Exec exec) {
  cfg.validate();
  const auto offsets = cfg.sweep.sigma_delta_ps.values();
  return run_grid(cfg, offsets.size(), exec, [&](SweepRow& row, std::size_t p) {
    const Scenario sc = scenario_for(cfg, row.src);
    row.length_km = sc.link.length_km;
    row.sigma_delta_ps = offsets[p];
    row.capacity = worst_case_capacity(xi_from_sigma_delta(offsets[p], row.src.sigma_cor_ps), sc, Exec::serial);
    row.rate = key_rate(row.capacity, row.src, sc.link, rate_options(cfg));
  });
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, Scaling scaling) {
  CsvWriter csv(out, {"d", "scaling", "sigma_coh_ps", "sigma_cor_ps", "pair_prob", "length_km",
                      "sigma_delta_ps", "xi", "epsilon", "eta", "mutual_info_bits", "holevo_bits",
                      "delta_i_bpc", "abort", "rate_bps", "p_c", "gamma_nu_hz", "convention"});
  for (const auto& r : rows) {
    csv.cell(static_cast<long long>(r.d))
        .cell(to_string(scaling))
        .cell(r.src.sigma_coh_ps)
        .cell(r.src.sigma_cor_ps)
        .cell(r.src.pair_prob)
        .cell(r.length_km);
    (std::isnan(r.sigma_delta_ps) ? csv.blank() : csv.cell(r.sigma_delta_ps))
        .cell(r.capacity.xi)
        .cell(r.capacity.noise.epsilon)
        .cell(r.capacity.noise.eta)
        .cell(r.capacity.mutual_info_bits)
        .cell(r.capacity.holevo_bits)
        .cell(r.capacity.delta_i_bpc)
        .cell(static_cast<long long>(r.capacity.abort))
        .cell(r.rate.rate_bps)
        .cell(r.rate.p_c)
        .cell(r.rate.gamma_nu_hz)
        .cell(to_string(r.rate.convention))
        .end_row();
  }
}

std::vector<HeraldRow> herald_table(const RunConfig& cfg, Exec exec) {
  cfg.validate();
  const auto& h = cfg.herald;
  const auto grid = h.mu_f.values();
  const std::size_t per_d = 2 * grid.size() + 1;
  std::vector<HeraldRow> rows(cfg.sweep.d_list.size() * per_d);

  parallel_for(rows.size(), exec, [&](std::size_t task) {
    const int d = cfg.sweep.d_list[task / per_d];
    const std::size_t slot = task % per_d;
    HeraldRow& row = rows[task];
    row.d = d;
    if (slot == per_d - 1) {
      const auto op = operating_point(d, h.eta_d, h.eta_s(), h.multiphoton_bound, h.bin_fraction);
      HeraldParams hp{op.mu_f, d, h.eta_d, h.eta_s(), h.multiphoton_bound, h.bin_fraction};
      row.kind = "operating_point";
      row.mu_f = op.mu_f;
      row.stats = heralded_stats(hp);
      return;
    }
    row.mu_f = grid[slot / 2];
    if (slot % 2 == 0) {
      row.kind = "heralded";
      row.stats = heralded_stats({row.mu_f, d, h.eta_d, h.eta_s(), h.multiphoton_bound, h.bin_fraction});
    } else {
      row.kind = "g-BE";
      row.stats = unheralded_stats(row.mu_f, d);
    }
  });
  return rows;
}

void write_herald_csv(std::ostream& out, const std::vector<HeraldRow>& rows) {
  CsvWriter csv(out, {"d", "kind", "mu_f", "p_zero", "p_one", "p_multi_given_nonvacuum"});
  for (const auto& r : rows) {
    csv.cell(static_cast<long long>(r.d))
        .cell(r.kind)
        .cell(r.mu_f)
        .cell(r.stats.p_zero)
        .cell(r.stats.p_one)
        .cell(r.stats.p_multi_given_nonvacuum)
        .end_row();
  }
}

ClosureBand closure_band(double xi_hat, double xi_se, const Scenario& sc, double sigmas, Exec exec) {
  if (!(xi_se >= 0.0)) throw InvalidArgument("standard error must be >= 0");
  ClosureBand b;
  b.lower_bpc = worst_case_capacity(std::max(0.0, xi_hat + sigmas * xi_se), sc, exec).delta_i_bpc;
  b.upper_bpc = worst_case_capacity(std::max(0.0, xi_hat - sigmas * xi_se), sc, exec).delta_i_bpc;
  return b;
}

SimulationResult run_simulation(const RunConfig& cfg, Exec exec) {
  cfg.validate();
  SimulationResult r;
  SimConfig& sim = r.sim;
  sim.src = cfg.source;
  sim.disp = cfg.dispersion;
  sim.link = cfg.link;
  sim.eve = cfg.noise.injected(cfg.source);
  sim.n_frames = cfg.sim.n_frames;
  sim.seed = cfg.sim.seed;
  sim.basis_bias = cfg.sim.basis_bias;
  if (cfg.sim.sample_pair_counts) {
    const auto& h = cfg.herald;
    const int d = static_cast<int>(std::lround(schmidt_dimension(cfg.source)));
    const auto op = operating_point(d, h.eta_d, h.eta_s(), h.multiphoton_bound, h.bin_fraction);
    sim.photon_number = heralded_output_dist(
        {op.mu_f, d, h.eta_d, h.eta_s(), h.multiphoton_bound, h.bin_fraction}, kSimulatedMaxPhotons);
  }

  r.outcomes = simulate(sim, exec);
  r.sample = sift(r.outcomes, exec);
  r.estimate = estimate_noise(r.sample, sim.src, sim.link, sim.disp, {cfg.sim.use_labels});

  const Scenario sc = cfg.scenario();
  r.xi_injected = xi_from_eps_eta(sim.eve, schmidt_dimension(sim.src));
  r.delta_i_hat_bpc = worst_case_capacity(std::max(0.0, r.estimate.noise.xi), sc, exec).delta_i_bpc;
  r.delta_i_analytic_bpc = worst_case_capacity(r.xi_injected, sc, exec).delta_i_bpc;
  r.delta_i_injected_pair_bpc = capacity_at(sim.eve, sc).delta_i_bpc;
  r.band = closure_band(r.estimate.noise.xi, r.estimate.xi_standard_error, sc, kClosureSigmas, exec);
  r.closure = r.band.contains(r.delta_i_analytic_bpc);
  return r;
}

nlohmann::json summary_json(const SimulationResult& r) {
  const auto& s = r.sample;
  const CovMatrix4 gamma_p = apply_eve_noise(build_noiseless_cov(r.sim.src, r.sim.disp), r.sim.eve);
  return {
      {"n_frames", r.sim.n_frames},
      {"seed", r.sim.seed},
      {"injected", {{"epsilon", r.sim.eve.epsilon}, {"eta", r.sim.eve.eta}, {"xi", r.xi_injected}}},
      {"sift",
       {{"frames", s.frames},
        {"retained", s.retained()},
        {"time_pairs", s.time.size()},
        {"dispersed_pairs", s.dispersed.size()},
        {"no_click", s.no_click},
        {"multi_click", s.multi_click},
        {"basis_mismatch", s.basis_mismatch}}},
      {"estimate", to_json(r.estimate)},
      {"analytic_gamma_prime", to_json(gamma_p)},
      {"delta_i_hat_bpc", r.delta_i_hat_bpc},
      {"delta_i_analytic_bpc", r.delta_i_analytic_bpc},
      {"delta_i_injected_pair_bpc", r.delta_i_injected_pair_bpc},
      {"band", {{"sigmas", kClosureSigmas}, {"lower_bpc", r.band.lower_bpc}, {"upper_bpc", r.band.upper_bpc}}},
      {"closure", r.closure},
  };
}

}  // namespace doqkd
