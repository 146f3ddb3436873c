#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "doqkd/gaussian_model.hpp"
#include "doqkd/noise_channel.hpp"
#include "doqkd/security_bounds.hpp"

namespace doqkd {

/// How per-d source scales are derived in sweeps.
///   fixed_coh: sigma_coh from [source], sigma_cor = sigma_coh / d
///   fixed_cor: sigma_cor from [source], sigma_coh = d * sigma_cor
enum class Scaling { fixed_coh, fixed_cor };

std::string_view to_string(Scaling s);
Scaling scaling_from_string(std::string_view s);

/// Which form the [noise] section was given in. Exactly one form is allowed.
enum class NoiseInput { sigma_delta, xi, eps_eta };

struct NoiseSection {
  NoiseInput input = NoiseInput::sigma_delta;
  double sigma_delta_ps = 10.0;
  double xi = 0.0;
  double epsilon = 0.0;
  double eta = 0.0;

  /// xi implied by this section for a source with the given scales.
  double xi_for(const SourceParams& src) const;
  /// Noise pair to inject in simulation. xi-style inputs map to (xi / (d^2 + 1/4), 0).
  EveNoise injected(const SourceParams& src) const;

  friend bool operator==(const NoiseSection&, const NoiseSection&) = default;
};

struct SecuritySection {
  double beta = 0.9;
  std::size_t grid_size = kDefaultRegionGrid;
  RateConvention convention = RateConvention::paper;
  double sifting = 0.5;

  friend bool operator==(const SecuritySection&, const SecuritySection&) = default;
};

/// Inclusive, evenly spaced axis.
struct AxisSpec {
  double start = 0.0;
  double stop = 1.0;
  std::size_t points = 2;

  std::vector<double> values() const;
  friend bool operator==(const AxisSpec&, const AxisSpec&) = default;
};

struct HeraldSection {
  double eta_d = 0.93;
  double switch_loss_db = 1.0;
  double multiphoton_bound = 0.01;
  std::optional<double> bin_fraction;
  AxisSpec mu_f{0.0, 3.0, 61};

  double eta_s() const;
  friend bool operator==(const HeraldSection&, const HeraldSection&) = default;
};

struct SweepSection {
  std::vector<int> d_list{64, 32, 16, 8};
  /// p_nu per entry of d_list. Empty: use each d's heralded operating point.
  std::vector<double> pair_prob_list{0.607, 0.411, 0.231, 0.119};
  Scaling scaling = Scaling::fixed_coh;
  AxisSpec length_km{0.0, 300.0, 61};
  AxisSpec sigma_delta_ps{0.0, 40.0, 41};

  friend bool operator==(const SweepSection&, const SweepSection&) = default;
};

struct SimSection {
  std::uint64_t n_frames = 1'000'000;
  std::uint64_t seed = 7;
  double basis_bias = 0.5;
  bool use_labels = true;
  /// Draw photons-per-frame from the heralded distribution of the [source] d.
  bool sample_pair_counts = false;

  friend bool operator==(const SimSection&, const SimSection&) = default;
};

struct RunConfig {
  SourceParams source;
  DispersionParams dispersion;
  LinkParams link;
  NoiseSection noise;
  SecuritySection security;
  HeraldSection herald;
  SweepSection sweep;
  SimSection sim;

  /// Throws ConfigError naming "section.key".
  void validate() const;
  Scenario scenario() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Line of every "section.key" seen while parsing, for diagnostics.
using FieldLines = std::map<std::string, std::size_t>;

/// INI text: [section] headers, key = value lines, '#' or ';' comments,
/// lists as comma-separated values.
RunConfig parse_ini(std::string_view text, FieldLines* lines = nullptr);
/// JSON object of section objects with the same keys as the INI form.
RunConfig parse_json(std::string_view text);
/// Picks JSON when the first non-blank character is '{', INI otherwise.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Effective configuration. parse_json(to_json(c).dump()) == c.
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace doqkd
