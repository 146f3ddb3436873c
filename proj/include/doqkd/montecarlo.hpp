#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "doqkd/gaussian_model.hpp"
#include "doqkd/noise_channel.hpp"
#include "doqkd/parallel.hpp"
#include "doqkd/source_statistics.hpp"

namespace doqkd {

/**
 * splitmix64 stream keyed by (seed, frame index). Every frame draws from its
 * own stream, so outcomes do not depend on how frames are split across threads.
 */
class FrameRng {
 public:
  using result_type = std::uint64_t;

  FrameRng(std::uint64_t seed, std::uint64_t frame) noexcept
      : state_(mix(seed ^ mix(frame + 0x632BE59BD9B4E019ULL))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

enum class Basis : std::uint8_t { time, dispersed };
/// `multi`: more than one detection in the frame (photon plus dark count, or
/// several photons when pair counts are sampled).
enum class Click : std::uint8_t { none, photon, dark, multi };

std::string_view to_string(Basis b);
std::string_view to_string(Click c);

struct FrameOutcome {
  std::uint64_t frame_index = 0;
  Basis basis_a = Basis::time;
  Basis basis_b = Basis::time;
  Click click_a = Click::none;
  Click click_b = Click::none;
  double t_a_ps = std::numeric_limits<double>::quiet_NaN();  ///< set for photon/dark clicks
  double t_b_ps = std::numeric_limits<double>::quiet_NaN();
};

struct SimConfig {
  SourceParams src;
  DispersionParams disp;
  LinkParams link;
  EveNoise eve;
  std::uint64_t n_frames = 1'000'000;
  std::uint64_t seed = 7;
  double basis_bias = 0.5;  ///< probability of choosing the time basis
  /// When set, the number of photons sent to Bob per frame is drawn from this
  /// distribution instead of Bernoulli(p_nu).
  std::optional<PhotonNumberDist> photon_number;

  void validate() const;
};

/// One outcome per frame, in frame order.
std::vector<FrameOutcome> simulate(const SimConfig& cfg, Exec exec = Exec::parallel);

struct SiftedPairs {
  std::vector<double> t_a_ps;
  std::vector<double> t_b_ps;
  std::vector<std::uint8_t> both_photon;  ///< truth label per pair

  std::size_t size() const noexcept { return t_a_ps.size(); }
};

struct SiftedSample {
  SiftedPairs time;
  SiftedPairs dispersed;
  std::uint64_t frames = 0;
  std::uint64_t no_click = 0;
  std::uint64_t multi_click = 0;
  std::uint64_t basis_mismatch = 0;

  std::uint64_t retained() const noexcept { return time.size() + dispersed.size(); }
  /// Appends `later`, which must cover frames after this sample's.
  void merge(const SiftedSample& later);
};

/// Keeps frames where both parties registered exactly one click in the same basis.
SiftedSample sift(std::span<const FrameOutcome> outcomes, Exec exec = Exec::parallel);

struct EstimateOptions {
  /// Use only photon-photon pairs. When false, a window of `window_sigmas`
  /// robust standard deviations around the median of t_A - t_B is applied instead.
  bool use_labels = true;
  double window_sigmas = 3.0;
};

inline constexpr std::size_t kMinPairsPerBasis = 2;

struct NoiseEstimate {
  MeasuredNoise noise;
  double xi_standard_error = 0.0;
  std::size_t pairs_time = 0;
  std::size_t pairs_dispersed = 0;
  double var_difference_ps2 = 0.0;  ///< jitter-corrected sample Var[t_A - t_B]
  /// Same-basis entries only; entries linking the two bases are zero.
  CovMatrix4 empirical{Eigen::Matrix4d::Zero(), 1.0};
};

/// xi-hat = (Var[t_A - t_B] - 2 sigma_J^2) / sigma_cor^2 - 1 from time-basis pairs.
NoiseEstimate estimate_noise(const SiftedSample& sample, const SourceParams& src,
                             const LinkParams& link, const DispersionParams& disp,
                             const EstimateOptions& opts = {});

}  // namespace doqkd
