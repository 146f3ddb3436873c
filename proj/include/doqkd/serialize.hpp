#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "doqkd/gaussian_model.hpp"
#include "doqkd/montecarlo.hpp"
#include "doqkd/security_bounds.hpp"
#include "doqkd/source_statistics.hpp"

namespace doqkd {

/// Shortest text that parses back to the same double; "nan"/"inf" otherwise.
std::string format_double(double x);

/// Writes a header row on construction and one comma-separated row per call.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string_view>& header);

  CsvWriter& cell(double x);
  CsvWriter& cell(long long x);
  CsvWriter& cell(std::string_view s);
  /// Empty cell.
  CsvWriter& blank();
  void end_row();

 private:
  void sep();

  std::ostream& out_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

/// {"basis": [...], "units": "ps2", "m": [[...]], "beta2L_ps2": ...}
nlohmann::json to_json(const CovMatrix4& m);
nlohmann::json to_json(const CapacityReport& r);
nlohmann::json to_json(const RateReport& r);
/// {"m": [0, 1, ...], "pmf": [...], "tail": ...}
nlohmann::json to_json(const PhotonNumberDist& d);
nlohmann::json to_json(const NoiseEstimate& e);

/// Outcome stream columns: frame_index, basis_A, basis_B, click_A, click_B, t_A_ps, t_B_ps.
void write_outcomes_csv(std::ostream& out, const std::vector<FrameOutcome>& outcomes);

}  // namespace doqkd
