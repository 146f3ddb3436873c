#include "doqkd/serialize.hpp"

#include <charconv>
#include <cmath>

#include "doqkd/error.hpp"

namespace doqkd {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw NumericalError("cannot format double");
  return {buf, ptr};
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string_view>& header)
    : out_(out), columns_(header.size()) {
  for (auto h : header) cell(h);
  end_row();
}

void CsvWriter::sep() {
  if (filled_ >= columns_) throw InvalidArgument("CSV row has more cells than the header");
  if (filled_++ > 0) out_ << ',';
}

CsvWriter& CsvWriter::cell(double x) {
  sep();
  out_ << format_double(x);
  return *this;
}

CsvWriter& CsvWriter::cell(long long x) {
  sep();
  out_ << x;
  return *this;
}

CsvWriter& CsvWriter::cell(std::string_view s) {
  sep();
  out_ << s;
  return *this;
}

CsvWriter& CsvWriter::blank() {
  sep();
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_) throw InvalidArgument("CSV row has fewer cells than the header");
  out_ << '\n';
  filled_ = 0;
}

nlohmann::json to_json(const CovMatrix4& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < 4; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < 4; ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return {{"basis", {"TA", "DA", "TB", "DB"}}, {"units", "ps2"}, {"m", rows}, {"beta2L_ps2", m.beta2L()}};
}

nlohmann::json to_json(const CapacityReport& r) {
  return {{"xi", r.xi},
          {"epsilon", r.noise.epsilon},
          {"eta", r.noise.eta},
          {"mutual_info_bits", r.mutual_info_bits},
          {"holevo_bits", r.holevo_bits},
          {"delta_i_bpc", r.delta_i_bpc},
          {"beta", r.beta},
          {"abort", r.abort}};
}

nlohmann::json to_json(const RateReport& r) {
  return {{"rate_bps", r.rate_bps},
          {"p_c", r.p_c},
          {"gamma_nu_hz", r.gamma_nu_hz},
          {"frame_rate_hz", r.frame_rate_hz},
          {"convention", std::string(to_string(r.convention))}};
}

nlohmann::json to_json(const PhotonNumberDist& d) {
  nlohmann::json m = nlohmann::json::array();
  for (std::size_t i = 0; i < d.pmf.size(); ++i) m.push_back(i);
  return {{"m", m}, {"pmf", d.pmf}, {"tail", d.tail}};
}

nlohmann::json to_json(const NoiseEstimate& e) {
  return {{"xi_hat", e.noise.xi},
          {"theta_hat", e.noise.theta},
          {"sigma_delta_ps", e.noise.sigma_delta_ps},
          {"xi_standard_error", e.xi_standard_error},
          {"var_difference_ps2", e.var_difference_ps2},
          {"pairs_time", e.pairs_time},
          {"pairs_dispersed", e.pairs_dispersed},
          {"empirical_gamma", to_json(e.empirical)}};
}

void write_outcomes_csv(std::ostream& out, const std::vector<FrameOutcome>& outcomes) {
  CsvWriter csv(out, {"frame_index", "basis_A", "basis_B", "click_A", "click_B", "t_A_ps", "t_B_ps"});
  auto time = [&](double t) -> CsvWriter& { return std::isnan(t) ? csv.blank() : csv.cell(t); };
  for (const auto& f : outcomes) {
    csv.cell(static_cast<long long>(f.frame_index))
        .cell(to_string(f.basis_a))
        .cell(to_string(f.basis_b))
        .cell(to_string(f.click_a))
        .cell(to_string(f.click_b));
    time(f.t_a_ps);
    time(f.t_b_ps);
    csv.end_row();
  }
}

}  // namespace doqkd
