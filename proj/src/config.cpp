#include "doqkd/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "doqkd/error.hpp"

namespace doqkd {

namespace {

struct Entry {
  std::string value;
  std::size_t line = 0;
};

/// "section.key" -> raw value text.
using Flat = std::map<std::string, Entry>;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <class T>
T parse_number(std::string_view text) {
  text = trim(text);
  T out{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (ec != std::errc() || ptr != end || text.empty())
    throw InvalidArgument("'" + std::string(text) + "' is not a valid number");
  return out;
}

bool parse_bool(std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw InvalidArgument("'" + std::string(text) + "' is not a boolean");
}

template <class T>
std::vector<T> parse_list(std::string_view text) {
  std::vector<T> out;
  text = trim(text);
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(parse_number<T>(text.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void fail(const FieldLines* lines, const std::string& field, const std::string& msg) {
  std::size_t line = 0;
  if (lines) {
    if (auto it = lines->find(field); it != lines->end()) line = it->second;
  }
  throw ConfigError(field, line, msg);
}

void check(bool ok, const FieldLines* lines, const std::string& field, const std::string& msg) {
  if (!ok) fail(lines, field, msg);
}

/// Runs a struct validator whose messages start with the offending key and
/// rethrows with the section-qualified field name.
template <class Fn>
void check_section(const std::string& section, const FieldLines* lines, Fn&& validate) {
  try {
    validate();
  } catch (const InvalidArgument& e) {
    const std::string msg = e.what();
    const auto space = msg.find(' ');
    const std::string key = msg.substr(0, space);
    const std::string rest = space == std::string::npos ? msg : msg.substr(space + 1);
    fail(lines, section + "." + key, rest);
  }
}

void check_axis(const AxisSpec& a, const std::string& section, const FieldLines* lines) {
  check(std::isfinite(a.start), lines, section + ".start", "must be finite");
  check(std::isfinite(a.stop) && a.stop > a.start, lines, section + ".stop", "must be greater than start");
  check(a.points >= 2, lines, section + ".points", "must be >= 2");
}

void validate_with(const RunConfig& c, const FieldLines* lines) {
  check_section("source", lines, [&] { c.source.validate(); });
  check(std::isfinite(c.dispersion.beta2_ps2_per_km) && c.dispersion.beta2_ps2_per_km != 0.0, lines,
        "dispersion.beta2_ps2_per_km", "must be nonzero");
  check(std::isfinite(c.dispersion.length_km) && c.dispersion.length_km > 0.0, lines,
        "dispersion.length_km", "must be > 0");
  check_section("link", lines, [&] { c.link.validate(); });

  switch (c.noise.input) {
    case NoiseInput::sigma_delta:
      check(std::isfinite(c.noise.sigma_delta_ps) && c.noise.sigma_delta_ps >= 0.0, lines,
            "noise.sigma_delta_ps", "must be >= 0");
      break;
    case NoiseInput::xi:
      check(std::isfinite(c.noise.xi) && c.noise.xi >= 0.0, lines, "noise.xi", "must be >= 0");
      break;
    case NoiseInput::eps_eta:
      check_section("noise", lines, [&] { EveNoise{c.noise.epsilon, c.noise.eta}.validate(); });
      break;
  }

  check(c.security.beta >= 0.0 && c.security.beta <= 1.0, lines, "security.beta", "must lie in [0, 1]");
  check(c.security.grid_size >= 2, lines, "security.grid_size", "must be >= 2");
  check(c.security.sifting >= 0.0 && c.security.sifting <= 1.0, lines, "security.sifting",
        "must lie in [0, 1]");

  const auto& h = c.herald;
  check(h.eta_d > 0.0 && h.eta_d <= 1.0, lines, "herald.eta_d", "must lie in (0, 1]");
  check(std::isfinite(h.switch_loss_db) && h.switch_loss_db >= 0.0, lines, "herald.switch_loss_db",
        "must be >= 0");
  check(h.multiphoton_bound > 0.0 && h.multiphoton_bound < 1.0, lines, "herald.multiphoton_bound",
        "must lie in (0, 1)");
  if (h.bin_fraction)
    check(*h.bin_fraction > 0.0 && *h.bin_fraction <= 1.0, lines, "herald.bin_fraction",
          "must lie in (0, 1]");
  check_axis(h.mu_f, "herald.mu_f", lines);
  check(h.mu_f.start >= 0.0, lines, "herald.mu_f.start", "must be >= 0");

  const auto& s = c.sweep;
  check(!s.d_list.empty(), lines, "sweep.d_list", "must not be empty");
  for (int d : s.d_list) check(d >= 2, lines, "sweep.d_list", "entries must be >= 2");
  check(s.pair_prob_list.empty() || s.pair_prob_list.size() == s.d_list.size(), lines,
        "sweep.pair_prob_list", "must be empty or match d_list in length");
  for (double p : s.pair_prob_list)
    check(p >= 0.0 && p <= 1.0, lines, "sweep.pair_prob_list", "entries must lie in [0, 1]");
  check_axis(s.length_km, "sweep_length", lines);
  check(s.length_km.start >= 0.0, lines, "sweep_length.start", "must be >= 0");
  check_axis(s.sigma_delta_ps, "sweep_noise", lines);
  check(s.sigma_delta_ps.start >= 0.0, lines, "sweep_noise.start", "must be >= 0");

  check(c.sim.n_frames >= 1, lines, "sim.n_frames", "must be >= 1");
  check(c.sim.basis_bias >= 0.0 && c.sim.basis_bias <= 1.0, lines, "sim.basis_bias",
        "must lie in [0, 1]");
}

using Setter = std::function<void(RunConfig&, std::string_view)>;

template <class T>
Setter number(T RunConfig::*section_ptr, double T::*field) {
  return [=](RunConfig& c, std::string_view v) { (c.*section_ptr).*field = parse_number<double>(v); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"source.sigma_coh_ps", number(&RunConfig::source, &SourceParams::sigma_coh_ps)},
      {"source.sigma_cor_ps", number(&RunConfig::source, &SourceParams::sigma_cor_ps)},
      {"source.pair_prob", number(&RunConfig::source, &SourceParams::pair_prob)},
      {"source.pump_wavelength_nm", number(&RunConfig::source, &SourceParams::pump_wavelength_nm)},
      {"dispersion.beta2_ps2_per_km", number(&RunConfig::dispersion, &DispersionParams::beta2_ps2_per_km)},
      {"dispersion.length_km", number(&RunConfig::dispersion, &DispersionParams::length_km)},
      {"link.alpha_db_per_km", number(&RunConfig::link, &LinkParams::alpha_db_per_km)},
      {"link.length_km", number(&RunConfig::link, &LinkParams::length_km)},
      {"link.eta_det_a", number(&RunConfig::link, &LinkParams::eta_det_a)},
      {"link.eta_det_b", number(&RunConfig::link, &LinkParams::eta_det_b)},
      {"link.sigma_jitter_ps", number(&RunConfig::link, &LinkParams::sigma_jitter_ps)},
      {"link.dark_rate_hz", number(&RunConfig::link, &LinkParams::dark_rate_hz)},
      {"noise.sigma_delta_ps", number(&RunConfig::noise, &NoiseSection::sigma_delta_ps)},
      {"noise.xi", number(&RunConfig::noise, &NoiseSection::xi)},
      {"noise.epsilon", number(&RunConfig::noise, &NoiseSection::epsilon)},
      {"noise.eta", number(&RunConfig::noise, &NoiseSection::eta)},
      {"security.beta", number(&RunConfig::security, &SecuritySection::beta)},
      {"security.grid_size",
       [](RunConfig& c, std::string_view v) { c.security.grid_size = parse_number<std::size_t>(v); }},
      {"security.convention",
       [](RunConfig& c, std::string_view v) { c.security.convention = rate_convention_from_string(trim(v)); }},
      {"security.sifting", number(&RunConfig::security, &SecuritySection::sifting)},
      {"herald.eta_d", number(&RunConfig::herald, &HeraldSection::eta_d)},
      {"herald.switch_loss_db", number(&RunConfig::herald, &HeraldSection::switch_loss_db)},
      {"herald.multiphoton_bound", number(&RunConfig::herald, &HeraldSection::multiphoton_bound)},
      {"herald.bin_fraction",
       [](RunConfig& c, std::string_view v) { c.herald.bin_fraction = parse_number<double>(v); }},
      {"herald.mu_f_start", [](RunConfig& c, std::string_view v) { c.herald.mu_f.start = parse_number<double>(v); }},
      {"herald.mu_f_stop", [](RunConfig& c, std::string_view v) { c.herald.mu_f.stop = parse_number<double>(v); }},
      {"herald.mu_f_points",
       [](RunConfig& c, std::string_view v) { c.herald.mu_f.points = parse_number<std::size_t>(v); }},
      {"sweep.d_list", [](RunConfig& c, std::string_view v) { c.sweep.d_list = parse_list<int>(v); }},
      {"sweep.pair_prob_list",
       [](RunConfig& c, std::string_view v) { c.sweep.pair_prob_list = parse_list<double>(v); }},
      {"sweep.scaling", [](RunConfig& c, std::string_view v) { c.sweep.scaling = scaling_from_string(trim(v)); }},
      {"sweep_length.start", [](RunConfig& c, std::string_view v) { c.sweep.length_km.start = parse_number<double>(v); }},
      {"sweep_length.stop", [](RunConfig& c, std::string_view v) { c.sweep.length_km.stop = parse_number<double>(v); }},
      {"sweep_length.points",
       [](RunConfig& c, std::string_view v) { c.sweep.length_km.points = parse_number<std::size_t>(v); }},
      {"sweep_noise.start",
       [](RunConfig& c, std::string_view v) { c.sweep.sigma_delta_ps.start = parse_number<double>(v); }},
      {"sweep_noise.stop",
       [](RunConfig& c, std::string_view v) { c.sweep.sigma_delta_ps.stop = parse_number<double>(v); }},
      {"sweep_noise.points",
       [](RunConfig& c, std::string_view v) { c.sweep.sigma_delta_ps.points = parse_number<std::size_t>(v); }},
      {"sim.n_frames", [](RunConfig& c, std::string_view v) { c.sim.n_frames = parse_number<std::uint64_t>(v); }},
      {"sim.seed", [](RunConfig& c, std::string_view v) { c.sim.seed = parse_number<std::uint64_t>(v); }},
      {"sim.basis_bias", [](RunConfig& c, std::string_view v) { c.sim.basis_bias = parse_number<double>(v); }},
      {"sim.use_labels", [](RunConfig& c, std::string_view v) { c.sim.use_labels = parse_bool(v); }},
      {"sim.sample_pair_counts",
       [](RunConfig& c, std::string_view v) { c.sim.sample_pair_counts = parse_bool(v); }},
  };
  return table;
}

RunConfig build_config(const Flat& flat, FieldLines* lines_out) {
  FieldLines lines;
  for (const auto& [field, entry] : flat) lines[field] = entry.line;

  RunConfig c;
  const auto& table = setters();
  for (const auto& [field, entry] : flat) {
    auto it = table.find(field);
    if (it == table.end()) throw ConfigError(field, entry.line, "unknown key");
    try {
      it->second(c, entry.value);
    } catch (const InvalidArgument& e) {
      throw ConfigError(field, entry.line, e.what());
    }
  }

  const bool has_sd = flat.count("noise.sigma_delta_ps") > 0;
  const bool has_xi = flat.count("noise.xi") > 0;
  const bool has_eps = flat.count("noise.epsilon") > 0;
  const bool has_eta = flat.count("noise.eta") > 0;
  const int forms = int(has_sd) + int(has_xi) + int(has_eps || has_eta);
  if (forms > 1 || has_eps != has_eta) {
    std::size_t line = 0;
    for (const char* k : {"noise.sigma_delta_ps", "noise.xi", "noise.epsilon", "noise.eta"})
      if (auto it = flat.find(k); it != flat.end()) line = std::max(line, it->second.line);
    throw ConfigError("noise", line, "give exactly one of sigma_delta_ps, xi, or epsilon together with eta");
  }
  if (has_xi) c.noise.input = NoiseInput::xi;
  if (has_eps) c.noise.input = NoiseInput::eps_eta;

  validate_with(c, &lines);
  if (lines_out) *lines_out = std::move(lines);
  return c;
}

std::string json_scalar(const nlohmann::json& v, const std::string& field) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw ConfigError(field, 0, "expected a number, string or boolean");
}

}  // namespace

std::string_view to_string(Scaling s) { return s == Scaling::fixed_coh ? "fixed-coh" : "fixed-cor"; }

Scaling scaling_from_string(std::string_view s) {
  if (s == "fixed-coh") return Scaling::fixed_coh;
  if (s == "fixed-cor") return Scaling::fixed_cor;
  throw InvalidArgument("scaling must be 'fixed-coh' or 'fixed-cor', got '" + std::string(s) + "'");
}

double NoiseSection::xi_for(const SourceParams& src) const {
  switch (input) {
    case NoiseInput::sigma_delta: return xi_from_sigma_delta(sigma_delta_ps, src.sigma_cor_ps);
    case NoiseInput::xi: return xi;
    case NoiseInput::eps_eta: return xi_from_eps_eta({epsilon, eta}, schmidt_dimension(src));
  }
  return xi;
}

EveNoise NoiseSection::injected(const SourceParams& src) const {
  if (input == NoiseInput::eps_eta) return {epsilon, eta};
  const double d = schmidt_dimension(src);
  return {xi_for(src) / (d * d + 0.25), 0.0};
}

std::vector<double> AxisSpec::values() const {
  std::vector<double> out(points);
  for (std::size_t i = 0; i < points; ++i)
    out[i] = i + 1 == points ? stop : start + (stop - start) * static_cast<double>(i) / static_cast<double>(points - 1);
  return out;
}

double HeraldSection::eta_s() const { return std::pow(10.0, -switch_loss_db / 10.0); }

void RunConfig::validate() const { validate_with(*this, nullptr); }

Scenario RunConfig::scenario() const {
  return {source, dispersion, link, security.beta, security.grid_size};
}

RunConfig parse_ini(std::string_view text, FieldLines* lines) {
  Flat flat;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find_first_of("#;"); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("", line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) throw ConfigError("", line_no, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("", line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError("", line_no, "missing key before '='");
    if (section.empty()) throw ConfigError(key, line_no, "key outside of any [section]");
    const std::string field = section + "." + key;
    if (flat.count(field)) throw ConfigError(field, line_no, "duplicate key");
    flat[field] = {std::string(trim(line.substr(eq + 1))), line_no};
  }
  return build_config(flat, lines);
}

RunConfig parse_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min(e.byte, text.size()); ++i) line += text[i] == '\n';
    throw ConfigError("", line, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", 0, "top-level JSON value must be an object");

  Flat flat;
  for (const auto& [section, body] : doc.items()) {
    if (!body.is_object()) throw ConfigError(section, 0, "section must be an object");
    for (const auto& [key, value] : body.items()) {
      const std::string field = section + "." + key;
      if (value.is_array()) {
        std::string joined;
        for (const auto& item : value) {
          if (!joined.empty()) joined += ",";
          joined += json_scalar(item, field);
        }
        flat[field] = {joined, 0};
      } else {
        flat[field] = {json_scalar(value, field), 0};
      }
    }
  }
  return build_config(flat, nullptr);
}

RunConfig parse_config(std::string_view text) {
  const auto body = trim(text);
  if (!body.empty() && body.front() == '{') return parse_json(text);
  return parse_ini(text);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", 0, "cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

nlohmann::json to_json(const RunConfig& c) {
  using nlohmann::json;
  json noise = json::object();
  switch (c.noise.input) {
    case NoiseInput::sigma_delta: noise["sigma_delta_ps"] = c.noise.sigma_delta_ps; break;
    case NoiseInput::xi: noise["xi"] = c.noise.xi; break;
    case NoiseInput::eps_eta:
      noise["epsilon"] = c.noise.epsilon;
      noise["eta"] = c.noise.eta;
      break;
  }
  json herald = {{"eta_d", c.herald.eta_d},
                 {"switch_loss_db", c.herald.switch_loss_db},
                 {"multiphoton_bound", c.herald.multiphoton_bound},
                 {"mu_f_start", c.herald.mu_f.start},
                 {"mu_f_stop", c.herald.mu_f.stop},
                 {"mu_f_points", c.herald.mu_f.points}};
  if (c.herald.bin_fraction) herald["bin_fraction"] = *c.herald.bin_fraction;

  return {
      {"source",
       {{"sigma_coh_ps", c.source.sigma_coh_ps},
        {"sigma_cor_ps", c.source.sigma_cor_ps},
        {"pair_prob", c.source.pair_prob},
        {"pump_wavelength_nm", c.source.pump_wavelength_nm}}},
      {"dispersion",
       {{"beta2_ps2_per_km", c.dispersion.beta2_ps2_per_km}, {"length_km", c.dispersion.length_km}}},
      {"link",
       {{"alpha_db_per_km", c.link.alpha_db_per_km},
        {"length_km", c.link.length_km},
        {"eta_det_a", c.link.eta_det_a},
        {"eta_det_b", c.link.eta_det_b},
        {"sigma_jitter_ps", c.link.sigma_jitter_ps},
        {"dark_rate_hz", c.link.dark_rate_hz}}},
      {"noise", noise},
      {"security",
       {{"beta", c.security.beta},
        {"grid_size", c.security.grid_size},
        {"convention", std::string(to_string(c.security.convention))},
        {"sifting", c.security.sifting}}},
      {"herald", herald},
      {"sweep",
       {{"d_list", c.sweep.d_list},
        {"pair_prob_list", c.sweep.pair_prob_list},
        {"scaling", std::string(to_string(c.sweep.scaling))}}},
      {"sweep_length",
       {{"start", c.sweep.length_km.start}, {"stop", c.sweep.length_km.stop}, {"points", c.sweep.length_km.points}}},
      {"sweep_noise",
       {{"start", c.sweep.sigma_delta_ps.start},
        {"stop", c.sweep.sigma_delta_ps.stop},
        {"points", c.sweep.sigma_delta_ps.points}}},
      {"sim",
       {{"n_frames", c.sim.n_frames},
        {"seed", c.sim.seed},
        {"basis_bias", c.sim.basis_bias},
        {"use_labels", c.sim.use_labels},
        {"sample_pair_counts", c.sim.sample_pair_counts}}},
  };
}

}  // namespace doqkd
