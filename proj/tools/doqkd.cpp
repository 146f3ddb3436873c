#include <omp.h>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "doqkd/commands.hpp"
#include "doqkd/config.hpp"
#include "doqkd/error.hpp"
#include "doqkd/serialize.hpp"

namespace {

struct Options {
  std::string config_path;
  std::string out_path;
  std::string summary_path;
  std::string effective_config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> convention;
  std::optional<std::string> scaling;
  int threads = 0;
  bool serial = false;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "INI or JSON configuration file");
  cmd->add_option("--out", o.out_path, "Output file (default: stdout)");
  cmd->add_option("--seed", o.seed, "Override sim.seed");
  cmd->add_option("--convention", o.convention, "Rate convention: paper or strict")
      ->check(CLI::IsMember({"paper", "strict"}));
  cmd->add_option("--scaling", o.scaling, "Sweep scaling: fixed-coh or fixed-cor")
      ->check(CLI::IsMember({"fixed-coh", "fixed-cor"}));
  cmd->add_option("--effective-config", o.effective_config_path,
                  "Write the configuration actually used as JSON");
  cmd->add_option("--threads", o.threads, "OpenMP thread count (0: runtime default)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--serial", o.serial, "Use the serial reference kernels");
}

doqkd::RunConfig resolve(const Options& o) {
  doqkd::RunConfig cfg = o.config_path.empty() ? doqkd::RunConfig{} : doqkd::load_config(o.config_path);
  if (o.seed) cfg.sim.seed = *o.seed;
  if (o.convention) cfg.security.convention = doqkd::rate_convention_from_string(*o.convention);
  if (o.scaling) cfg.sweep.scaling = doqkd::scaling_from_string(*o.scaling);
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw doqkd::Error("cannot open '" + path + "' for writing");
  return f;
}

/// Runs `write` against --out when given, stdout otherwise.
template <class Write>
void emit(const std::string& path, Write&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  auto f = open_out(path);
  write(f);
  if (!f) throw doqkd::Error("failed writing '" + path + "'");
}

void write_json(std::ostream& out, const nlohmann::json& j) { out << j.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dispersive-optics time-energy QKD capacity toolkit"};
  app.require_subcommand(1);
  Options o;

  auto* capacity = app.add_subcommand("capacity", "Single-point secret-key capacity and rate (JSON)");
  auto* sweep_length = app.add_subcommand("sweep-length", "Capacity and rate versus channel length (CSV)");
  auto* sweep_noise = app.add_subcommand("sweep-noise", "Capacity versus sigma_delta (CSV)");
  auto* herald = app.add_subcommand("herald", "Photon-number statistics versus mu_f (CSV)");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo run with noise estimation and closure (JSON)");
  for (auto* cmd : {capacity, sweep_length, sweep_noise, herald, simulate}) add_common(cmd, o);
  simulate->add_option("--summary", o.summary_path, "Also write the summary JSON to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? doqkd::kExitOk : doqkd::kExitError;
  }

  try {
    if (o.threads > 0) omp_set_num_threads(o.threads);
    const auto exec = o.serial ? doqkd::Exec::serial : doqkd::Exec::parallel;
    const doqkd::RunConfig cfg = resolve(o);
    if (!o.effective_config_path.empty()) {
      auto f = open_out(o.effective_config_path);
      write_json(f, doqkd::to_json(cfg));
    }

    if (*capacity) {
      const auto r = doqkd::capacity_point(cfg, exec);
      const auto j = doqkd::to_json(r);
      write_json(std::cout, j);
      if (!o.out_path.empty()) emit(o.out_path, [&](std::ostream& out) { write_json(out, j); });
      return r.capacity.abort ? doqkd::kExitAbort : doqkd::kExitOk;
    }
    if (*sweep_length || *sweep_noise) {
      const auto rows = *sweep_length ? doqkd::sweep_length(cfg, exec) : doqkd::sweep_noise(cfg, exec);
      emit(o.out_path, [&](std::ostream& out) { doqkd::write_sweep_csv(out, rows, cfg.sweep.scaling); });
      return doqkd::kExitOk;
    }
    if (*herald) {
      const auto rows = doqkd::herald_table(cfg, exec);
      emit(o.out_path, [&](std::ostream& out) { doqkd::write_herald_csv(out, rows); });
      return doqkd::kExitOk;
    }
    if (*simulate) {
      const auto r = doqkd::run_simulation(cfg, exec);
      if (!o.out_path.empty())
        emit(o.out_path, [&](std::ostream& out) { doqkd::write_outcomes_csv(out, r.outcomes); });
      const auto j = doqkd::summary_json(r);
      write_json(std::cout, j);
      if (!o.summary_path.empty()) emit(o.summary_path, [&](std::ostream& out) { write_json(out, j); });
      return doqkd::kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return doqkd::kExitError;
  }
  return doqkd::kExitError;
}
