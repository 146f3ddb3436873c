#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

/// Scratch directory removed at scope exit.
struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("doqkd_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  fs::path operator/(const std::string& name) const { return dir / name; }
  fs::path write(const std::string& name, const std::string& text) const {
    const auto p = dir / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

Run run(const std::string& args, const Scratch& s) {
  const auto out = s / "stdout.txt";
  const auto err = s / "stderr.txt";
  const std::string cmd = std::string("'") + DOQKD_CLI_PATH + "' " + args + " >'" + out.string() + "' 2>'" +
                          err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

}  // namespace

TEST_CASE("capacity with defaults") {
  Scratch s;
  const auto r = run("capacity --config '" + std::string(DOQKD_DEFAULT_CONFIG) + "'", s);
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["capacity"]["delta_i_bpc"].get<double>() > 4.0);
  CHECK_FALSE(j["capacity"]["abort"].get<bool>());
}

TEST_CASE("capacity exits 2 when the key cannot be distilled") {
  Scratch s;
  const auto cfg = s.write("noisy.ini", "[noise]\nxi = 100\n");
  const auto r = run("capacity --config '" + cfg.string() + "' --out '" + (s / "cap.json").string() + "'", s);
  CHECK(r.code == 2);
  const auto j = nlohmann::json::parse(slurp(s / "cap.json"));
  CHECK(j["capacity"]["abort"].get<bool>());
  CHECK(j["capacity"]["delta_i_bpc"].get<double>() <= 0.0);
}

TEST_CASE("invalid configuration is reported with field and line") {
  Scratch s;
  const auto cfg = s.write("bad.ini", "[source]\nsigma_coh_ps = 1920\nsigma_cor_ps = -30\n");
  const auto r = run("capacity --config '" + cfg.string() + "'", s);
  CHECK(r.code == 1);
  CHECK(r.err.find("source.sigma_cor_ps") != std::string::npos);
  CHECK(r.err.find("line 3") != std::string::npos);
  CHECK(r.out.empty());
}

TEST_CASE("degenerate sweep axis is rejected") {
  Scratch s;
  const auto cfg = s.write("axis.ini", "[sweep_length]\npoints = 1\n");
  const auto r = run("sweep-length --config '" + cfg.string() + "'", s);
  CHECK(r.code == 1);
  CHECK(r.err.find("sweep_length.points") != std::string::npos);
}

TEST_CASE("usage errors exit 1") {
  Scratch s;
  CHECK(run("frobnicate", s).code == 1);
  CHECK(run("", s).code == 1);
  CHECK(run("capacity --convention loose", s).code == 1);
  CHECK(run("capacity --config /nonexistent/doqkd.ini", s).code == 1);
}

TEST_CASE("simulate rejects runs with too few sifted pairs") {
  Scratch s;
  const auto cfg = s.write("tiny.ini", "[sim]\nn_frames = 3\n");
  const auto r = run("simulate --config '" + cfg.string() + "'", s);
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error: ", 0) == 0);
}

TEST_CASE("simulate is reproducible byte for byte") {
  Scratch s;
  const auto cfg = s.write("sim.ini", "[sim]\nn_frames = 20000\n");
  const std::string base = "simulate --config '" + cfg.string() + "' --seed 11";
  const auto a = run(base + " --out '" + (s / "a.csv").string() + "' --summary '" + (s / "a.json").string() + "'", s);
  const auto b = run(base + " --out '" + (s / "b.csv").string() + "' --summary '" + (s / "b.json").string() + "'", s);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(slurp(s / "a.csv") == slurp(s / "b.csv"));
  CHECK(slurp(s / "a.json") == slurp(s / "b.json"));
  CHECK(a.out == slurp(s / "a.json"));
  const auto other = run("simulate --config '" + cfg.string() + "' --seed 12 --out '" + (s / "c.csv").string() + "'", s);
  REQUIRE(other.code == 0);
  CHECK(slurp(s / "a.csv") != slurp(s / "c.csv"));
  CHECK(slurp(s / "a.csv").rfind("frame_index,basis_A,basis_B,click_A,click_B,t_A_ps,t_B_ps\n", 0) == 0);
}

TEST_CASE("effective configuration round trips through the CLI") {
  Scratch s;
  const auto cfg = s.write("in.ini", "[link]\nlength_km = 42.5\n[noise]\nepsilon = 1e-5\neta = 2e-5\n");
  const auto first = run("capacity --config '" + cfg.string() + "' --seed 99 --convention strict --scaling fixed-cor" +
                             " --effective-config '" + (s / "eff1.json").string() + "'",
                         s);
  REQUIRE(first.code == 0);
  const auto second =
      run("capacity --config '" + (s / "eff1.json").string() + "' --effective-config '" + (s / "eff2.json").string() + "'", s);
  REQUIRE(second.code == 0);
  CHECK(slurp(s / "eff1.json") == slurp(s / "eff2.json"));
  CHECK(first.out == second.out);
  const auto eff = nlohmann::json::parse(slurp(s / "eff1.json"));
  CHECK(eff["sim"]["seed"].get<std::uint64_t>() == 99);
  CHECK(eff["security"]["convention"] == "strict");
  CHECK(eff["sweep"]["scaling"] == "fixed-cor");
}

TEST_CASE("rate convention flag changes the rate") {
  Scratch s;
  const auto paper = nlohmann::json::parse(run("capacity --convention paper", s).out);
  const auto strict = nlohmann::json::parse(run("capacity --convention strict", s).out);
  CHECK(paper["capacity"]["delta_i_bpc"] == strict["capacity"]["delta_i_bpc"]);
  CHECK(paper["rate"]["rate_bps"].get<double>() != strict["rate"]["rate_bps"].get<double>());
}

TEST_CASE("sweep and herald CSV output") {
  Scratch s;
  const auto cfg = s.write("sweep.ini",
                           "[sweep_length]\nstart = 0\nstop = 100\npoints = 3\n"
                           "[sweep_noise]\nstart = 0\nstop = 20\npoints = 3\n"
                           "[herald]\nmu_f_start = 0\nmu_f_stop = 2\nmu_f_points = 3\n"
                           "[security]\ngrid_size = 40\n");
  for (const std::string cmd : {"sweep-length", "sweep-noise"}) {
    const auto r = run(cmd + " --config '" + cfg.string() + "'", s);
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("d,scaling,sigma_coh_ps,", 0) == 0);
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 4 * 3);
  }
  const auto h = run("herald --config '" + cfg.string() + "' --out '" + (s / "h.csv").string() + "'", s);
  REQUIRE(h.code == 0);
  CHECK(h.out.empty());
  CHECK(slurp(s / "h.csv").rfind("d,kind,mu_f,p_zero,p_one,p_multi_given_nonvacuum\n", 0) == 0);
}

TEST_CASE("serial and parallel kernels give identical output") {
  Scratch s;
  const auto cfg = s.write("par.ini", "[sweep_noise]\npoints = 5\n[security]\ngrid_size = 40\n");
  const auto a = run("sweep-noise --serial --config '" + cfg.string() + "'", s);
  const auto b = run("sweep-noise --threads 3 --config '" + cfg.string() + "'", s);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
}
