#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "doctest.h"
#include "pwap/archive.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pwap_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.ini";
  std::ofstream(p) << text;
  return p;
}

Run run_cli(const std::string& args, const fs::path& dir, const std::string& env = "") {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = env + " \"" PWAP_CLI "\" " + args + " > \"" + (dir / "stdout.txt").string() +
                          "\" 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

const char* kFree =
    "[model]\ndimension = 1\nlattice_constant = 6.283185307179586\nn_electrons = 3\n[basis]\necut = 8\n";

const char* kStudy =
    "[model]\ndimension = 1\nlattice_constant = 10\nalpha = 1\nn_electrons = 2\n"
    "atom = 0.30 -2 0.6\natom = 0.62 -2 0.6\n"
    "[study]\ncutoffs = 4, 8\nreference_cutoff = 24\n[solver]\ntolerance = 1e-10\n";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("solve writes an archive with the free-electron energy") {
    const fs::path d = scratch("solve");
    const Run r = run_cli("solve --config " + write_config(d, kFree).string() + " --out " + (d / "out").string(), d);
    REQUIRE(r.code == 0);
    const pwap::Archive a = pwap::read_archive(d / "out" / "ground_state.pwap");
    CHECK(a.energy == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(a.converged);
    CHECK(fs::exists(d / "out" / "solve_report.json"));
  }

  TEST_CASE("config errors exit 2 with a line number and write nothing") {
    const fs::path d = scratch("badcfg");
    const fs::path out = d / "out";
    const Run r = run_cli("solve --config " + write_config(d, "[model]\ndimension = 1\nfoo = 2\n").string() +
                           " --out " + out.string(),
                       d);
    CHECK(r.code == 2);
    CHECK(r.err.find("line 3") != std::string::npos);
    CHECK_FALSE(fs::exists(out));
    CHECK(run_cli("solve --config " + (d / "missing.ini").string(), d).code == 2);
    CHECK(run_cli("frobnicate", d).code == 2);
    CHECK(run_cli("solve", d).code == 2);
  }

  TEST_CASE("gp-check rejects dimension 2 and warns on a single cutoff") {
    const fs::path d = scratch("gp");
    Run r = run_cli("gp-check --config " + write_config(d, "[model]\ndimension = 2\n").string() + " --out " +
                     (d / "out").string(),
                 d);
    CHECK(r.code == 2);
    CHECK(r.err.find("line 2") != std::string::npos);
    r = run_cli("gp-check --config " +
                 write_config(d, "[model]\ndimension = 1\n[gp]\namplitude = 0.3\ncutoffs = 4\n").string() +
                 " --out " + (d / "out").string(),
             d);
    CHECK(r.code == 0);
    CHECK(r.err.find("warning") != std::string::npos);
    const std::string csv = slurp(d / "out" / "prop_a1.csv");
    CHECK(csv.rfind("# pwap-csv v1\n", 0) == 0);
  }

  TEST_CASE("solver failure exits 1 without an archive") {
    const fs::path d = scratch("fail");
    const std::string text = "[model]\ndimension = 1\nlattice_constant = 10\nalpha = 1\nn_electrons = 2\n"
                             "atom = 0.30 -2 0.6\n[basis]\necut = 8\n"
                             "[solver]\nmax_iterations = 2\ntolerance = 1e-14\n";
    const Run r = run_cli("solve --config " + write_config(d, text).string() + " --out " + (d / "out").string(), d);
    CHECK(r.code == 1);
    CHECK_FALSE(fs::exists(d / "out" / "ground_state.pwap"));
    CHECK(fs::exists(d / "out" / "solve_report.json"));
  }

  TEST_CASE("study reuses the cached reference and reruns bit-identically") {
    const fs::path d = scratch("study");
    const fs::path cfg = write_config(d, kStudy);
    const fs::path out = d / "out";
    REQUIRE(run_cli("study --config " + cfg.string() + " --out " + out.string() + " --threads 1", d).code == 0);
    fs::path cached;
    for (const auto& e : fs::directory_iterator(out / "cache")) cached = e.path();
    REQUIRE(cached.extension() == ".pwap");
    const auto mtime = fs::last_write_time(cached);
    std::map<std::string, std::string> first;
    for (const char* f : {"convergence.csv", "estimators.csv", "bounds.csv", "forces.csv"}) {
      first[f] = slurp(out / f);
      CHECK(first[f].rfind("# pwap-csv v1\n", 0) == 0);
    }
    REQUIRE(run_cli("study --config " + cfg.string() + " --out " + out.string(), d, "PWAP_THREADS=3").code == 0);
    CHECK(fs::last_write_time(cached) == mtime);
    for (const auto& [f, text] : first) CHECK(slurp(out / f) == text);
  }
}
