#include <string>

#include "doctest.h"
#include "pwap/config.hpp"

using namespace pwap;

namespace {

int error_line(const std::string& text, Command c) {
  try {
    parse_config(text, c);
  } catch (const ConfigError& e) {
    return e.line;
  }
  return -1;
}

const char* kStudy = R"(# comment
[model]
dimension = 1
lattice_constant = 10
alpha = 1 ; trailing comment
n_electrons = 2
atom = 0.30 -2 0.6
atom = 0.62 -2 0.6
cosine = 2 0.1

[study]
cutoffs = 4, 8 16
reference_cutoff = 64
seed = 5

[solver]
tolerance = 1e-9
mixing = 0.5
)";

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("full study config parses") {
    const RunConfig c = parse_config(kStudy, Command::study);
    CHECK(c.model.lattice.dim() == 1);
    CHECK(c.model.lattice.volume() == doctest::Approx(10.0));
    CHECK(c.model.alpha == 1.0);
    CHECK(c.model.n_electrons == 2);
    REQUIRE(c.model.atoms.size() == 2);
    CHECK(c.model.atoms[1].position[0] == 0.62);
    CHECK(c.model.atoms[1].depth == -2.0);
    REQUIRE(c.model.cosines.size() == 1);
    CHECK(c.model.cosines[0].g == Miller{2, 0, 0});
    CHECK(c.cutoffs == std::vector<double>{4, 8, 16});
    CHECK(c.reference_cutoff == 64.0);
    CHECK(c.scf.seed == 5);
    CHECK(c.estimator.seed == 5);
    CHECK(c.scf.tolerance == 1e-9);
    CHECK(c.scf.mixing == 0.5);
  }

  TEST_CASE("errors carry the offending line") {
    CHECK(error_line("[model]\ndimension = 1\nbogus = 3\n", Command::solve) == 3);
    CHECK(error_line("[model]\n[nope]\n", Command::solve) == 2);
    CHECK(error_line("[model]\ndimension = 1\nalpha = 1\nalpha = 2\n", Command::solve) == 4);
    CHECK(error_line("[model]\ndimension 1\n", Command::solve) == 2);
    CHECK(error_line("[model]\ndimension = 1\nalpha = one\nlattice_constant = 5\n", Command::solve) == 3);
    CHECK(error_line("dimension = 1\n", Command::solve) == 1);
    CHECK(error_line("[model]\ndimension = 1\natom = 0.5 -1\nlattice_constant = 5\n", Command::solve) == 3);
  }

  TEST_CASE("command-specific requirements") {
    const std::string base = "[model]\ndimension = 1\nlattice_constant = 5\nn_electrons = 1\n";
    CHECK_THROWS_AS(parse_config(base, Command::solve), ConfigError);
    CHECK_NOTHROW(parse_config(base + "[basis]\necut = 4\n", Command::solve));
    CHECK_THROWS_AS(parse_config(base + "[study]\ncutoffs = 4, 8\nreference_cutoff = 8\n", Command::study),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(base + "[study]\ncutoffs = 8, 4\nreference_cutoff = 32\n", Command::study),
                    ConfigError);
  }

  TEST_CASE("gp-check rejects other dimensions at parse time") {
    CHECK(error_line("[model]\n\ndimension = 2\n[gp]\namplitude = 0.3\n", Command::gp_check) == 3);
    const RunConfig c = parse_config("[model]\ndimension = 1\n[gp]\namplitude = 0.1\ncutoffs = 4, 8\n",
                                     Command::gp_check);
    CHECK(c.gp.amplitude == 0.1);
    CHECK(c.gp.cutoffs == std::vector<double>{4, 8});
    CHECK(c.model.kinetic_scale == 1.0);
  }

  TEST_CASE("missing file is a config error") {
    CHECK_THROWS_AS(load_config("/nonexistent/pwap.ini", Command::solve), ConfigError);
  }
}
