#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "pwap/archive.hpp"

using namespace pwap;
namespace fs = std::filesystem;

namespace {

struct Solved {
  MeanFieldModel model = fixtures::two_wells();
  GroundState gs;
  Eigen::MatrixXd f;
};

const Solved& solved() {
  static const Solved s = [] {
    Solved x;
    x.gs = scf(x.model, fixtures::basis(x.model, 6.0));
    x.f = forces(x.model, x.gs.orbitals);
    return x;
  }();
  return s;
}

}  // namespace

TEST_SUITE("archive") {
  TEST_CASE("encode/decode round trip") {
    const Solved& s = solved();
    const std::string bytes = encode_archive(s.model, s.gs, s.f);
    CHECK(bytes.substr(0, 5) == "PWAP1");
    const Archive a = decode_archive(bytes);
    CHECK(a.orbitals.phi == s.gs.orbitals.phi);
    CHECK(a.eigenvalues == s.gs.eigenvalues);
    CHECK(a.energy == s.gs.energy);
    CHECK(a.forces == s.f);
    CHECK(a.converged == s.gs.report.converged);
    CHECK(a.iterations == s.gs.report.iterations);
    CHECK(a.orbitals.basis->size() == s.gs.orbitals.basis->size());
    CHECK(encode_archive(s.model, s.gs, s.f) == bytes);
  }

  TEST_CASE("little-endian header") {
    const Solved& s = solved();
    const std::string bytes = encode_archive(s.model, s.gs, s.f);
    const auto u = [&](std::size_t i) { return static_cast<unsigned char>(bytes[i]); };
    CHECK(u(5) == 1);
    CHECK(u(6) == 0);
    CHECK(u(7) == 0);
    CHECK(u(8) == 0);
  }

  TEST_CASE("corrupted input is rejected") {
    const Solved& s = solved();
    std::string bytes = encode_archive(s.model, s.gs, s.f);
    CHECK_THROWS_AS(decode_archive(bytes.substr(0, bytes.size() - 3)), ArchiveError);
    CHECK_THROWS_AS(decode_archive(bytes + "x"), ArchiveError);
    std::string bad = bytes;
    bad[0] = 'Q';
    CHECK_THROWS_AS(decode_archive(bad), ArchiveError);
    CHECK_THROWS_AS(decode_archive(""), ArchiveError);
  }

  TEST_CASE("file round trip leaves no temporaries") {
    const Solved& s = solved();
    const fs::path dir = fs::temp_directory_path() / "pwap_archive_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    write_archive(dir / "a.pwap", s.model, s.gs, s.f);
    CHECK(read_archive(dir / "a.pwap").energy == s.gs.energy);
    CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}) == 1);
    CHECK_THROWS_AS(read_archive(dir / "missing.pwap"), ArchiveError);
    fs::remove_all(dir);
  }

  TEST_CASE("reference key is stable and sensitive") {
    const MeanFieldModel m = fixtures::two_wells();
    const ScfOptions o;
    const std::string k = reference_key(m, 128, 3, o);
    CHECK(k.size() == 16);
    CHECK(reference_key(m, 128, 3, o) == k);
    CHECK(reference_key(m, 64, 3, o) != k);
    CHECK(reference_key(m, 128, 4, o) != k);
    MeanFieldModel m2 = m;
    m2.atoms[0].depth = -2.0000001;
    CHECK(reference_key(m2, 128, 3, o) != k);
    ScfOptions o2 = o;
    o2.tolerance = 1e-11;
    CHECK(reference_key(m, 128, 3, o2) != k);
  }

  TEST_CASE("solve report is JSON with the solver status") {
    const Solved& s = solved();
    const std::string j = solve_report_json(s.model, s.gs, s.f);
    CHECK(j.find("\"converged\"") != std::string::npos);
    CHECK(j.find("\"energy\"") != std::string::npos);
  }
}
