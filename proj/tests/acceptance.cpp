// One PASS/FAIL line per acceptance criterion; nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracle_checks.hpp"
#include "pwap/config.hpp"
#include "pwap/estimators.hpp"
#include "pwap/gp_appendix.hpp"
#include "pwap/parallel.hpp"
#include "pwap/study.hpp"

using namespace pwap;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, double limit_s, const std::function<Outcome()>& f) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = f();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0 && secs > limit_s) {
    o.pass = false;
    o.detail += " [over time limit]";
  }
  if (!o.pass) ++failures;
  std::printf("%s %d %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", id, name, secs, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

RunConfig study_config() {
  RunConfig c;
  c.model = fixtures::two_wells();
  c.cutoffs = {4, 8, 16, 32};
  c.reference_cutoff = 128;
  c.scf = fixtures::tight();
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Cutoffs at or above this count as the asymptotic regime.
constexpr double kAsymptotic = 8.0;

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "pwap_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  report(1, "dense-oracle equivalence", 10, [] {
    const oracle::Discrepancies d = oracle::check_against_dense();
    return Outcome{d.worst() < 1e-9 && d.basis_size <= 12,
                   fmt("N_b %zu, residual %.2e, omega %.2e, K %.2e, metric %.2e, solve %.2e", d.basis_size,
                       d.residual, d.omega, d.k, d.metric, d.solve)};
  });

  report(2, "Hellmann-Feynman forces vs finite differences", 30, [] {
    const MeanFieldModel m = fixtures::two_wells();
    const auto b = fixtures::basis(m, 32.0);
    const GroundState gs = scf(m, b, fixtures::tight());
    if (!gs.report.converged) return Outcome{false, "SCF did not converge"};
    const Eigen::MatrixXd f = forces(m, gs.orbitals);
    const double h = 1e-4;
    const double a = m.lattice.volume();
    double worst = 0.0;
    for (std::size_t j = 0; j < m.atoms.size(); ++j) {
      double e[2];
      for (int s = 0; s < 2; ++s) {
        MeanFieldModel shifted = m;
        shifted.atoms[j].position[0] += (s == 0 ? h : -h) / a;
        const GroundState g = scf(shifted, b, fixtures::tight());
        if (!g.report.converged) return Outcome{false, "shifted SCF did not converge"};
        e[s] = g.energy;
      }
      const double fd = -(e[0] - e[1]) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - f(0, static_cast<Eigen::Index>(j))) / f.cwiseAbs().maxCoeff());
    }
    return Outcome{worst < 1e-5, fmt("max relative deviation %.2e (|F| %.3e)", worst, f.cwiseAbs().maxCoeff())};
  });

  const fs::path cache = work / "cache";
  StudyResult study;
  double study_seconds = 0.0;
  {
    const auto t0 = std::chrono::steady_clock::now();
    study = run_study(study_config(), cache);
    write_study_outputs(study, work / "run1");
    study_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  std::printf("study: %zu cutoffs, reference %zu plane waves, %.1f s\n", study.rows.size(),
              study.reference.orbitals.basis->size(), study_seconds);

  auto rows_ok = [&]() -> std::string {
    for (const auto& r : study.rows)
      if (r.status != "ok") return fmt("Ecut %g: %s %s", r.ecut, r.status.c_str(), r.message.c_str());
    return {};
  };

  report(3, "Newton refinement in the linear regime", 0, [&] {
    if (auto e = rows_ok(); !e.empty()) return Outcome{false, e};
    if (study_seconds > 120) return Outcome{false, fmt("study took %.0f s", study_seconds)};
    bool ok = true;
    std::string d;
    for (const auto& r : study.rows) {
      if (r.ecut < kAsymptotic) continue;
      const double re = std::abs(r.energy_error_newton) / std::abs(r.energy_error);
      const double rr = r.density_error_newton / r.report.density_error;
      const double rf = r.force_error_newton / r.force_error;
      ok = ok && re <= 1e-2 && rr <= 1e-2 && rf <= 1e-2;
      d += fmt("Ecut %g: E %.1e rho %.1e F %.1e; ", r.ecut, re, rr, rf);
    }
    return Outcome{ok, d + "(Newton/variational error ratios)"};
  });

  report(4, "residual orthogonal to the coarse space", 0, [&] {
    if (auto e = rows_ok(); !e.empty()) return Outcome{false, e};
    double worst = 0.0;
    for (const auto& r : study.rows) worst = std::max(worst, r.report.low_frequency_residual);
    return Outcome{worst < 1e-9, fmt("max ||Pi_1 R|| = %.2e", worst)};
  });

  report(5, "plain vs metric bound sharpness", 0, [&] {
    if (auto e = rows_ok(); !e.empty()) return Outcome{false, e};
    bool increasing = true;
    double lo = INFINITY, hi = 0.0, prev = 0.0;
    std::string d;
    for (const auto& r : study.rows) {
      const double rp = r.bounds.bound_plain / r.bounds.error_norm;
      const double rm = r.bounds.bound_metric / r.bounds.metric_error_norm;
      increasing = increasing && rp > prev;
      prev = rp;
      lo = std::min(lo, rm);
      hi = std::max(hi, rm);
      d += fmt("%g: %.2f/%.2f; ", r.ecut, rp, rm);
    }
    const auto& last = study.rows.back();
    const double heuristic = last.bounds.metric_residual_norm / last.bounds.metric_error_norm;
    const bool ok = increasing && hi / lo <= 50.0 && heuristic > 0.5 && heuristic < 2.0;
    return Outcome{ok, d + fmt("metric spread %.2f, heuristic ratio %.3f", hi / lo, heuristic)};
  });

  report(6, "Schur force estimates", 0, [&] {
    if (auto e = rows_ok(); !e.empty()) return Outcome{false, e};
    bool ok = true;
    std::string d;
    const std::size_t n = study.rows.size();
    for (std::size_t k = n - 2; k < n; ++k) {
      const ErrorReport& rep = study.rows[k].report;
      const Eigen::MatrixXd df = rep.forces - rep.forces_reference;
      int checked = 0, won = 0;
      for (Eigen::Index i = 0; i < df.size(); ++i) {
        if (std::abs(df.data()[i]) <= 1e-10) continue;
        ++checked;
        if (std::abs(rep.dforce_schur.data()[i] - df.data()[i]) < std::abs(rep.dforce_residual.data()[i] - df.data()[i]))
          ++won;
      }
      ok = ok && won == checked;
      d += fmt("Ecut %g: Schur closer on %d/%d; ", study.rows[k].ecut, won, checked);
    }
    for (const auto& r : study.rows) {
      if (r.ecut < kAsymptotic) continue;
      ok = ok && r.force_post_error_schur < r.force_error;
      d += fmt("Ecut %g: post %.1e vs raw %.1e; ", r.ecut, r.force_post_error_schur, r.force_error);
    }
    return Outcome{ok, d};
  });

  report(7, "GP operator-norm decay", 120, [] {
    const GpVerification v = verify_proposition(0.3, {4, 8, 16, 32, 64});
    bool decreasing = true;
    std::string d;
    for (std::size_t i = 0; i < v.points.size(); ++i) {
      if (i > 0) decreasing = decreasing && v.points[i].norm < v.points[i - 1].norm;
      d += fmt("%g: %.3e; ", v.points[i].n, v.points[i].norm);
    }
    const bool ok = decreasing && v.fitted && v.slope >= 0.8 && v.slope <= 1.5;
    return Outcome{ok, d + fmt("slope %.3f (want [0.8, 1.5])", v.slope)};
  });

  report(8, "gauge invariance of the error report", 0, [] {
    const MeanFieldModel m = fixtures::two_wells();
    const auto fine = fixtures::basis(m, 32.0);
    const GroundState ref = scf(m, fine, fixtures::tight());
    const GroundState coarse = scf(m, fixtures::basis(m, 8.0), fixtures::tight());
    const FrequencySplit split(fine, 8.0);
    EstimatorOptions eo;
    eo.solve_tolerance = 1e-13;
    const ErrorReport base = qoi_error_estimates(m, split, coarse.orbitals, &ref.orbitals, eo);

    auto scalars = [](const ErrorReport& r) {
      std::vector<double> v{r.energy,
                            r.energy_reference,
                            r.energy_estimate.exact,
                            r.energy_estimate.residual,
                            r.energy_estimate.schur,
                            r.density_error,
                            r.density_estimate.exact,
                            r.density_estimate.residual,
                            r.density_estimate.schur,
                            r.density_post_error.exact,
                            r.density_post_error.residual,
                            r.density_post_error.schur,
                            r.residual_norm,
                            r.metric_residual_norm,
                            r.error_norm,
                            r.metric_error_norm,
                            r.schur_norm,
                            r.low_frequency_residual};
      for (const Eigen::MatrixXd* mat :
           {&r.forces, &r.forces_reference, &r.dforce_exact, &r.dforce_residual, &r.dforce_schur})
        v.insert(v.end(), mat->data(), mat->data() + mat->size());
      return v;
    };
    const std::vector<double> want = scalars(base);
    std::vector<double> worst(100, 0.0);
    parallel_for(100, [&](std::size_t t) {
      std::mt19937_64 rng(1000 + t);
      const Eigen::MatrixXcd u = oracle::random_unitary(coarse.orbitals.phi.cols(), rng);
      const OrbitalSet rotated{coarse.orbitals.basis, coarse.orbitals.phi * u};
      const std::vector<double> got = scalars(qoi_error_estimates(m, split, rotated, &ref.orbitals, eo));
      for (std::size_t i = 0; i < want.size(); ++i) worst[t] = std::max(worst[t], std::abs(got[i] - want[i]));
    });
    const double w = *std::max_element(worst.begin(), worst.end());
    return Outcome{w < 1e-9, fmt("%zu scalars, max deviation %.2e over 100 unitaries", want.size(), w)};
  });

  report(9, "deterministic CSV output", 0, [&] {
    const int threads = thread_count();
    set_thread_count(threads > 1 ? 1 : 3);
    const StudyResult again = run_study(study_config(), cache);
    set_thread_count(threads);
    write_study_outputs(again, work / "run2");
    std::string d = again.reference_from_cache ? "reference from cache; " : "reference recomputed; ";
    bool ok = again.reference_from_cache;
    for (const char* f : {"convergence.csv", "estimators.csv", "bounds.csv", "forces.csv"}) {
      const bool same = slurp(work / "run1" / f) == slurp(work / "run2" / f);
      ok = ok && same;
      d += fmt("%s %s; ", f, same ? "identical" : "DIFFERS");
    }
    return Outcome{ok, d};
  });

  fs::remove_all(work);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
