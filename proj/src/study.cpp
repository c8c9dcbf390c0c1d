#include "pwap/study.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "pwap/archive.hpp"
#include "pwap/errors.hpp"
#include "pwap/parallel.hpp"

namespace pwap {
namespace {

double l2_distance(const PlaneWaveBasis& basis, const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  const auto ra = density(basis, a);
  const auto rb = density(basis, b);
  std::vector<double> d(ra.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = ra[i] - rb[i];
  return std::sqrt(integrate(basis, d, d));
}

GroundState from_archive(Archive&& a) {
  GroundState gs;
  gs.orbitals = std::move(a.orbitals);
  gs.eigenvalues = std::move(a.eigenvalues);
  gs.energy = a.energy;
  gs.report.converged = a.converged;
  gs.report.iterations = a.iterations;
  gs.report.residual_norm = a.residual_norm;
  gs.report.message = "loaded from cache";
  return gs;
}

CutoffResult run_cutoff(const RunConfig& cfg, const StudyResult& ref, double ecut) {
  const MeanFieldModel& model = cfg.model;
  const auto fine = ref.reference.orbitals.basis;
  CutoffResult row;
  row.ecut = ecut;
  auto coarse = std::make_shared<const PlaneWaveBasis>(model.lattice, ecut, cfg.supersampling);
  row.n_basis = coarse->size();
  const GroundState gs = scf(model, coarse, cfg.scf);
  row.scf_iterations = gs.report.iterations;
  if (!gs.report.converged) {
    row.status = "scf_not_converged";
    row.message = gs.report.message;
    return row;
  }

  const FrequencySplit split(fine, ecut);
  const OrbitalSet& reference = ref.reference.orbitals;
  row.report = qoi_error_estimates(model, split, gs.orbitals, &reference, cfg.estimator);
  const ErrorReport& rep = row.report;
  row.energy_error = rep.energy - rep.energy_reference;
  row.energy_post_residual = rep.energy - rep.energy_estimate.residual;
  row.energy_post_schur = rep.energy - rep.energy_estimate.schur;
  row.force_error = (rep.forces - rep.forces_reference).norm();
  row.force_post_error_residual = (rep.forces - rep.dforce_residual - rep.forces_reference).norm();
  row.force_post_error_schur = (rep.forces - rep.dforce_schur - rep.forces_reference).norm();

  const OrbitalSet lifted = lift(gs.orbitals, fine);
  const TangentOperators ops(model, lifted);
  const OrbitalMetric metric = OrbitalMetric::kinetic(ops, cfg.estimator.metric);
  row.bounds = norm_bound_report(ops, metric, ref.constants, &reference);
  row.force_bound = 0.0;
  for (std::size_t j = 0; j < model.atoms.size(); ++j)
    for (int d = 0; d < model.lattice.dim(); ++d)
      row.force_bound = std::max(
          row.force_bound, operator_norm_force_bound(model, lifted, j, d, row.bounds.error_norm));

  const NewtonResult newton = newton_step(model, fine, gs.orbitals, cfg.estimator.solve_tolerance);
  row.newton_iterations = newton.solve.iterations;
  row.energy_error_newton = energy(model, newton.orbitals) - rep.energy_reference;
  row.density_error_newton = l2_distance(*fine, newton.orbitals.phi, reference.phi);
  row.force_error_newton = (forces(model, newton.orbitals) - rep.forces_reference).norm();
  return row;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ' ';
  return s;
}

class Csv {
 public:
  explicit Csv(const std::string& header) { out_ << kCsvVersion << '\n' << header << '\n'; }
  Csv& operator<<(double x) { return field(csv_number(x)); }
  Csv& operator<<(int x) { return field(std::to_string(x)); }
  Csv& operator<<(std::size_t x) { return field(std::to_string(x)); }
  Csv& operator<<(const std::string& s) { return field(sanitize(s)); }
  void end_row() {
    out_ << '\n';
    first_ = true;
  }
  void save(const std::filesystem::path& path) const { write_file_atomic(path, out_.str()); }

 private:
  Csv& field(const std::string& s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
    return *this;
  }
  std::ostringstream out_;
  bool first_ = true;
};

}  // namespace

std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

StudyResult run_study(const RunConfig& cfg, const std::filesystem::path& cache_dir) {
  StudyResult result;
  const MeanFieldModel& model = cfg.model;
  bool loaded = false;
  if (!cache_dir.empty()) {
    std::filesystem::create_directories(cache_dir);
    result.reference_path =
        cache_dir / ("reference-" +
                     reference_key(model, cfg.reference_cutoff, cfg.supersampling, cfg.scf) + ".pwap");
    if (std::filesystem::exists(result.reference_path)) {
      try {
        Archive a = read_archive(result.reference_path);
        if (a.converged && a.orbitals.n_orbitals() == model.n_electrons) {
          result.reference_forces = a.forces;
          result.reference = from_archive(std::move(a));
          loaded = true;
        }
      } catch (const ArchiveError&) {
        // unreadable cache entry: recompute and overwrite
      }
    }
  }
  if (!loaded) {
    auto basis =
        std::make_shared<const PlaneWaveBasis>(model.lattice, cfg.reference_cutoff, cfg.supersampling);
    result.reference = scf(model, basis, cfg.scf);
    if (!result.reference.report.converged)
      throw ConvergenceError("reference solve did not converge", result.reference.report.residual_norm,
                             result.reference.report.iterations);
    result.reference_forces = forces(model, result.reference.orbitals);
    if (!result.reference_path.empty())
      write_archive(result.reference_path, model, result.reference, result.reference_forces);
  }
  result.reference_from_cache = loaded;

  {
    const TangentOperators ops(model, result.reference.orbitals);
    const OrbitalMetric metric = OrbitalMetric::kinetic(ops, cfg.estimator.metric);
    result.constants = operator_constants(ops, metric, cfg.estimator);
  }

  result.rows.resize(cfg.cutoffs.size());
  parallel_for(cfg.cutoffs.size(), [&](std::size_t i) {
    try {
      result.rows[i] = run_cutoff(cfg, result, cfg.cutoffs[i]);
    } catch (const std::exception& e) {
      CutoffResult row;
      row.ecut = cfg.cutoffs[i];
      row.status = "failed";
      row.message = e.what();
      result.rows[i] = std::move(row);
    }
  });
  return result;
}

void write_study_outputs(const StudyResult& result, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);

  Csv conv(
      "cutoff,status,n_basis,scf_iterations,energy,E_err_variational,E_err_newton,"
      "rho_err_L2_variational,rho_err_L2_newton,F_err_euclid_variational,F_err_euclid_newton,"
      "newton_cg_iterations,message");
  for (const auto& r : result.rows) {
    conv << r.ecut << r.status << r.n_basis << r.scf_iterations
         << (r.status == "ok" ? r.report.energy : CutoffResult::nan) << r.energy_error
         << r.energy_error_newton << r.report.density_error << r.density_error_newton << r.force_error
         << r.force_error_newton << r.newton_iterations << r.message;
    conv.end_row();
  }
  conv.save(out_dir / "convergence.csv");

  Csv est(
      "cutoff,status,E_err,E_estimate_exact,E_estimate_residual,E_estimate_schur,E_post_residual,"
      "E_post_schur,rho_err_L2,rho_estimate_exact,rho_estimate_residual,rho_estimate_schur,"
      "rho_post_err_exact,rho_post_err_residual,rho_post_err_schur,F_err_euclid,"
      "F_post_err_residual,F_post_err_schur");
  for (const auto& r : result.rows) {
    const ErrorReport& e = r.report;
    est << r.ecut << r.status << r.energy_error << e.energy_estimate.exact << e.energy_estimate.residual
        << e.energy_estimate.schur << r.energy_post_residual << r.energy_post_schur << e.density_error
        << e.density_estimate.exact << e.density_estimate.residual << e.density_estimate.schur
        << e.density_post_error.exact << e.density_post_error.residual << e.density_post_error.schur
        << r.force_error << r.force_post_error_residual << r.force_post_error_schur;
    est.end_row();
  }
  est.save(out_dir / "estimators.csv");

  Csv bounds(
      "cutoff,status,residual_norm,metric_residual_norm,low_frequency_residual,error_norm,"
      "metric_error_norm,bound_plain,bound_metric,ratio_plain,ratio_metric,c_plain,c_metric,"
      "force_bound");
  for (const auto& r : result.rows) {
    const BoundReport& b = r.bounds;
    const bool ok = r.status == "ok";
    const double nan = CutoffResult::nan;
    bounds << r.ecut << r.status << (ok ? b.residual_norm : nan) << (ok ? b.metric_residual_norm : nan)
           << (ok ? r.report.low_frequency_residual : nan) << b.error_norm << b.metric_error_norm
           << (ok ? b.bound_plain : nan) << (ok ? b.bound_metric : nan)
           << (ok ? b.bound_plain / b.error_norm : nan)
           << (ok ? b.bound_metric / b.metric_error_norm : nan) << result.constants.plain
           << result.constants.metric << r.force_bound;
    bounds.end_row();
  }
  bounds.save(out_dir / "bounds.csv");

  Csv f("cutoff,atom,direction,F,F_reference,dF_exact,dF_residual,dF_schur");
  for (const auto& r : result.rows) {
    const ErrorReport& e = r.report;
    if (r.status != "ok") continue;
    for (Eigen::Index j = 0; j < e.forces.cols(); ++j)
      for (Eigen::Index d = 0; d < e.forces.rows(); ++d) {
        f << r.ecut << static_cast<int>(j) << static_cast<int>(d) << e.forces(d, j)
          << e.forces_reference(d, j) << e.dforce_exact(d, j) << e.dforce_residual(d, j)
          << e.dforce_schur(d, j);
        f.end_row();
      }
  }
  f.save(out_dir / "forces.csv");
}

GpOptions gp_options(const RunConfig& cfg) {
  GpOptions o;
  o.reference_factor = cfg.gp.reference_factor;
  o.power_tolerance = cfg.gp.power_tolerance;
  o.seed = cfg.seed;
  o.scf = cfg.scf;
  return o;
}

void write_gp_outputs(const GpVerification& v, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  Csv csv("N,norm,bound_fit,power_iterations,lambda,reference_cutoff,fit_slope");
  for (const auto& p : v.points) {
    csv << p.n << p.norm << p.bound_fit << p.power_iterations << p.lambda << v.reference_cutoff
        << v.slope;
    csv.end_row();
  }
  csv.save(out_dir / "prop_a1.csv");
}

}  // namespace pwap
