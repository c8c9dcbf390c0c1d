#include "pwap/archive.hpp"

#include <atomic>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "json.hpp"

namespace pwap {
namespace {

constexpr char kMagic[5] = {'P', 'W', 'A', 'P', '1'};

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(in_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string raw(std::size_t n) {
    need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }
  // Guards allocations driven by counts read from the file.
  void expect_at_least(std::uint64_t bytes) const {
    if (bytes > in_.size() - pos_) throw ArchiveError("archive is truncated");
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw ArchiveError("archive is truncated");
  }
  const std::string& in_;
  std::size_t pos_ = 0;
};

std::string number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string encode_archive(const MeanFieldModel& model, const GroundState& state,
                           const Eigen::MatrixXd& forces) {
  const PlaneWaveBasis& basis = *state.orbitals.basis;
  const Eigen::MatrixXcd& phi = state.orbitals.phi;
  const int dim = basis.lattice().dim();
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(static_cast<std::uint32_t>(dim));
  const Eigen::Matrix3d& a = basis.lattice().vectors();
  for (int c = 0; c < 3; ++c)
    for (int r = 0; r < 3; ++r) w.f64(a(r, c));
  w.f64(basis.ecut());
  w.u32(static_cast<std::uint32_t>(basis.supersampling()));
  w.u64(basis.size());
  for (const Miller& m : basis.millers())
    for (int d = 0; d < 3; ++d) w.i32(m[static_cast<std::size_t>(d)]);
  w.u64(static_cast<std::uint64_t>(phi.cols()));
  w.f64(state.energy);
  w.u64(model.atoms.size());
  for (const Atom& atom : model.atoms) {
    for (int d = 0; d < 3; ++d) w.f64(atom.position[d]);
    w.f64(atom.depth);
    w.f64(atom.width);
  }
  for (std::size_t j = 0; j < model.atoms.size(); ++j)
    for (int d = 0; d < 3; ++d)
      w.f64(d < forces.rows() && static_cast<Eigen::Index>(j) < forces.cols()
                ? forces(d, static_cast<Eigen::Index>(j))
                : 0.0);
  for (Eigen::Index i = 0; i < phi.cols(); ++i)
    w.f64(i < state.eigenvalues.size() ? state.eigenvalues[i] : 0.0);
  w.u8(state.report.converged ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(state.report.iterations));
  w.f64(state.report.residual_norm);
  for (Eigen::Index c = 0; c < phi.cols(); ++c)
    for (Eigen::Index r = 0; r < phi.rows(); ++r) {
      w.f64(phi(r, c).real());
      w.f64(phi(r, c).imag());
    }
  return w.take();
}

Archive decode_archive(const std::string& bytes) {
  Reader r(bytes);
  if (r.raw(sizeof kMagic) != std::string(kMagic, sizeof kMagic))
    throw ArchiveError("not a PWAP1 archive");
  const int dim = static_cast<int>(r.u32());
  Eigen::Matrix3d a;
  for (int c = 0; c < 3; ++c)
    for (int row = 0; row < 3; ++row) a(row, c) = r.f64();
  const double ecut = r.f64();
  const int supersampling = static_cast<int>(r.u32());
  std::shared_ptr<const PlaneWaveBasis> basis;
  try {
    basis = std::make_shared<const PlaneWaveBasis>(Lattice(dim, a), ecut, supersampling);
  } catch (const std::invalid_argument& e) {
    throw ArchiveError(std::string("invalid basis descriptor: ") + e.what());
  }
  const std::uint64_t n_basis = r.u64();
  if (n_basis != basis->size()) throw ArchiveError("basis size does not match the descriptor");
  for (std::size_t i = 0; i < basis->size(); ++i) {
    Miller m;
    for (int d = 0; d < 3; ++d) m[static_cast<std::size_t>(d)] = r.i32();
    if (m != basis->miller(i)) throw ArchiveError("basis ordering does not match the descriptor");
  }
  const std::uint64_t n_orb = r.u64();
  Archive out;
  out.energy = r.f64();
  const std::uint64_t n_atoms = r.u64();
  r.expect_at_least(n_atoms * 8 * 8);
  out.atoms.resize(n_atoms);
  for (Atom& atom : out.atoms) {
    for (int d = 0; d < 3; ++d) atom.position[d] = r.f64();
    atom.depth = r.f64();
    atom.width = r.f64();
  }
  out.forces = Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(n_atoms));
  for (std::uint64_t j = 0; j < n_atoms; ++j)
    for (int d = 0; d < 3; ++d) {
      const double f = r.f64();
      if (d < dim) out.forces(d, static_cast<Eigen::Index>(j)) = f;
    }
  r.expect_at_least(n_orb * 8);
  out.eigenvalues.resize(static_cast<Eigen::Index>(n_orb));
  for (auto& e : out.eigenvalues) e = r.f64();
  out.converged = r.u8() != 0;
  out.iterations = static_cast<int>(r.u32());
  out.residual_norm = r.f64();
  r.expect_at_least(n_orb * n_basis * 16);
  Eigen::MatrixXcd phi(static_cast<Eigen::Index>(n_basis), static_cast<Eigen::Index>(n_orb));
  for (Eigen::Index c = 0; c < phi.cols(); ++c)
    for (Eigen::Index row = 0; row < phi.rows(); ++row) {
      const double re = r.f64();
      phi(row, c) = cplx(re, r.f64());
    }
  if (!r.done()) throw ArchiveError("trailing bytes after archive");
  out.orbitals = {basis, std::move(phi)};
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  static std::atomic<unsigned> counter{0};
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.close();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("cannot write " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

void write_archive(const std::filesystem::path& path, const MeanFieldModel& model,
                   const GroundState& state, const Eigen::MatrixXd& forces) {
  write_file_atomic(path, encode_archive(model, state, forces));
}

Archive read_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArchiveError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return decode_archive(buf.str());
}

std::string solve_report_json(const MeanFieldModel& model, const GroundState& state,
                              const Eigen::MatrixXd& forces) {
  using nlohmann::ordered_json;
  ordered_json j;
  const SolveReport& rep = state.report;
  j["converged"] = rep.converged;
  j["iterations"] = rep.iterations;
  j["residual_norm"] = rep.residual_norm;
  j["message"] = rep.message;
  j["energy"] = state.energy;
  j["ecut"] = state.orbitals.basis->ecut();
  j["n_basis"] = state.orbitals.basis->size();
  j["n_electrons"] = model.n_electrons;
  j["eigenvalues"] = std::vector<double>(state.eigenvalues.data(),
                                         state.eigenvalues.data() + state.eigenvalues.size());
  ordered_json f = ordered_json::array();
  for (Eigen::Index c = 0; c < forces.cols(); ++c) {
    std::vector<double> col(forces.col(c).data(), forces.col(c).data() + forces.rows());
    f.push_back(col);
  }
  j["forces"] = f;
  j["energy_history"] = rep.energy_history;
  j["residual_history"] = rep.residual_history;
  j["eigensolver_iterations"] = rep.eigensolver_iterations;
  return j.dump(2) + "\n";
}

std::string reference_key(const MeanFieldModel& model, double ecut, int supersampling,
                          const ScfOptions& scf) {
  std::string s = "pwap-ref-v1";
  const int dim = model.lattice.dim();
  s += "|dim=" + std::to_string(dim);
  for (int c = 0; c < 3; ++c)
    for (int r = 0; r < 3; ++r) s += "," + number(model.lattice.vectors()(r, c));
  for (const Atom& atom : model.atoms) {
    s += "|atom";
    for (int d = 0; d < 3; ++d) s += "," + number(atom.position[d]);
    s += "," + number(atom.depth) + "," + number(atom.width);
  }
  for (const CosineTerm& c : model.cosines)
    s += "|cos," + std::to_string(c.g[0]) + "," + std::to_string(c.g[1]) + "," +
         std::to_string(c.g[2]) + "," + number(c.amplitude);
  s += "|alpha=" + number(model.alpha) + "|hartree=" + (model.hartree ? "1" : "0") +
       "|nel=" + std::to_string(model.n_electrons) + "|kin=" + number(model.kinetic_scale);
  s += "|ecut=" + number(ecut) + "|ss=" + std::to_string(supersampling);
  s += "|tol=" + number(scf.tolerance) + "|mix=" + number(scf.mixing) +
       "|eig=" + number(scf.eig_tolerance) + "|seed=" + std::to_string(scf.seed);
  // 64-bit FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pwap
