#include "pwap/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace pwap {
namespace {

struct Entry {
  std::string section;
  std::string key;
  std::string value;
  int line;
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::string word;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!word.empty()) out.push_back(std::move(word));
      word.clear();
    } else {
      word += c;
    }
  }
  if (!word.empty()) out.push_back(std::move(word));
  return out;
}

double to_double(const std::string& s, int line) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw ConfigError("expected a number, got '" + s + "'", line);
  return v;
}

long long to_integer(const std::string& s, int line) {
  long long v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError("expected an integer, got '" + s + "'", line);
  return v;
}

bool to_bool(const std::string& s, int line) {
  std::string l = s;
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  if (l == "true" || l == "yes" || l == "on" || l == "1") return true;
  if (l == "false" || l == "no" || l == "off" || l == "0") return false;
  throw ConfigError("expected true or false, got '" + s + "'", line);
}

std::vector<double> to_list(const std::string& s, int line) {
  std::vector<double> out;
  for (const auto& w : split_words(s)) out.push_back(to_double(w, line));
  if (out.empty()) throw ConfigError("expected a list of numbers", line);
  return out;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"model",
       {"dimension", "lattice_constant", "a1", "a2", "a3", "alpha", "hartree", "n_electrons",
        "kinetic_scale", "atom", "cosine"}},
      {"basis", {"ecut", "supersampling"}},
      {"study", {"cutoffs", "reference_cutoff", "seed"}},
      {"solver",
       {"tolerance", "mixing", "max_iterations", "eig_tolerance", "eig_max_iterations",
        "linear_tolerance", "metric_tolerance", "metric_max_iterations", "hessian_eig_tolerance"}},
      {"gp", {"amplitude", "cutoffs", "reference_factor", "power_tolerance"}},
  };
  return keys;
}

std::vector<Entry> tokenize(const std::string& text) {
  std::vector<Entry> entries;
  std::set<std::pair<std::string, std::string>> seen;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto comment = raw.find_first_of("#;");
    const std::string s = trim(comment == std::string::npos ? raw : raw.substr(0, comment));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("unterminated section header", line);
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      if (!known_keys().count(section)) throw ConfigError("unknown section [" + section + "]", line);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
    if (section.empty()) throw ConfigError("key outside of any [section]", line);
    Entry e{section, trim(std::string_view(s).substr(0, eq)), trim(std::string_view(s).substr(eq + 1)),
            line};
    if (e.key.empty()) throw ConfigError("empty key", line);
    if (e.value.empty()) throw ConfigError("empty value for '" + e.key + "'", line);
    if (!known_keys().at(section).count(e.key))
      throw ConfigError("unknown key '" + e.key + "' in [" + section + "]", line);
    const bool repeatable = e.key == "atom" || e.key == "cosine";
    if (!repeatable && !seen.insert({section, e.key}).second)
      throw ConfigError("duplicate key '" + e.key + "'", line);
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace

RunConfig parse_config(const std::string& text, Command command) {
  const std::vector<Entry> entries = tokenize(text);
  RunConfig cfg;
  auto find = [&](const std::string& section, const std::string& key) -> const Entry* {
    for (const auto& e : entries)
      if (e.section == section && e.key == key) return &e;
    return nullptr;
  };

  int dim = 1;
  int dim_line = 0;
  if (const Entry* e = find("model", "dimension")) {
    dim = static_cast<int>(to_integer(e->value, e->line));
    dim_line = e->line;
    if (dim < 1 || dim > 3) throw ConfigError("dimension must be 1, 2 or 3", e->line);
  }
  if (command == Command::gp_check && dim != 1)
    throw ConfigError("gp-check supports dimension 1 only", dim_line);

  // Lattice
  if (command != Command::gp_check) {
    const Entry* a = find("model", "lattice_constant");
    const Entry* vecs[3] = {find("model", "a1"), find("model", "a2"), find("model", "a3")};
    const bool any_vec = vecs[0] || vecs[1] || vecs[2];
    if (a && any_vec) throw ConfigError("give either lattice_constant or a1..a3, not both", a->line);
    if (a) {
      const double len = to_double(a->value, a->line);
      if (!(len > 0.0)) throw ConfigError("lattice_constant must be positive", a->line);
      cfg.model.lattice = Lattice::cubic(dim, len);
    } else if (any_vec) {
      Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
      for (int d = 0; d < dim; ++d) {
        if (!vecs[d]) throw ConfigError("missing a" + std::to_string(d + 1), 0);
        const auto v = to_list(vecs[d]->value, vecs[d]->line);
        if (static_cast<int>(v.size()) != dim)
          throw ConfigError("lattice vector needs " + std::to_string(dim) + " components", vecs[d]->line);
        for (int k = 0; k < dim; ++k) m(k, d) = v[static_cast<std::size_t>(k)];
      }
      for (int d = dim; d < 3; ++d)
        if (vecs[d]) throw ConfigError("lattice vector beyond the dimension", vecs[d]->line);
      try {
        cfg.model.lattice = Lattice(dim, m);
      } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what(), vecs[0] ? vecs[0]->line : 0);
      }
    } else {
      throw ConfigError("[model] needs lattice_constant or a1..a3", 0);
    }
  }

  for (const auto& e : entries) {
    const int l = e.line;
    if (e.section == "model") {
      if (e.key == "alpha") cfg.model.alpha = to_double(e.value, l);
      else if (e.key == "hartree") cfg.model.hartree = to_bool(e.value, l);
      else if (e.key == "n_electrons") cfg.model.n_electrons = static_cast<int>(to_integer(e.value, l));
      else if (e.key == "kinetic_scale") cfg.model.kinetic_scale = to_double(e.value, l);
      else if (e.key == "atom") {
        const auto v = to_list(e.value, l);
        if (static_cast<int>(v.size()) != dim + 2)
          throw ConfigError("atom needs " + std::to_string(dim) + " fractional coordinates, depth, width", l);
        Atom atom;
        for (int d = 0; d < dim; ++d) atom.position[d] = v[static_cast<std::size_t>(d)];
        atom.depth = v[static_cast<std::size_t>(dim)];
        atom.width = v[static_cast<std::size_t>(dim) + 1];
        if (!(atom.width > 0.0)) throw ConfigError("atom width must be positive", l);
        cfg.model.atoms.push_back(atom);
      } else if (e.key == "cosine") {
        const auto words = split_words(e.value);
        if (static_cast<int>(words.size()) != dim + 1)
          throw ConfigError("cosine needs " + std::to_string(dim) + " integer indices and an amplitude", l);
        CosineTerm c;
        for (int d = 0; d < dim; ++d)
          c.g[static_cast<std::size_t>(d)] = static_cast<int>(to_integer(words[static_cast<std::size_t>(d)], l));
        c.amplitude = to_double(words.back(), l);
        cfg.model.cosines.push_back(c);
      }
    } else if (e.section == "basis") {
      if (e.key == "ecut") cfg.ecut = to_double(e.value, l);
      else if (e.key == "supersampling") {
        cfg.supersampling = static_cast<int>(to_integer(e.value, l));
        if (cfg.supersampling < 2) throw ConfigError("supersampling must be at least 2", l);
      }
    } else if (e.section == "study") {
      if (e.key == "cutoffs") cfg.cutoffs = to_list(e.value, l);
      else if (e.key == "reference_cutoff") cfg.reference_cutoff = to_double(e.value, l);
      else if (e.key == "seed") {
        const auto s = to_integer(e.value, l);
        if (s < 0) throw ConfigError("seed must be nonnegative", l);
        cfg.seed = static_cast<std::uint64_t>(s);
      }
    } else if (e.section == "solver") {
      if (e.key == "tolerance") cfg.scf.tolerance = to_double(e.value, l);
      else if (e.key == "mixing") cfg.scf.mixing = to_double(e.value, l);
      else if (e.key == "max_iterations") cfg.scf.max_iterations = static_cast<int>(to_integer(e.value, l));
      else if (e.key == "eig_tolerance") cfg.scf.eig_tolerance = to_double(e.value, l);
      else if (e.key == "eig_max_iterations")
        cfg.scf.eig_max_iterations = static_cast<int>(to_integer(e.value, l));
      else if (e.key == "linear_tolerance") cfg.estimator.solve_tolerance = to_double(e.value, l);
      else if (e.key == "metric_tolerance") cfg.estimator.metric.tolerance = to_double(e.value, l);
      else if (e.key == "metric_max_iterations")
        cfg.estimator.metric.max_iterations = static_cast<int>(to_integer(e.value, l));
      else if (e.key == "hessian_eig_tolerance") cfg.estimator.eig_tolerance = to_double(e.value, l);
      try {
        cfg.scf.validate();
      } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what(), l);
      }
      if (!(cfg.estimator.solve_tolerance > 0.0) || !(cfg.estimator.metric.tolerance > 0.0) ||
          !(cfg.estimator.eig_tolerance > 0.0) || cfg.estimator.metric.max_iterations < 1)
        throw ConfigError("solver tolerances and limits must be positive", l);
    } else if (e.section == "gp") {
      if (e.key == "amplitude") cfg.gp.amplitude = to_double(e.value, l);
      else if (e.key == "cutoffs") cfg.gp.cutoffs = to_list(e.value, l);
      else if (e.key == "reference_factor") {
        cfg.gp.reference_factor = static_cast<int>(to_integer(e.value, l));
        if (cfg.gp.reference_factor < 2) throw ConfigError("reference_factor must be at least 2", l);
      } else if (e.key == "power_tolerance") {
        cfg.gp.power_tolerance = to_double(e.value, l);
        if (!(cfg.gp.power_tolerance > 0.0)) throw ConfigError("power_tolerance must be positive", l);
      }
    }
  }
  cfg.scf.seed = cfg.seed;
  cfg.estimator.seed = cfg.seed;

  auto line_of = [&](const std::string& section, const std::string& key) {
    const Entry* e = find(section, key);
    return e ? e->line : 0;
  };

  if (command == Command::gp_check) {
    for (std::size_t i = 0; i < cfg.gp.cutoffs.size(); ++i) {
      if (!(cfg.gp.cutoffs[i] > 0.0) || (i > 0 && !(cfg.gp.cutoffs[i] > cfg.gp.cutoffs[i - 1])))
        throw ConfigError("gp cutoffs must be positive and increasing", line_of("gp", "cutoffs"));
    }
    cfg.model = gp_model(cfg.gp.amplitude);
    return cfg;
  }

  try {
    cfg.model.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what(), 0);
  }
  if (command == Command::solve) {
    if (!(cfg.ecut > 0.0)) throw ConfigError("[basis] ecut must be given and positive", line_of("basis", "ecut"));
  } else {
    if (cfg.cutoffs.empty()) throw ConfigError("[study] cutoffs is required", 0);
    for (std::size_t i = 0; i < cfg.cutoffs.size(); ++i)
      if (!(cfg.cutoffs[i] > 0.0) || (i > 0 && !(cfg.cutoffs[i] > cfg.cutoffs[i - 1])))
        throw ConfigError("cutoffs must be positive and increasing", line_of("study", "cutoffs"));
    if (!(cfg.reference_cutoff > cfg.cutoffs.back()))
      throw ConfigError("reference_cutoff must exceed every study cutoff",
                        line_of("study", "reference_cutoff"));
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, Command command) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string(), 0);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), command);
}

}  // namespace pwap
