// SPDX-License-Identifier: Apache-2.0

#include "ksafem/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace ksafem {

namespace {

struct Entry {
  std::string value;
  int line;
  bool used = false;
};

struct Parsed {
  // key is "section.key"
  std::map<std::string, Entry> entries;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Parsed tokenize(const std::string& text) {
  Parsed out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
    const std::string full = section.empty() ? key : section + "." + key;
    auto it = out.entries.find(full);
    if (it != out.entries.end())
      throw ConfigError("duplicate key '" + full + "' at lines " +
                        std::to_string(it->second.line) + " and " + std::to_string(lineno));
    out.entries[full] = {value, lineno, false};
  }
  return out;
}

class Reader {
 public:
  explicit Reader(Parsed& p) : p_(p) {}

  bool has(const std::string& key) const { return p_.entries.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback) {
    auto it = p_.entries.find(key);
    if (it == p_.entries.end()) return fallback;
    it->second.used = true;
    return it->second.value;
  }

  double real(const std::string& key, double fallback, double lo, double hi,
              bool lo_open = false) {
    auto it = p_.entries.find(key);
    if (it == p_.entries.end()) return fallback;
    it->second.used = true;
    double v;
    try {
      std::size_t pos = 0;
      v = std::stod(it->second.value, &pos);
      if (pos != it->second.value.size()) throw std::invalid_argument("trailing");
    } catch (...) {
      throw ConfigError("line " + std::to_string(it->second.line) + ": key '" + key +
                        "' is not a number");
    }
    const bool below = lo_open ? v <= lo : v < lo;
    if (below || v > hi)
      throw ConfigError("line " + std::to_string(it->second.line) + ": key '" + key +
                        "' out of range " + (lo_open ? "(" : "[") + std::to_string(lo) +
                        ", " + std::to_string(hi) + "]");
    return v;
  }

  int integer(const std::string& key, int fallback, int lo, int hi) {
    const double v = real(key, fallback, lo, hi);
    if (v != std::floor(v)) {
      auto it = p_.entries.find(key);
      throw ConfigError("line " + std::to_string(it->second.line) + ": key '" + key +
                        "' must be an integer");
    }
    return static_cast<int>(v);
  }

  bool flag(const std::string& key, bool fallback) {
    auto it = p_.entries.find(key);
    if (it == p_.entries.end()) return fallback;
    it->second.used = true;
    if (it->second.value == "on" || it->second.value == "true") return true;
    if (it->second.value == "off" || it->second.value == "false") return false;
    throw ConfigError("line " + std::to_string(it->second.line) + ": key '" + key +
                      "' must be on/off");
  }

  Vec3 vec3(const std::string& key, const Vec3& fallback) {
    auto it = p_.entries.find(key);
    if (it == p_.entries.end()) return fallback;
    it->second.used = true;
    std::istringstream s(it->second.value);
    Vec3 v;
    if (!(s >> v.x >> v.y >> v.z))
      throw ConfigError("line " + std::to_string(it->second.line) + ": key '" + key +
                        "' needs three numbers");
    std::string rest;
    if (s >> rest)
      throw ConfigError("line " + std::to_string(it->second.line) + ": key '" + key +
                        "' has trailing tokens");
    return v;
  }

  // numbered list entries: prefix1, prefix2, ...
  std::vector<std::pair<std::string, int>> numbered(const std::string& prefix) {
    std::vector<std::pair<std::string, int>> out;
    for (int i = 1;; ++i) {
      const std::string key = prefix + std::to_string(i);
      auto it = p_.entries.find(key);
      if (it == p_.entries.end()) break;
      it->second.used = true;
      out.emplace_back(it->second.value, it->second.line);
    }
    return out;
  }

  void reject_unknown() const {
    for (const auto& [key, e] : p_.entries)
      if (!e.used)
        throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + key + "'");
  }

 private:
  Parsed& p_;
};

std::vector<double> split_numbers(const std::string& s, std::string& head) {
  std::istringstream in(s);
  in >> head;
  std::vector<double> v;
  double x;
  while (in >> x) v.push_back(x);
  return v;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  Parsed parsed = tokenize(text);
  Reader r(parsed);
  RunConfig cfg;

  cfg.box.lo = r.vec3("domain.box_lo", {0, 0, 0});
  cfg.box.hi = r.vec3("domain.box_hi", {1, 1, 1});
  if (!cfg.box.nondegenerate()) throw ConfigError("domain box is degenerate");

  cfg.mesh_n = r.integer("mesh.n", 2, 1, 64);
  cfg.degree = r.integer("mesh.degree", 2, 1, 2);

  cfg.model.domain_box = cfg.box;
  cfg.model.n_orbitals = r.integer("model.n_orbitals", 1, 1, 64);
  cfg.model.hartree = r.flag("model.hartree", false);
  const std::string xc = r.str("model.xc", "none");
  if (xc == "none") {
    cfg.model.xc = make_xc_none();
  } else if (xc == "x_alpha") {
    cfg.model.xc_alpha = r.real("model.xc_alpha", 0.7, 0.0, 1.5, /*lo_open=*/true);
    cfg.model.xc = make_xc_xalpha(cfg.model.xc_alpha);
  } else {
    throw ConfigError("model.xc must be none or x_alpha");
  }
  for (const auto& [value, line] : r.numbered("model.well")) {
    std::string kind;
    const std::vector<double> v = split_numbers(value, kind);
    if (kind == "coulomb" && v.size() == 4) {
      cfg.model.coulomb_wells.push_back({v[0], {v[1], v[2], v[3]}});
    } else if (kind == "gaussian" && v.size() == 5) {
      cfg.model.gaussian_wells.push_back({v[0], v[1], {v[2], v[3], v[4]}});
    } else {
      throw ConfigError("line " + std::to_string(line) +
                        ": well must be 'coulomb Z x y z' or 'gaussian depth width x y z'");
    }
  }
  for (const auto& [value, line] : r.numbered("model.projector")) {
    std::string kind;
    const std::vector<double> v = split_numbers(value, kind);
    if (kind == "gaussian" && v.size() == 5)
      cfg.model.projectors.push_back({v[0], v[1], {v[2], v[3], v[4]}});
    else
      throw ConfigError("line " + std::to_string(line) +
                        ": projector must be 'gaussian amplitude width x y z'");
  }

  const std::string mode = r.str("afem.mode", "ks");
  if (mode == "ks")
    cfg.mode = RunMode::KohnSham;
  else if (mode == "linear")
    cfg.mode = RunMode::Linear;
  else
    throw ConfigError("afem.mode must be ks or linear");

  const std::string strategy = r.str("afem.strategy", "dorfler");
  if (strategy == "dorfler")
    cfg.afem.strategy = MarkStrategy::Dorfler;
  else if (strategy == "maximum")
    cfg.afem.strategy = MarkStrategy::Maximum;
  else
    throw ConfigError("afem.strategy must be dorfler or maximum");
  cfg.afem.theta = r.real("afem.theta", 0.5, 0.0, 1.0, /*lo_open=*/true);
  if (cfg.afem.theta >= 1.0) throw ConfigError("afem.theta must lie in (0,1)");
  cfg.afem.max_fraction = r.real("afem.max_fraction", 0.5, 0.0, 1.0, /*lo_open=*/true);
  cfg.afem.max_outer_iters = r.integer("afem.max_iters", 12, 1, 1000);
  cfg.afem.eta2_tol = r.real("afem.eta2_tol", 0.0, 0.0, 1e30);
  cfg.afem.ndof_max = r.integer("afem.ndof_max", 200000, 1, 100000000);
  cfg.afem.degree = cfg.degree;

  cfg.linear_problem = r.str("linear.problem", "sin_manufactured");
  if (cfg.linear_problem != "sin_manufactured" && cfg.linear_problem != "gaussian_peak")
    throw ConfigError("linear.problem must be sin_manufactured or gaussian_peak");

  cfg.afem.scf.tol = r.real("scf.tol", 1e-7, 0.0, 1.0, /*lo_open=*/true);
  cfg.afem.scf.mix_beta = r.real("scf.mix_beta", 0.3, 0.0, 1.0, /*lo_open=*/true);
  cfg.afem.scf.max_iters = r.integer("scf.max_iters", 60, 1, 10000);
  cfg.afem.scf.eig_tol = r.real("eig.tol", 1e-8, 0.0, 1.0, /*lo_open=*/true);
  cfg.afem.scf.eig_max_iters = r.integer("eig.max_iters", 600, 1, 100000);

  const std::string path = r.str("hartree.path", "poisson");
  if (path == "poisson")
    cfg.hartree_path = HartreePath::Poisson;
  else if (path == "direct")
    cfg.hartree_path = HartreePath::Direct;
  else
    throw ConfigError("hartree.path must be poisson or direct");
  cfg.afem.scf.hartree_path = cfg.hartree_path;

  cfg.output_dir = r.str("output.dir", "out");
  cfg.write_vtk = r.flag("output.vtk", false);
  cfg.seed = static_cast<std::uint64_t>(r.real("output.seed", 20240501, 0, 1e18));
  cfg.afem.scf.seed = cfg.seed;

  r.reject_unknown();

  // cross-field checks mirrored from the module invariants
  cfg.model.validate();
  if (!cfg.afem.validate()) throw ConfigError("afem block fails validation");
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

LinearProblem make_linear_problem(const std::string& name, const Box& box) {
  LinearProblem p;
  p.n_components = 1;
  if (name == "sin_manufactured") {
    // u = sin(pi x) sin(pi y) sin(pi z) on the unit cube scaled to the box,
    // L u = -1/2 lap u = f
    const Vec3 lo = box.lo;
    const double Lx = box.extent(0), Ly = box.extent(1), Lz = box.extent(2);
    auto u = [lo, Lx, Ly, Lz](const Vec3& x) {
      return std::sin(M_PI * (x.x - lo.x) / Lx) * std::sin(M_PI * (x.y - lo.y) / Ly) *
             std::sin(M_PI * (x.z - lo.z) / Lz);
    };
    const double lam =
        0.5 * M_PI * M_PI * (1.0 / (Lx * Lx) + 1.0 / (Ly * Ly) + 1.0 / (Lz * Lz));
    p.f = {[u, lam](const Vec3& x) { return lam * u(x); }};
    p.exact = {u};
    p.exact_grad = {[lo, Lx, Ly, Lz](const Vec3& x) {
      const double sx = std::sin(M_PI * (x.x - lo.x) / Lx),
                   cx = std::cos(M_PI * (x.x - lo.x) / Lx);
      const double sy = std::sin(M_PI * (x.y - lo.y) / Ly),
                   cy = std::cos(M_PI * (x.y - lo.y) / Ly);
      const double sz = std::sin(M_PI * (x.z - lo.z) / Lz),
                   cz = std::cos(M_PI * (x.z - lo.z) / Lz);
      return Vec3{M_PI / Lx * cx * sy * sz, M_PI / Ly * sx * cy * sz,
                  M_PI / Lz * sx * sy * cz};
    }};
  } else if (name == "gaussian_peak") {
    // sharp source at an off-center point; no closed-form solution
    const Vec3 c = box.center() + Vec3{0.137 * box.extent(0), 0.083 * box.extent(1),
                                       -0.191 * box.extent(2)};
    const double w = 0.02 * box.diameter();
    p.f = {[c, w](const Vec3& x) {
      const Vec3 d = x - c;
      return std::exp(-dot(d, d) / (2.0 * w * w));
    }};
  } else {
    throw InvalidInput("make_linear_problem: unknown problem " + name);
  }
  return p;
}

}  // namespace ksafem
