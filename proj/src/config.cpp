#include "hsstokes/config.hpp"

#include "hsstokes/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

extern char** environ;

namespace hsstokes::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0;
  const auto t = trim(v);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty())
    throw ConfigError("key '" + key + "': '" + v + "' is not a number");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto t = trim(v);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty())
    throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto t = trim(v);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty())
    throw ConfigError("key '" + key + "': '" + v + "' is not an unsigned integer");
  return out;
}

std::string points_text(const std::vector<fields::SpaceTimePoint>& pts) {
  std::string s;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (k) s += ';';
    const auto& q = pts[k];
    for (int i = 0; i < q.p.x_prime.size(); ++i) s += csv::format_double(q.p.x_prime[i]) + ',';
    s += csv::format_double(q.p.x_n) + ',' + csv::format_double(q.t);
  }
  return s;
}

struct Entry {
  const char* key;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define HS_DOUBLE(KEY, FIELD)                                                                         \
  Entry {                                                                                             \
    KEY, [](RunConfig& c, const std::string& k, const std::string& v) { c.FIELD = to_double(k, v); }, \
        [](const RunConfig& c) { return csv::format_double(c.FIELD); }                               \
  }
#define HS_INT(KEY, FIELD)                                                                                    \
  Entry {                                                                                                     \
    KEY, [](RunConfig& c, const std::string& k, const std::string& v) { c.FIELD = static_cast<int>(to_int(k, v)); }, \
        [](const RunConfig& c) { return std::to_string(c.FIELD); }                                           \
  }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      Entry{"n",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.n = static_cast<int>(to_int(k, v));
              c.bump.n = c.n;
            },
            [](const RunConfig& c) { return std::to_string(c.n); }},
      Entry{"phi.family",
            [](RunConfig& c, const std::string&, const std::string& v) {
              try {
                c.phi.family = data::phi_family_from_string(trim(v));
              } catch (const std::exception& e) {
                throw ConfigError(std::string("key 'phi.family': ") + e.what());
              }
            },
            [](const RunConfig& c) { return data::to_string(c.phi.family); }},
      HS_DOUBLE("phi.a", phi.a),
      HS_DOUBLE("phi.cutoff_inner", phi.cutoff_inner),
      HS_DOUBLE("phi.cutoff_outer", phi.cutoff_outer),
      HS_DOUBLE("phi.alpha", phi.alpha_scale),
      HS_DOUBLE("bump.margin", bump.margin),
      HS_DOUBLE("quad.rel_tol", quad.rel_tol),
      HS_DOUBLE("quad.abs_tol", quad.abs_tol),
      HS_INT("quad.max_subdivisions", quad.max_subdivisions),
      HS_DOUBLE("quad.tail_sigma", quad.tail_sigma),
      Entry{"regions.mode",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              const auto t = trim(v);
              if (t == "calibrate") c.calibrate_regions = true;
              else if (t == "fixed") c.calibrate_regions = false;
              else throw ConfigError("key '" + k + "': expected fixed or calibrate, got '" + v + "'");
            },
            [](const RunConfig& c) { return std::string(c.calibrate_regions ? "calibrate" : "fixed"); }},
      HS_DOUBLE("regions.t0", regions.t0),
      HS_DOUBLE("regions.t1", regions.t1),
      HS_DOUBLE("regions.eps0", regions.eps0),
      HS_DOUBLE("regions.eps1", regions.eps1),
      Entry{"seed", [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = to_u64(k, v); },
            [](const RunConfig& c) { return std::to_string(c.seed); }},
      Entry{"output_dir",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.output_dir = trim(v);
              if (c.output_dir.empty()) throw ConfigError("key '" + k + "': empty path");
            },
            [](const RunConfig& c) { return c.output_dir; }},
      Entry{"eval.points",
            [](RunConfig& c, const std::string&, const std::string& v) { c.eval_points = parse_points(v, c.n); },
            [](const RunConfig& c) { return points_text(c.eval_points); }},
      HS_DOUBLE("rates.tol_slope", rates_tol_slope),
      HS_DOUBLE("rates.min_r2", rates_min_r2),
      HS_INT("lemmas.kernel_points", kernel_points),
      HS_DOUBLE("lemmas.kernel_tol", kernel_tol),
      HS_DOUBLE("lemmas.psi_tol_slope", psi_tol_slope),
      HS_DOUBLE("verify.c_max", c_max),
      HS_INT("residuals.points", residual_points),
      HS_DOUBLE("residuals.h", residual_h),
      HS_DOUBLE("residuals.min_distance", residual_min_distance),
      HS_INT("residuals.weak_nodes", weak_nodes),
      HS_INT("lp.shells", lp.shells),
      HS_INT("lp.tail_window", lp.tail_window),
      HS_DOUBLE("lp.tail_tol", lp.tail_tol),
      HS_INT("lp.points_per_dim", lp.points_per_dim),
      Entry{"lp.source",
            [](RunConfig& c, const std::string&, const std::string& v) {
              try {
                c.lp.source = verify::lp_source_from_string(trim(v));
              } catch (const std::exception& e) {
                throw ConfigError(std::string("key 'lp.source': ") + e.what());
              }
            },
            [](const RunConfig& c) { return verify::to_string(c.lp.source); }},
      HS_DOUBLE("lp.tol", lp_tol),
  };
  return table;
}

#undef HS_DOUBLE
#undef HS_INT

const Entry* find(const std::string& key) {
  for (const auto& e : entries())
    if (key == e.key) return &e;
  return nullptr;
}

}  // namespace

void RunConfig::validate() const {
  try {
    if (n != 2 && n != 3) throw ConfigError("n must be 2 or 3");
    if (bump.n != n) throw ConfigError("bump dimension differs from n");
    phi.validate();
    bump.validate();
    quad.validate();
    regions.validate();
    lp.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  for (const auto& q : eval_points)
    if (q.p.n() != n) throw ConfigError("eval.points: point dimension differs from n");
  if (!(rates_tol_slope > 0)) throw ConfigError("rates.tol_slope must be positive");
  if (!(rates_min_r2 >= 0 && rates_min_r2 <= 1)) throw ConfigError("rates.min_r2 must lie in [0, 1]");
  if (kernel_points < 1) throw ConfigError("lemmas.kernel_points must be positive");
  if (!(kernel_tol > 0)) throw ConfigError("lemmas.kernel_tol must be positive");
  if (!(psi_tol_slope > 0)) throw ConfigError("lemmas.psi_tol_slope must be positive");
  if (!(c_max >= 1)) throw ConfigError("verify.c_max must be at least 1");
  if (residual_points < 0) throw ConfigError("residuals.points must be non-negative");
  if (!(residual_h > 0 && residual_h < 0.05)) throw ConfigError("residuals.h must lie in (0, 0.05)");
  if (!(residual_min_distance >= 5 * residual_h && residual_min_distance < 0.4))
    throw ConfigError("residuals.min_distance must lie in [5 h, 0.4)");
  if (weak_nodes < 4 && weak_nodes != 0) throw ConfigError("residuals.weak_nodes must be 0 (skip) or at least 4");
  if (!(lp_tol > 0)) throw ConfigError("lp.tol must be positive");
}

std::vector<std::string> known_keys() {
  std::vector<std::string> keys;
  for (const auto& e : entries()) keys.emplace_back(e.key);
  return keys;
}

void set_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  const Entry* e = find(key);
  if (!e) throw ConfigError("unknown key '" + key + "'");
  e->set(cfg, key, value);
}

RunConfig parse(const std::string& text, const std::string& source) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  // "n" first so that dimension-dependent values parse against the final n.
  std::vector<std::pair<std::string, std::string>> assignments;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    if (!find(key)) throw ConfigError(source + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    assignments.emplace_back(key, line.substr(eq + 1));
  }
  std::stable_partition(assignments.begin(), assignments.end(), [](const auto& a) { return a.first == "n"; });
  for (const auto& [k, v] : assignments) {
    try {
      set_value(cfg, k, v);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path);
}

std::string env_name(const std::string& key) {
  std::string s = kEnvPrefix;
  for (char c : key) s += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

void apply_env(RunConfig& cfg, const std::map<std::string, std::string>& env) {
  std::map<std::string, std::string> by_env;
  for (const auto& k : known_keys()) by_env[env_name(k)] = k;
  const std::string prefix = kEnvPrefix;
  // "n" first, as in files.
  if (auto it = env.find(env_name("n")); it != env.end()) set_value(cfg, "n", it->second);
  for (const auto& [name, value] : env) {
    if (name.compare(0, prefix.size(), prefix) != 0) continue;
    const auto it = by_env.find(name);
    if (it == by_env.end()) throw ConfigError("environment variable " + name + " matches no config key");
    if (it->second == "n") continue;
    try {
      set_value(cfg, it->second, value);
    } catch (const ConfigError& e) {
      throw ConfigError(name + ": " + e.what());
    }
  }
}

std::map<std::string, std::string> process_environment() {
  std::map<std::string, std::string> env;
  for (char** e = environ; e && *e; ++e) {
    const std::string kv = *e;
    const auto eq = kv.find('=');
    if (eq != std::string::npos) env[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return env;
}

std::string canonical(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> kv;
  for (const auto& e : entries()) kv.emplace_back(e.key, e.get(cfg));
  std::sort(kv.begin(), kv.end());
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t config_hash(const RunConfig& cfg) { return csv::fnv1a(canonical(cfg)); }

std::vector<fields::SpaceTimePoint> parse_points(const std::string& text, int n) {
  std::vector<fields::SpaceTimePoint> pts;
  std::stringstream tuples(text);
  std::string tuple;
  while (std::getline(tuples, tuple, ';')) {
    if (trim(tuple).empty()) continue;
    std::vector<double> v;
    std::stringstream fs(tuple);
    std::string f;
    while (std::getline(fs, f, ',')) v.push_back(to_double("eval.points", f));
    if (static_cast<int>(v.size()) != n + 1)
      throw ConfigError("eval.points: '" + trim(tuple) + "' needs " + std::to_string(n + 1) + " numbers");
    fields::SpaceTimePoint q;
    q.p.x_prime = Vecd(n - 1);
    for (int i = 0; i < n - 1; ++i) q.p.x_prime[i] = v[static_cast<std::size_t>(i)];
    q.p.x_n = v[static_cast<std::size_t>(n - 1)];
    q.t = v[static_cast<std::size_t>(n)];
    try {
      q.validate();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("eval.points: ") + e.what());
    }
    pts.push_back(q);
  }
  return pts;
}

}  // namespace hsstokes::config
