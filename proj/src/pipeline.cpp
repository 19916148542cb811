#include "selfdiff/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "selfdiff/errors.hpp"
#include "selfdiff/estimator.hpp"
#include "selfdiff/kmc.hpp"
#include "selfdiff/optimize.hpp"

namespace selfdiff {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_real(const std::string& text, int line, const std::string& key) {
  const auto slash = text.find('/');
  try {
    std::size_t used = 0;
    if (slash != std::string::npos) {
      const std::string a = trim(text.substr(0, slash));
      const std::string b = trim(text.substr(slash + 1));
      std::size_t ua = 0;
      std::size_t ub = 0;
      const double num = std::stod(a, &ua);
      const double den = std::stod(b, &ub);
      if (ua != a.size() || ub != b.size() || den == 0.0) throw std::invalid_argument(text);
      return num / den;
    }
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError(line, key + ": expected a number, got '" + text + "'");
  }
}

long long parse_int(const std::string& text, int line, const std::string& key) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError(line, key + ": expected an integer, got '" + text + "'");
  }
}

/// Shortest text that reads back to the same double.
std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

std::string join_reals(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + shortest(v[i]);
  return out;
}

std::string route_name(Route r) {
  switch (r) {
    case Route::Min: return "min";
    case Route::KMC: return "kmc";
    case Route::Both: return "both";
  }
  return "both";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path phi_path(const RunConfig& cfg, std::size_t j) { return cfg.out / ("phi_u" + std::to_string(j) + ".txt"); }

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

json config_json(const RunConfig& cfg) { return cfg.to_lines(); }

/// Per-u quadratic forms q_u(ell) = u^T D(ell / N) u with their estimator variances.
struct Forms {
  std::vector<std::vector<double>> q;
  std::vector<std::vector<double>> var;
};

/// Full matrix curve from the forms when the u list is e_i, e_i + e_j.
DiffusionCurve assemble_curve(const RunConfig& cfg, const Forms& forms, int n, CurveMethod method,
                              std::uint64_t seed) {
  const int dim = cfg.dim;
  if (cfg.drift_directions() != polarization_directions(dim))
    throw ConfigError(0, "u list must be e_i followed by e_i + e_j to assemble the full matrix");
  DiffusionCurve curve;
  curve.num_sites = n;
  curve.method = method;
  curve.seed = seed;
  for (int ell = 0; ell <= n; ++ell) {
    std::vector<double> q;
    std::vector<double> v;
    for (std::size_t j = 0; j < forms.q.size(); ++j) {
      q.push_back(forms.q[j][static_cast<std::size_t>(ell)]);
      v.push_back(forms.var[j][static_cast<std::size_t>(ell)]);
    }
    CurveNode node;
    node.ell = ell;
    node.D = assemble_from_polarization(dim, q);
    // off-diagonal variance ignores covariances between the forms
    node.variance = SymMatrix(dim);
    for (int i = 0; i < dim; ++i) node.variance.set(i, i, v[static_cast<std::size_t>(i)]);
    std::size_t p = static_cast<std::size_t>(dim);
    for (int i = 0; i < dim; ++i)
      for (int k = i + 1; k < dim; ++k, ++p)
        node.variance.set(i, k, 0.25 * (v[p] + v[static_cast<std::size_t>(i)] + v[static_cast<std::size_t>(k)]));
    curve.nodes.push_back(node);
  }
  return curve;
}

void write_forms(const fs::path& path, const RunConfig& cfg, const Forms& forms, int n) {
  std::ofstream os(path);
  for (const auto& line : cfg.to_lines()) os << "# " << line << '\n';
  os << "u_index\tu\tell\trho\tq\tvar\n";
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  const auto us = cfg.drift_directions();
  for (std::size_t j = 0; j < forms.q.size(); ++j)
    for (int ell = 0; ell <= n; ++ell)
      os << j << '\t' << join_reals(us[j]) << '\t' << ell << '\t' << static_cast<double>(ell) / n << '\t'
         << forms.q[j][static_cast<std::size_t>(ell)] << '\t' << forms.var[j][static_cast<std::size_t>(ell)] << '\n';
}

Forms evaluate_forms(const RunConfig& cfg, std::uint64_t seed) {
  const auto us = cfg.drift_directions();
  const Grid grid = cfg.grid();
  const int n = grid.size();
  Forms forms;
  for (std::size_t j = 0; j < us.size(); ++j) {
    std::ifstream is(phi_path(cfg, j));
    if (!is) throw ConfigError(0, "missing checkpoint " + phi_path(cfg, j).string() + " (run solve first)");
    const LowRankFunction phi = read_lowrank(is);
    const ObjectiveContext ctx(cfg.model(), grid, us[j]);
    if (phi.num_sites() != n) throw ConfigError(0, "checkpoint " + phi_path(cfg, j).string() + " has the wrong size");
    std::vector<double> q(static_cast<std::size_t>(n + 1));
    std::vector<double> var(static_cast<std::size_t>(n + 1), 0.0);
    for (int ell = 0; ell <= n; ++ell) {
      if (binomial(n, ell) <= cfg.exact_limit) {
        q[static_cast<std::size_t>(ell)] = 2.0 * eval_A_ell_exact(ctx, phi, ell, cfg.exact_limit);
      } else {
        Rng rng = make_rng(seed, "stratified", {j, static_cast<std::uint64_t>(ell)});
        const auto est = stratified_mc(ctx, phi, ell, cfg.ntilde, rng, cfg.threads);
        q[static_cast<std::size_t>(ell)] = 2.0 * est.value;
        var[static_cast<std::size_t>(ell)] = 4.0 * est.variance;
      }
    }
    forms.q.push_back(std::move(q));
    forms.var.push_back(std::move(var));
  }
  return forms;
}

Forms kmc_forms(const RunConfig& cfg, std::uint64_t seed) {
  const KMCSystem sys(cfg.model(), cfg.grid());
  const int n = sys.num_sites();
  KMCParams params;
  params.T = cfg.T;
  params.nhat = cfg.nhat;
  params.us = cfg.drift_directions();
  params.threads = cfg.threads;
  Forms forms;
  forms.q.assign(params.us.size(), std::vector<double>(static_cast<std::size_t>(n + 1)));
  forms.var.assign(params.us.size(), std::vector<double>(static_cast<std::size_t>(n + 1)));
  for (int ell = 0; ell <= n; ++ell) {
    const auto est = kmc_estimate(sys, ell, params, seed);
    for (std::size_t j = 0; j < params.us.size(); ++j) {
      forms.q[j][static_cast<std::size_t>(ell)] = 2.0 * est.alpha[j];
      forms.var[j][static_cast<std::size_t>(ell)] = 4.0 * est.stderr_alpha[j] * est.stderr_alpha[j];
    }
  }
  return forms;
}

std::uint64_t repeat_seed(const RunConfig& cfg, int r) {
  return cfg.repeats == 1 ? *cfg.seed : derive_seed(*cfg.seed, "repeat", {static_cast<std::uint64_t>(r)});
}

bool has_curve(const RunConfig& cfg) {
  return cfg.dim == 2 && cfg.drift_directions() == polarization_directions(cfg.dim);
}

/// Runs one route for every repeat. Writes the forms of the first repeat; with the full
/// u list also its curve and, for several repeats, the per-density variance of the
/// trace across repeats.
std::string run_route(const RunConfig& cfg, const std::string& tag, Forms (*make)(const RunConfig&, std::uint64_t),
                      CurveMethod method) {
  const int n = cfg.grid().size();
  std::vector<DiffusionCurve> curves;
  std::vector<double> walls;
  for (int r = 0; r < cfg.repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t seed = repeat_seed(cfg, r);
    const Forms forms = make(cfg, seed);
    walls.push_back(seconds_since(t0));
    if (r == 0) write_forms(cfg.out / ("forms_" + tag + ".tsv"), cfg, forms, n);
    if (!has_curve(cfg)) {
      json manifest;
      manifest["config"] = config_json(cfg);
      manifest["wall_seconds"] = walls;
      write_json(cfg.out / ("manifest_" + tag + ".json"), manifest);
      return tag + ": forms written (curve files need d = 2 and u = e_1, e_2, e_1 + e_2)";
    }
    curves.push_back(assemble_curve(cfg, forms, n, method, seed));
  }
  {
    std::ofstream os(cfg.out / ("curve_" + tag + ".tsv"));
    write_curve(os, curves.front(), cfg.to_lines());
  }
  json manifest;
  manifest["config"] = config_json(cfg);
  manifest["wall_seconds"] = walls;
  std::vector<double> averages;
  for (const auto& c : curves) averages.push_back(trace_average(c).trace);
  manifest["trace_average"] = averages;

  std::ostringstream summary;
  summary << tag << ": trace average " << std::setprecision(6) << averages.front();
  if (cfg.repeats > 1) {
    const int n = curves.front().num_sites;
    std::vector<double> var_tr(static_cast<std::size_t>(n + 1));
    for (int ell = 0; ell <= n; ++ell) {
      double s = 0.0;
      double ss = 0.0;
      for (const auto& c : curves) {
        const double t = c.nodes[static_cast<std::size_t>(ell)].D.trace();
        s += t;
        ss += t * t;
      }
      const double m = static_cast<double>(curves.size());
      var_tr[static_cast<std::size_t>(ell)] = std::max(0.0, (ss - s * s / m) / (m - 1.0));
    }
    std::ofstream os(cfg.out / ("variance_" + tag + ".tsv"));
    for (const auto& line : cfg.to_lines()) os << "# " << line << '\n';
    os << "ell\trho\tvar_trace\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (int ell = 0; ell <= n; ++ell)
      os << ell << '\t' << static_cast<double>(ell) / n << '\t' << var_tr[static_cast<std::size_t>(ell)] << '\n';
    double mx = 0.0;
    double mean = 0.0;
    for (double v : var_tr) {
      mx = std::max(mx, v);
      mean += v;
    }
    mean /= static_cast<double>(var_tr.size());
    manifest["variance_trace_max"] = mx;
    manifest["variance_trace_mean"] = mean;
    summary << "; over " << cfg.repeats << " repeats Var(Tr D) max " << mx << " mean " << mean;
  }
  write_json(cfg.out / ("manifest_" + tag + ".json"), manifest);
  return summary.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// configuration

JumpModel RunConfig::model() const {
  if (directions.empty()) return JumpModel::nearest_neighbor(dim);
  std::vector<double> p = probabilities;
  if (p.empty()) p.assign(directions.size(), 1.0 / static_cast<double>(directions.size()));
  return JumpModel(dim, directions, p);
}

Grid RunConfig::grid() const {
  if (!torus.empty()) {
    if (static_cast<int>(torus.size()) != dim) throw ConfigError(0, "torus: need one side length per dimension");
    return Grid::torus(torus);
  }
  return Grid(dim, M);
}

std::vector<std::vector<double>> RunConfig::drift_directions() const {
  return us.empty() ? polarization_directions(dim) : us;
}

void RunConfig::validate() const {
  if (!seed) throw ConfigError(0, "seed is mandatory");
  if (dim < 1 || dim > kMaxDim) throw ConfigError(0, "dim must be 1, 2 or 3");
  if (M < 1) throw ConfigError(0, "M must be >= 1");
  if (rank < 1) throw ConfigError(0, "rank must be >= 1");
  if (!(eps > 0.0)) throw ConfigError(0, "eps must be positive");
  if (ntilde < 1) throw ConfigError(0, "ntilde must be >= 1");
  if (!(T > 0.0)) throw ConfigError(0, "T must be positive");
  if (nhat < 1) throw ConfigError(0, "nhat must be >= 1");
  if (threads < 1) throw ConfigError(0, "threads must be >= 1");
  if (repeats < 1) throw ConfigError(0, "repeats must be >= 1");
  if (!probabilities.empty() && probabilities.size() != directions.size())
    throw ConfigError(0, "probabilities: need one per direction");
  try {
    const JumpModel m = model();
    const Grid g = grid();
    g.require_compatible(m);
    if (max_updates < g.size()) throw ConfigError(0, "max_updates must be at least N");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(0, e.what());
  }
  for (const auto& u : drift_directions())
    if (static_cast<int>(u.size()) != dim) throw ConfigError(0, "u: every vector needs " + std::to_string(dim) + " entries");
}

std::vector<std::string> RunConfig::to_lines() const {
  std::vector<std::string> out;
  out.push_back("dim = " + std::to_string(dim));
  if (torus.empty()) {
    out.push_back("M = " + std::to_string(M));
  } else {
    std::string t;
    for (std::size_t i = 0; i < torus.size(); ++i) t += (i ? "," : "") + std::to_string(torus[i]);
    out.push_back("torus = " + t);
  }
  if (!directions.empty()) {
    std::string d;
    for (std::size_t k = 0; k < directions.size(); ++k) {
      if (k) d += "; ";
      for (int i = 0; i < dim; ++i) d += (i ? "," : "") + std::to_string(directions[k][i]);
    }
    out.push_back("directions = " + d);
    if (!probabilities.empty()) out.push_back("probabilities = " + join_reals(probabilities));
  }
  const auto real = shortest;
  out.push_back("route = " + route_name(route));
  out.push_back("rank = " + std::to_string(rank));
  out.push_back("eps = " + real(eps));
  out.push_back("max_updates = " + std::to_string(max_updates));
  out.push_back("ntilde = " + std::to_string(ntilde));
  out.push_back("exact_limit = " + std::to_string(exact_limit));
  out.push_back("T = " + real(T));
  out.push_back("nhat = " + std::to_string(nhat));
  std::string u;
  const auto dirs = drift_directions();
  for (std::size_t j = 0; j < dirs.size(); ++j) u += (j ? "; " : "") + join_reals(dirs[j]);
  out.push_back("u = " + u);
  if (seed) out.push_back("seed = " + std::to_string(*seed));
  out.push_back("out = " + this->out.string());
  out.push_back("threads = " + std::to_string(threads));
  out.push_back("indefinite_abort = " + std::to_string(indefinite_abort));
  out.push_back("repeats = " + std::to_string(repeats));
  return out;
}

std::vector<std::vector<double>> parse_vector_list(const std::string& text) {
  std::vector<std::vector<double>> out;
  for (const auto& item : split(text, ';')) {
    if (item.empty()) continue;
    std::vector<double> v;
    for (const auto& c : split(item, ',')) v.push_back(parse_real(c, 0, "vector"));
    out.push_back(std::move(v));
  }
  return out;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value, int line) {
  auto as_int = [&] { return parse_int(value, line, key); };
  if (key == "dim") cfg.dim = static_cast<int>(as_int());
  else if (key == "M") cfg.M = static_cast<int>(as_int());
  else if (key == "torus") {
    cfg.torus.clear();
    for (const auto& s : split(value, ',')) cfg.torus.push_back(static_cast<int>(parse_int(s, line, key)));
  } else if (key == "directions") {
    cfg.directions.clear();
    for (const auto& item : split(value, ';')) {
      if (item.empty()) continue;
      LatticeVector v{};
      const auto parts = split(item, ',');
      if (parts.size() > static_cast<std::size_t>(kMaxDim)) throw ConfigError(line, "directions: too many components");
      for (std::size_t i = 0; i < parts.size(); ++i) v[i] = static_cast<int>(parse_int(parts[i], line, key));
      cfg.directions.push_back(v);
    }
  } else if (key == "probabilities") {
    cfg.probabilities.clear();
    for (const auto& s : split(value, ',')) cfg.probabilities.push_back(parse_real(s, line, key));
  } else if (key == "route") {
    if (value == "min") cfg.route = Route::Min;
    else if (value == "kmc") cfg.route = Route::KMC;
    else if (value == "both") cfg.route = Route::Both;
    else throw ConfigError(line, "route: expected min, kmc or both");
  } else if (key == "rank") cfg.rank = static_cast<int>(as_int());
  else if (key == "eps") cfg.eps = parse_real(value, line, key);
  else if (key == "max_updates") cfg.max_updates = static_cast<int>(as_int());
  else if (key == "ntilde") cfg.ntilde = static_cast<int>(as_int());
  else if (key == "exact_limit") cfg.exact_limit = static_cast<std::uint64_t>(as_int());
  else if (key == "T") cfg.T = parse_real(value, line, key);
  else if (key == "nhat") cfg.nhat = static_cast<std::uint64_t>(as_int());
  else if (key == "u") {
    try {
      cfg.us = parse_vector_list(value);
    } catch (const ConfigError& e) {
      throw ConfigError(line, std::string("u: ") + e.what());
    }
  } else if (key == "seed") {
    const long long s = as_int();
    if (s < 0) throw ConfigError(line, "seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  } else if (key == "out") cfg.out = value;
  else if (key == "threads") cfg.threads = static_cast<int>(as_int());
  else if (key == "indefinite_abort") cfg.indefinite_abort = static_cast<int>(as_int());
  else if (key == "repeats") cfg.repeats = static_cast<int>(as_int());
  else throw ConfigError(line, "unknown key '" + key + "'");
}

RunConfig parse_config(std::istream& is) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) throw ConfigError(line, "missing key");
    if (!seen.insert(key).second) throw ConfigError(line, "duplicate key '" + key + "'");
    apply_setting(cfg, key, value, line);
  }
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(0, "cannot open config file " + path.string());
  return parse_config(is);
}

// ---------------------------------------------------------------------------
// commands

std::string cmd_solve(const RunConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out);
  const auto us = cfg.drift_directions();
  const Grid grid = cfg.grid();

  ALSConfig als;
  als.tolerance = cfg.eps;
  als.max_updates = cfg.max_updates;

  json manifest;
  manifest["config"] = config_json(cfg);
  json runs = json::array();
  std::ofstream trace(cfg.out / "solve_trace.tsv");
  for (const auto& line : cfg.to_lines()) trace << "# " << line << '\n';
  trace << "u_index\trank\tobjective\n" << std::setprecision(std::numeric_limits<double>::max_digits10);

  std::ostringstream summary;
  for (std::size_t j = 0; j < us.size(); ++j) {
    const ObjectiveContext ctx(cfg.model(), grid, us[j]);
    Rng rng = make_rng(*cfg.seed, "als", {j});
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = successive_minimize(ctx, cfg.rank, als, rng);
    const double wall = seconds_since(t0);

    json run;
    run["u"] = us[j];
    run["objective_by_rank"] = res.objective_by_rank;
    run["wall_seconds"] = wall;
    json reps = json::array();
    for (const auto& r : res.reports) {
      reps.push_back({{"initial_objective", r.initial_objective},
                      {"final_objective", r.final_objective},
                      {"sweep_objectives", r.sweep_objectives},
                      {"updates", r.updates},
                      {"indefinite", r.indefinite_count},
                      {"rejected", r.rejected_count},
                      {"converged", r.converged},
                      {"zero_fallback", r.zero_fallback},
                      {"wall_seconds", r.wall_seconds}});
    }
    run["reports"] = reps;
    runs.push_back(run);

    for (std::size_t k = 0; k < res.objective_by_rank.size(); ++k)
      trace << j << '\t' << k << '\t' << res.objective_by_rank[k] << '\n';
    std::ofstream os(phi_path(cfg, j));
    auto header = cfg.to_lines();
    header.push_back("u_index = " + std::to_string(j));
    write_lowrank(os, res.phi, header);
    summary << "u=(" << join_reals(us[j]) << ") A=" << std::setprecision(10) << res.objective_by_rank.back() << " ("
            << wall << " s)\n";

    if (cfg.indefinite_abort >= 0)
      for (const auto& r : res.reports)
        if (r.indefinite_count > cfg.indefinite_abort) {
          manifest["runs"] = runs;
          write_json(cfg.out / "manifest_solve.json", manifest);
          throw RunAborted("ALS met " + std::to_string(r.indefinite_count) + " indefinite systems (limit " +
                           std::to_string(cfg.indefinite_abort) + ")");
        }
  }
  manifest["runs"] = runs;
  write_json(cfg.out / "manifest_solve.json", manifest);
  return summary.str();
}

DiffusionCurve evaluate_curve(const RunConfig& cfg, std::uint64_t seed, double* wall_seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  const Forms forms = evaluate_forms(cfg, seed);
  const int n = cfg.grid().size();
  if (wall_seconds) *wall_seconds = seconds_since(t0);
  return assemble_curve(cfg, forms, n, CurveMethod::Minimization, seed);
}

DiffusionCurve kmc_curve(const RunConfig& cfg, std::uint64_t seed, double* wall_seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  const Forms forms = kmc_forms(cfg, seed);
  const int n = cfg.grid().size();
  if (wall_seconds) *wall_seconds = seconds_since(t0);
  return assemble_curve(cfg, forms, n, CurveMethod::KMC, seed);
}

std::string cmd_evaluate(const RunConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out);
  return run_route(cfg, "min", &evaluate_forms, CurveMethod::Minimization);
}

std::string cmd_kmc(const RunConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out);
  return run_route(cfg, "kmc", &kmc_forms, CurveMethod::KMC);
}

std::string cmd_compare(const RunConfig& cfg) {
  auto load = [&](const std::string& tag) {
    std::ifstream is(cfg.out / ("curve_" + tag + ".tsv"));
    if (!is) throw ConfigError(0, "missing " + (cfg.out / ("curve_" + tag + ".tsv")).string());
    return read_curve(is);
  };
  const DiffusionCurve a = load("min");
  const DiffusionCurve b = load("kmc");
  if (a.num_sites != b.num_sites || !a.complete() || !b.complete())
    throw ConfigError(0, "compare: curves are for different grids or incomplete");

  std::ofstream os(cfg.out / "compare.tsv");
  for (const auto& line : cfg.to_lines()) os << "# " << line << '\n';
  os << "ell\trho\ttrace_min\ttrace_kmc\tdifference\tvar_trace_min\tvar_trace_kmc\n";
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  json summary;
  auto stats = [](const DiffusionCurve& c) {
    double mx = 0.0;
    double mean = 0.0;
    for (const auto& node : c.nodes) {
      const double v = node.variance.trace();
      mx = std::max(mx, v);
      mean += v;
    }
    return std::pair{mx, mean / static_cast<double>(c.nodes.size())};
  };
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    const auto& x = a.nodes[i];
    const auto& y = b.nodes[i];
    os << x.ell << '\t' << static_cast<double>(x.ell) / a.num_sites << '\t' << x.D.trace() << '\t' << y.D.trace() << '\t'
       << x.D.trace() - y.D.trace() << '\t' << x.variance.trace() << '\t' << y.variance.trace() << '\n';
  }
  const auto [amax, amean] = stats(a);
  const auto [bmax, bmean] = stats(b);
  summary["config"] = config_json(cfg);
  summary["trace_average_min"] = trace_average(a).trace;
  summary["trace_average_kmc"] = trace_average(b).trace;
  summary["estimator_variance_trace_min"] = {{"max", amax}, {"mean", amean}};
  summary["estimator_variance_trace_kmc"] = {{"max", bmax}, {"mean", bmean}};
  for (const std::string tag : {"min", "kmc"}) {
    std::ifstream is(cfg.out / ("manifest_" + tag + ".json"));
    if (is) summary["manifest_" + tag] = json::parse(is);
  }
  write_json(cfg.out / "compare.json", summary);

  std::ostringstream out;
  out << std::setprecision(6) << "trace average: min " << trace_average(a).trace << ", kmc " << trace_average(b).trace
      << "\nestimator Var(Tr D): min max " << amax << " mean " << amean << "; kmc max " << bmax << " mean " << bmean;
  return out.str();
}

std::string cmd_oracle(const RunConfig& cfg) {
  cfg.validate();
  const Grid grid = cfg.grid();
  if (grid.size() > 12) throw ConfigError(0, "oracle: needs N <= 12");
  fs::create_directories(cfg.out);
  const auto us = cfg.drift_directions();
  const int n = grid.size();

  ALSConfig als;
  als.tolerance = cfg.eps;
  als.max_updates = cfg.max_updates;

  Forms forms;
  json runs = json::array();
  std::ostringstream summary;
  for (std::size_t j = 0; j < us.size(); ++j) {
    const ObjectiveContext ctx(cfg.model(), grid, us[j]);
    const auto t0 = std::chrono::steady_clock::now();
    const auto dense = dense_minimize(ctx);
    const double dense_wall = seconds_since(t0);
    const auto per_ell = eval_A_ell_direct(ctx, dense.table);
    std::vector<double> q;
    for (double a : per_ell) q.push_back(2.0 * a);
    forms.q.push_back(q);
    forms.var.emplace_back(q.size(), 0.0);

    Rng rng = make_rng(*cfg.seed, "als", {j});
    const auto res = successive_minimize(ctx, cfg.rank, als, rng);
    std::vector<double> gaps;
    for (std::size_t k = 1; k < res.objective_by_rank.size(); ++k)
      gaps.push_back(res.objective_by_rank[k] / dense.objective - 1.0);
    runs.push_back({{"u", us[j]},
                    {"dense_objective", dense.objective},
                    {"dense_wall_seconds", dense_wall},
                    {"objective_by_rank", res.objective_by_rank},
                    {"relative_gap_by_rank", gaps}});
    summary << "u=(" << join_reals(us[j]) << ") dense A=" << std::setprecision(10) << dense.objective
            << ", rank-" << cfg.rank << " gap " << std::setprecision(4) << gaps.back() << '\n';
  }
  write_forms(cfg.out / "forms_dense.tsv", cfg, forms, n);
  if (cfg.dim == 2 && us == polarization_directions(cfg.dim)) {
    const auto curve = assemble_curve(cfg, forms, n, CurveMethod::Minimization, *cfg.seed);
    std::ofstream os(cfg.out / "curve_dense.tsv");
    auto header = cfg.to_lines();
    header.push_back("source = dense minimizer");
    write_curve(os, curve, header);
    summary << "trace average " << std::setprecision(8) << trace_average(curve).trace << '\n';
  }
  json manifest;
  manifest["config"] = config_json(cfg);
  manifest["runs"] = runs;
  write_json(cfg.out / "manifest_oracle.json", manifest);
  return summary.str();
}

}  // namespace selfdiff
