#include "cli.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "zeno/bands.hpp"
#include "zeno/decay.hpp"
#include "zeno/effective.hpp"
#include "zeno/flat_states.hpp"
#include "zeno/io.hpp"
#include "zeno/kmc.hpp"
#include "zeno/lindblad.hpp"
#include "zeno/mcwf.hpp"
#include "zeno/parallel.hpp"
#include "zeno/scattering.hpp"

namespace zeno::cli {
namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Lattice {
  int sites = 12;
  int R = 3;
  std::string boundary = "periodic";
  LatticeSpec spec() const {
    LatticeSpec s{sites, R, parse_boundary(boundary)};
    s.validate();
    return s;
  }
};

void add_lattice(CLI::App* app, Lattice& l) {
  app->add_option("--sites", l.sites, "number of lattice sites")->capture_default_str();
  app->add_option("--R", l.R, "critical loss distance")->capture_default_str();
  app->add_option("--boundary", l.boundary, "periodic or open")
      ->check(CLI::IsMember({"periodic", "open"}))
      ->capture_default_str();
}

std::string num(double x) { return format_number(x); }

Metadata base_metadata(const std::string& sub) {
  return {{"program", "zeno-sim"}, {"version", kVersion}, {"subcommand", sub}};
}

void add_lattice_meta(Metadata& m, const Lattice& l) {
  m.emplace_back("sites", std::to_string(l.sites));
  m.emplace_back("R", std::to_string(l.R));
  m.emplace_back("boundary", l.boundary);
}

json metadata_json(const Metadata& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[k] = v;
  return j;
}

void emit_csv(const CsvTable& t, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-")
    write_csv(out, t);
  else
    write_csv_file(path, t);
}

void emit_json(const json& doc, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-")
    out << doc.dump(2) << '\n';
  else
    write_json_file(path, doc);
}

// mott | flat-I:j | flat-II:j | file:PATH | config:BITSTRING
StateVector parse_initial(const std::string& text, const LatticeSpec& spec) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  auto anchor = [&]() {
    try {
      std::size_t used = 0;
      const int a = std::stoi(arg, &used);
      if (used != arg.size()) throw std::invalid_argument("");
      return a;
    } catch (const std::exception&) {
      throw UsageError("initial state '" + text + "' needs an integer anchor");
    }
  };
  StateVector psi;
  if (head == "mott" && arg.empty()) {
    psi = StateVector::basis_state(FockConfiguration::mott(spec.n_sites));
  } else if (head == "flat-I") {
    psi = make_flat_state_I(spec, anchor());
  } else if (head == "flat-II") {
    psi = make_flat_state_II(spec, anchor());
  } else if (head == "file") {
    psi = read_state_file(arg);
    psi.normalize();
  } else if (head == "config") {
    psi = StateVector::basis_state(FockConfiguration::from_string(arg));
  } else {
    throw UsageError("unknown initial state '" + text + "'");
  }
  if (psi.n_sites != spec.n_sites)
    throw UsageError("initial state has " + std::to_string(psi.n_sites) + " sites, lattice has " +
                     std::to_string(spec.n_sites));
  return psi;
}

bool single_sector(const StateVector& psi) {
  const int m = std::popcount(psi.codes.front());
  return std::all_of(psi.codes.begin(), psi.codes.end(),
                     [m](Code c) { return std::popcount(c) == m; });
}

// ---------------------------------------------------------------------------

struct DecayCmd {
  double gamma = 1.0, tmax = 5.0;
  int points = 101, kmax = 20;
  std::string out;
};

int run_decay(const DecayCmd& c, std::ostream& out) {
  if (c.points < 2) throw UsageError("--points must be at least 2");
  const auto grid = uniform_grid(c.tmax, c.points);
  DecayParams p;
  p.gamma = c.gamma;
  p.t_max = c.tmax;
  p.truncation_order = c.kmax;
  const auto h = hierarchy_oracle(p, grid);
  CsvTable t;
  t.metadata = base_metadata("decay-analytic");
  t.metadata.emplace_back("gamma", num(c.gamma));
  t.metadata.emplace_back("tmax", num(c.tmax));
  t.metadata.emplace_back("points", std::to_string(c.points));
  t.metadata.emplace_back("truncation_order", std::to_string(c.kmax));
  t.header = {"t", "p_analytic", "p_hierarchy_k" + std::to_string(c.kmax)};
  for (std::size_t i = 0; i < grid.size(); ++i)
    t.rows.push_back({grid[i], mott_density(c.gamma, grid[i]), h.values[i][0]});
  emit_csv(t, c.out, out);
  return kExitOk;
}

struct KmcCmd {
  Lattice lat{200, 3, "periodic"};
  double gamma = 1.0, tmax = 5.0;
  int trajectories = 10000, points = 51, workers = 0;
  std::uint64_t seed = 1;
  std::string out;
};

Metadata kmc_metadata(const std::string& sub, const KmcCmd& c) {
  Metadata m = base_metadata(sub);
  add_lattice_meta(m, c.lat);
  m.emplace_back("gamma", num(c.gamma));
  m.emplace_back("trajectories", std::to_string(c.trajectories));
  m.emplace_back("seed", std::to_string(c.seed));
  return m;
}

int run_kmc(const KmcCmd& c, std::ostream& out) {
  if (c.points < 2) throw UsageError("--points must be at least 2");
  if (c.trajectories < 1) throw UsageError("--trajectories must be positive");
  const auto grid = uniform_grid(c.tmax, c.points);
  const auto s = ensemble_density(c.lat.spec(), c.gamma, c.trajectories, grid, c.seed, {}, c.workers);
  CsvTable t;
  t.metadata = kmc_metadata("kmc", c);
  t.metadata.emplace_back("tmax", num(c.tmax));
  t.metadata.emplace_back("points", std::to_string(c.points));
  t.header = {"t", "p_mean", "p_stderr"};
  for (std::size_t i = 0; i < grid.size(); ++i)
    t.rows.push_back({grid[i], s.total_density[i], s.total_stderr[i]});
  emit_csv(t, c.out, out);
  return kExitOk;
}

int run_kmc_stats(const KmcCmd& c, std::ostream& out) {
  if (c.trajectories < 1) throw UsageError("--trajectories must be positive");
  const auto st = stationary_statistics(c.lat.spec(), c.gamma, c.trajectories, c.seed, {}, c.workers);
  json doc;
  doc["metadata"] = metadata_json(kmc_metadata("kmc-stats", c));
  json hist = json::object(), bos = json::object();
  for (auto [k, v] : st.species_fraction) hist[std::string(to_string(k))] = v;
  for (auto [k, v] : st.boson_fraction) bos[std::string(to_string(k))] = v;
  doc["species_histogram"] = hist;
  doc["boson_fraction"] = bos;
  json sizes = json::array();
  for (const auto& [key, v] : st.size_distribution)
    sizes.push_back({{"kind", std::string(to_string(key.first))}, {"bosons", key.second}, {"fraction", v}});
  doc["size_distribution"] = sizes;
  doc["stationary_density"] = st.mean_density;
  doc["stationary_density_stderr"] = st.density_stderr;
  doc["total_complexes"] = st.total_complexes;
  emit_json(doc, c.out, out);
  return kExitOk;
}

struct EvolveCmd {
  Lattice lat{8, 3, "periodic"};
  double gamma = 10.0, J = 1.0, V = 0.0, tmax = 5.0;
  int points = 101, trajectories = 2000, workers = 0;
  std::uint64_t seed = 1;
  std::string initial = "mott", method = "exact", out;
};

int run_evolve(const EvolveCmd& c, std::ostream& out) {
  if (c.points < 2) throw UsageError("--points must be at least 2");
  const LatticeSpec spec = c.lat.spec();
  const StateVector psi = parse_initial(c.initial, spec);
  const ModelParams params{spec, c.J, c.gamma, c.V};
  const auto grid = uniform_grid(c.tmax, c.points);
  CsvTable t;
  t.metadata = base_metadata("evolve");
  add_lattice_meta(t.metadata, c.lat);
  for (auto [k, v] : {std::pair{"gamma", c.gamma}, {"J", c.J}, {"V", c.V}, {"tmax", c.tmax}})
    t.metadata.emplace_back(k, num(v));
  t.metadata.emplace_back("points", std::to_string(c.points));
  t.metadata.emplace_back("initial", c.initial);
  t.metadata.emplace_back("method", c.method);
  if (c.method == "exact") {
    const MasterResult r = single_sector(psi) ? integrate_master(params, psi, grid)
                                              : integrate_master(params, DensityMatrix::pure(psi), grid);
    t.rows = series_table(r.series, {}).rows;
    t.header = series_table(r.series, {}).header;
  } else {
    if (!single_sector(psi)) throw UsageError("mcwf needs an initial state with a fixed boson number");
    McwfOptions o;
    o.workers = c.workers;
    t.metadata.emplace_back("trajectories", std::to_string(c.trajectories));
    t.metadata.emplace_back("seed", std::to_string(c.seed));
    const McwfResult r = run_mcwf(params, psi, grid, c.trajectories, c.seed, o);
    const CsvTable s = series_table(r.series, {});
    t.header = s.header;
    t.header.push_back("p_stderr");
    t.rows = s.rows;
    for (std::size_t i = 0; i < t.rows.size(); ++i) t.rows[i].push_back(r.series.total_stderr[i]);
  }
  emit_csv(t, c.out, out);
  return kExitOk;
}

struct EffectiveCmd {
  Lattice lat{10, 3, "periodic"};
  double gamma = 100.0, J = 1.0, V = 0.0, tmax = 5.0;
  int points = 101;
  std::string initial = "config:1100000000", out;
};

int run_effective(const EffectiveCmd& c, std::ostream& out) {
  if (c.points < 2) throw UsageError("--points must be at least 2");
  const LatticeSpec spec = c.lat.spec();
  if (spec.boundary != Boundary::periodic) throw UsageError("effective-compare needs a periodic lattice");
  const StateVector psi = parse_initial(c.initial, spec);
  for (Code code : psi.codes)
    if (!is_zeno_code(code, spec)) throw UsageError("effective-compare needs an initial state in the Zeno subspace");
  int max_bosons = 0;
  for (Code code : psi.codes) max_bosons = std::max(max_bosons, std::popcount(code));
  const ModelParams params{spec, c.J, c.gamma, c.V};
  const auto grid = uniform_grid(c.tmax, c.points);
  const MasterResult full = single_sector(psi) ? integrate_master(params, psi, grid)
                                               : integrate_master(params, DensityMatrix::pure(psi), grid);
  const EffectiveModel model = build_effective_model(params, max_bosons);
  const MasterResult eff = integrate_effective(model, psi, grid);

  CsvTable t;
  t.metadata = base_metadata("effective-compare");
  add_lattice_meta(t.metadata, c.lat);
  for (auto [k, v] : {std::pair{"gamma", c.gamma}, {"J", c.J}, {"V", c.V}, {"tmax", c.tmax},
                      {"Gamma", model.Gamma}})
    t.metadata.emplace_back(k, num(v));
  t.metadata.emplace_back("points", std::to_string(c.points));
  t.metadata.emplace_back("initial", c.initial);
  const int n = spec.n_sites;
  t.header.push_back("t");
  for (const char* pre : {"full_n_", "eff_n_", "diff_n_"})
    for (int j = 0; j < n; ++j) t.header.push_back(pre + std::to_string(j));
  for (const char* col : {"full_p", "eff_p", "diff_p", "max_abs_diff"}) t.header.push_back(col);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& a = full.series.site_density[i];
    const auto& b = eff.series.site_density[i];
    std::vector<double> row{grid[i]};
    row.insert(row.end(), a.begin(), a.end());
    row.insert(row.end(), b.begin(), b.end());
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
      const double d = a[static_cast<std::size_t>(j)] - b[static_cast<std::size_t>(j)];
      row.push_back(d);
      worst = std::max(worst, std::abs(d));
    }
    const double pf = full.series.total_density[i], pe = eff.series.total_density[i];
    row.insert(row.end(), {pf, pe, pf - pe, worst});
    t.rows.push_back(std::move(row));
  }
  emit_csv(t, c.out, out);
  return kExitOk;
}

struct BandsCmd {
  int bosons = 2, R = 3, qpoints = 256;
  double J = 1.0, V = 0.0;
  std::string kind = "auto", out;
};

int run_bands(const BandsCmd& c, std::ostream& out) {
  if (c.qpoints < 1) throw UsageError("--qpoints must be positive");
  const KindRequest kind = c.kind == "I" ? KindRequest::type_one
                         : c.kind == "II" ? KindRequest::type_two
                                          : KindRequest::automatic;
  const InternalBasis basis = enumerate_internal_states(c.R, c.bosons, kind);
  const BandStructure b = compute_bands(build_bloch_matrix(basis, c.J, c.V), c.qpoints);
  json doc = band_structure_json(b, basis);
  Metadata m = base_metadata("bands");
  m.emplace_back("bosons", std::to_string(c.bosons));
  m.emplace_back("R", std::to_string(c.R));
  m.emplace_back("kind", std::string(to_string(basis.kind)));
  m.emplace_back("J", num(c.J));
  m.emplace_back("V", num(c.V));
  m.emplace_back("qpoints", std::to_string(c.qpoints));
  doc["metadata"] = metadata_json(m);
  emit_json(doc, c.out, out);
  return kExitOk;
}

struct ScatterCmd {
  Lattice lat{24, 2, "open"};
  double gamma = 100.0, J = 1.0, q0 = std::numbers::pi / 2, sigma = 2.0, j0 = 6.0, tmax = 10.0;
  int complex_pos = 16, complex_size = 2, points = 201;
  std::string method = "full", out;
};

int run_scatter(const ScatterCmd& c, std::ostream& out) {
  if (c.points < 2) throw UsageError("--points must be at least 2");
  CollisionSetup s;
  s.spec = c.lat.spec();
  s.J = c.J;
  s.gamma = c.gamma;
  s.j0 = c.j0;
  s.q0 = c.q0;
  s.sigma = c.sigma;
  if (c.complex_pos >= 0)
    for (int k = 0; k < c.complex_size; ++k) s.complex_sites.push_back(c.complex_pos + k);
  s.method = c.method == "zeno" ? CollisionMethod::zeno : CollisionMethod::full;
  const auto grid = uniform_grid(c.tmax, c.points);
  const CollisionReport r = run_collision(s, grid);

  CsvTable t;
  t.metadata = base_metadata("scatter");
  add_lattice_meta(t.metadata, c.lat);
  for (auto [k, v] : {std::pair{"gamma", c.gamma}, {"J", c.J}, {"q0", c.q0}, {"sigma", c.sigma},
                      {"packet_center", c.j0}, {"tmax", c.tmax}})
    t.metadata.emplace_back(k, num(v));
  t.metadata.emplace_back("complex_pos", std::to_string(c.complex_pos));
  t.metadata.emplace_back("complex_size", std::to_string(c.complex_size));
  t.metadata.emplace_back("method", c.method);
  for (auto [k, v] : {std::pair{"q_in", r.q_in}, {"q_out", r.q_out},
                      {"reflected_weight", r.reflected_weight},
                      {"transmitted_weight", r.transmitted_weight},
                      {"max_displacement", r.max_displacement}, {"window_start", r.window_start},
                      {"window_end", r.window_end}})
    t.metadata.emplace_back(k, num(v));
  const int n = s.spec.n_sites;
  t.header.push_back("t");
  for (int j = 0; j < n; ++j) t.header.push_back("n_" + std::to_string(j));
  for (const char* col : {"reflected", "transmitted", "survival", "momentum", "complex_centroid", "p"})
    t.header.push_back(col);
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    std::vector<double> row{r.times[i]};
    row.insert(row.end(), r.site_density[i].begin(), r.site_density[i].end());
    row.insert(row.end(), {r.reflected[i], r.transmitted[i], r.survival[i], r.momentum[i],
                           r.complex_centroid[i], r.total_density[i]});
    t.rows.push_back(std::move(row));
  }
  emit_csv(t, c.out, out);
  return kExitOk;
}

struct ValidateCmd {
  int trajectories = 1000, workers = 0;
  std::uint64_t seed = 7;
};

int run_validate(const ValidateCmd& c, std::ostream& out) {
  bool ok = true;
  auto report = [&](const std::string& name, bool pass, double value, double tol) {
    ok = ok && pass;
    out << (pass ? "PASS " : "FAIL ") << name << " value=" << num(value) << " tol=" << num(tol) << '\n';
  };

  for (auto [n, r] : {std::pair{8, 3}, {10, 4}, {12, 3}}) {
    const ModelParams p{{n, r, Boundary::periodic}, 1.0, 1.0, 0.0};
    const auto checks = verify_dissipator_spectrum(p, default_dissipator_samples(p.spec));
    double worst = 0.0;
    for (const auto& ch : checks) worst = std::max({worst, ch.residual, ch.transfer});
    report("dissipator-spectrum N=" + std::to_string(n) + " R=" + std::to_string(r), worst < 1e-12,
           worst, 1e-12);
  }

  struct Case {
    int m, R;
    KindRequest kind;
    int n;
  };
  for (const Case& cs : {Case{2, 3, KindRequest::type_one, 12}, Case{2, 4, KindRequest::type_one, 12},
                         Case{4, 4, KindRequest::type_two, 16}}) {
    for (double V : {0.0, 1.0}) {
      const auto basis = enumerate_internal_states(cs.R, cs.m, cs.kind);
      const auto rep = bloch_vs_ring_oracle(basis, cs.n, 1.0, V);
      report("bloch-vs-ring m=" + std::to_string(cs.m) + " R=" + std::to_string(cs.R) +
                 " N=" + std::to_string(cs.n) + " V=" + num(V),
             rep.pass, rep.max_residual, 1e-9);
    }
  }

  const ModelParams p{{8, 3, Boundary::periodic}, 1.0, 10.0, 0.0};
  const auto psi = StateVector::basis_state(FockConfiguration::mott(8));
  const auto grid = uniform_grid(1.0, 11);
  const auto exact = integrate_master(p, psi, grid);
  McwfOptions o;
  o.workers = c.workers;
  const auto mc = run_mcwf(p, psi, grid, c.trajectories, c.seed, o);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double se = std::max(mc.series.total_stderr[i], 1e-12);
    worst = std::max(worst, std::abs(mc.series.total_density[i] - exact.series.total_density[i]) / se);
  }
  report("unraveling-equivalence N=8 R=3 (stderr units)", worst < 3.0, worst, 3.0);
  return ok ? kExitOk : kExitNumerical;
}

int run_zeno_dim(const Lattice& l, std::ostream& out) {
  out << count_zeno_states(l.spec()) << '\n';
  return kExitOk;
}

}  // namespace

std::vector<std::string> merge_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a path");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return rest;
  std::ifstream f(path);
  if (!f) throw UsageError("cannot open config file " + path);
  auto given = [&](const std::string& key) {
    return std::any_of(rest.begin(), rest.end(), [&](const std::string& a) {
      return a == "--" + key || a.rfind("--" + key + "=", 0) == 0;
    });
  };
  auto trim = [](const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (key.empty()) throw UsageError(path + ":" + std::to_string(lineno) + ": empty key");
    if (!given(key)) {
      rest.push_back("--" + key);
      rest.push_back(value);
    }
  }
  return rest;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hard-core bosons with distance-selective pair loss"};
  app.name("zeno-sim");
  app.require_subcommand(1);
  app.add_option("--config", "flat key = value file; command-line flags take precedence");

  DecayCmd decay;
  auto* sd = app.add_subcommand("decay-analytic", "closed-form Mott decay and the correlator hierarchy");
  sd->add_option("--gamma", decay.gamma)->capture_default_str();
  sd->add_option("--tmax", decay.tmax)->capture_default_str();
  sd->add_option("--points", decay.points)->capture_default_str();
  sd->add_option("--kmax", decay.kmax, "hierarchy truncation order")->capture_default_str();
  sd->add_option("--out", decay.out, "output CSV (stdout if omitted)");

  KmcCmd kmc;
  auto add_kmc = [&](CLI::App* s, bool series) {
    add_lattice(s, kmc.lat);
    s->add_option("--gamma", kmc.gamma)->capture_default_str();
    s->add_option("--trajectories", kmc.trajectories)->capture_default_str();
    s->add_option("--seed", kmc.seed)->capture_default_str();
    s->add_option("--workers", kmc.workers, "worker threads (0: ZENO_WORKERS or hardware)");
    s->add_option("--out", kmc.out);
    if (series) {
      s->add_option("--tmax", kmc.tmax)->capture_default_str();
      s->add_option("--points", kmc.points)->capture_default_str();
    }
  };
  auto* sk = app.add_subcommand("kmc", "ensemble density of the classical loss process");
  add_kmc(sk, true);
  auto* sks = app.add_subcommand("kmc-stats", "species statistics of the stationary states");
  add_kmc(sks, false);

  EvolveCmd ev;
  auto* se = app.add_subcommand("evolve", "master-equation evolution");
  add_lattice(se, ev.lat);
  se->add_option("--gamma", ev.gamma)->capture_default_str();
  se->add_option("--J", ev.J)->capture_default_str();
  se->add_option("--V", ev.V)->capture_default_str();
  se->add_option("--initial", ev.initial, "mott | flat-I:j | flat-II:j | file:PATH | config:BITS")
      ->capture_default_str();
  se->add_option("--method", ev.method)->check(CLI::IsMember({"exact", "mcwf"}))->capture_default_str();
  se->add_option("--trajectories", ev.trajectories)->capture_default_str();
  se->add_option("--seed", ev.seed)->capture_default_str();
  se->add_option("--workers", ev.workers);
  se->add_option("--tmax", ev.tmax)->capture_default_str();
  se->add_option("--points", ev.points)->capture_default_str();
  se->add_option("--out", ev.out);

  EffectiveCmd ef;
  auto* sf = app.add_subcommand("effective-compare", "effective Zeno equation against the full model");
  add_lattice(sf, ef.lat);
  sf->add_option("--gamma", ef.gamma)->capture_default_str();
  sf->add_option("--J", ef.J)->capture_default_str();
  sf->add_option("--V", ef.V)->capture_default_str();
  sf->add_option("--initial", ef.initial)->capture_default_str();
  sf->add_option("--tmax", ef.tmax)->capture_default_str();
  sf->add_option("--points", ef.points)->capture_default_str();
  sf->add_option("--out", ef.out);

  BandsCmd bd;
  auto* sb = app.add_subcommand("bands", "Bloch bands of a bound complex");
  sb->add_option("--bosons", bd.bosons)->capture_default_str();
  sb->add_option("--R", bd.R)->capture_default_str();
  sb->add_option("--kind", bd.kind)->check(CLI::IsMember({"I", "II", "auto"}))->capture_default_str();
  sb->add_option("--J", bd.J)->capture_default_str();
  sb->add_option("--V", bd.V)->capture_default_str();
  sb->add_option("--qpoints", bd.qpoints)->capture_default_str();
  sb->add_option("--out", bd.out, "output JSON (stdout if omitted)");

  ScatterCmd sc;
  auto* ss = app.add_subcommand("scatter", "wave packet hitting an immobile complex");
  add_lattice(ss, sc.lat);
  ss->add_option("--gamma", sc.gamma)->capture_default_str();
  ss->add_option("--J", sc.J)->capture_default_str();
  ss->add_option("--q0", sc.q0)->capture_default_str();
  ss->add_option("--sigma", sc.sigma)->capture_default_str();
  ss->add_option("--packet-center", sc.j0)->capture_default_str();
  ss->add_option("--complex-pos", sc.complex_pos, "leftmost complex site (-1: no complex)")
      ->capture_default_str();
  ss->add_option("--complex-size", sc.complex_size)->capture_default_str();
  ss->add_option("--method", sc.method)->check(CLI::IsMember({"full", "zeno"}))->capture_default_str();
  ss->add_option("--tmax", sc.tmax)->capture_default_str();
  ss->add_option("--points", sc.points)->capture_default_str();
  ss->add_option("--out", sc.out);

  Lattice zd{6, 3, "periodic"};
  auto* sz = app.add_subcommand("zeno-dim", "number of loss-free configurations");
  add_lattice(sz, zd);

  ValidateCmd va;
  auto* sv = app.add_subcommand("validate", "dissipator, Bloch and unraveling oracles");
  sv->add_option("--trajectories", va.trajectories)->capture_default_str();
  sv->add_option("--seed", va.seed)->capture_default_str();
  sv->add_option("--workers", va.workers);

  try {
    std::vector<std::string> args = merge_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*sd) return run_decay(decay, out);
    if (*sk) return run_kmc(kmc, out);
    if (*sks) return run_kmc_stats(kmc, out);
    if (*se) return run_evolve(ev, out);
    if (*sf) return run_effective(ef, out);
    if (*sb) return run_bands(bd, out);
    if (*ss) return run_scatter(sc, out);
    if (*sz) return run_zeno_dim(zd, out);
    if (*sv) return run_validate(va, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace zeno::cli
