#include "cbh/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <variant>

#include <CLI11.hpp>

#include "cbh/bethe.hpp"
#include "cbh/dynamics.hpp"
#include "cbh/ed.hpp"
#include "cbh/observables.hpp"

#ifndef CBH_VERSION
#define CBH_VERSION "0.0.0"
#endif

namespace cbh {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::set<std::string> kCommands = {"spectrum", "doublon", "regions", "eigenstate", "evolve"};

using Cell = std::variant<double, long, std::string>;

struct Table {
  std::string stem;
  std::vector<std::string> header;  // "name[unit]"
  std::vector<std::vector<Cell>> rows;
};

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string cell_text(const Cell& c) {
  if (auto d = std::get_if<double>(&c)) return fmt(*d);
  if (auto l = std::get_if<long>(&c)) return std::to_string(*l);
  return std::get<std::string>(c);
}

json cell_json(const Cell& c) {
  if (auto d = std::get_if<double>(&c)) {
    if (!std::isfinite(*d)) return fmt(*d);
    return std::stod(fmt(*d));
  }
  if (auto l = std::get_if<long>(&c)) return *l;
  return std::get<std::string>(c);
}

std::string render(const Table& t, const std::string& format) {
  if (format == "json") {
    json arr = json::array();
    for (auto& r : t.rows) {
      json o = json::object();
      for (size_t i = 0; i < r.size(); ++i) o[t.header[i]] = cell_json(r[i]);
      arr.push_back(o);
    }
    return arr.dump(1) + "\n";
  }
  std::string out;
  for (size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + t.header[i];
  out += "\n";
  for (auto& r : t.rows) {
    for (size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + cell_text(r[i]);
    out += "\n";
  }
  return out;
}

// Work items pulled by a small thread pool; the first exception is rethrown.
void parallel_for(int count, const std::function<void(int)>& fn) {
  int workers = std::max(1, std::min<int>(count, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex m;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

std::vector<int> sectors(const RunConfig& c) {
  std::vector<int> rs;
  if (c.p_index) {
    rs.push_back(((*c.p_index % c.params.n) + c.params.n) % c.params.n);
  } else {
    for (int r = 0; r < c.params.n; ++r) rs.push_back(r);
  }
  return rs;
}

struct SectorState {
  TwoExcitationState state;
  double energy;
  std::string type, region;
  bool overlap = false;
};

// Analytic states in the symmetric case, exact diagonalization otherwise.
std::vector<SectorState> sector_states(const ModelParams& p, const HamiltonianMatrix& h, int r) {
  std::vector<SectorState> out;
  if (p.symmetric(1e-12)) {
    for (auto& a : solve_symmetric_sector(p, r))
      out.push_back({a.state, *a.state.energy, kind_name(a.kind), region_name(a.region), a.overlap});
  } else {
    for (auto& e : diagonalize_sector(h, r)) out.push_back({eigenstate(e, h.basis), e.energy, "ed", "", false});
  }
  return out;
}

Table spectrum_table(const RunConfig& c) {
  const auto& p = c.params;
  auto h = build_hamiltonian(p);
  auto rs = sectors(c);
  std::vector<std::vector<std::vector<Cell>>> parts(rs.size());
  parallel_for(static_cast<int>(rs.size()), [&](int i) {
    int r = rs[i];
    auto ed = diagonalize_sector(h, r);
    for (auto& s : sector_states(p, h, r)) {
      double gap = std::numeric_limits<double>::infinity();
      for (auto& e : ed) gap = std::min(gap, std::abs(e.energy - s.energy));
      parts[i].push_back({long(r), lattice_momentum(r, p.n), s.energy, s.type, s.region,
                          ipr(s.state), entanglement_entropy(s.state).S_total,
                          residual_max(p, s.state, s.energy), gap});
    }
  });
  Table t{"spectrum",
          {"P_index", "P[rad]", "energy[J]", "type", "region", "ipr[1]", "S[nats]", "residual[J]",
           "ed_deviation[J]"},
          {}};
  for (auto& part : parts)
    for (auto& row : part) t.rows.push_back(row);
  return t;
}

Table doublon_table(const RunConfig& c, std::ostream& log) {
  std::vector<double> grid;
  for (int j = 0; j < c.p_grid; ++j) grid.push_back(-kPi + 2 * kPi * j / c.p_grid);
  auto branches = doublon_branches(c.params, grid);
  Table t{"doublon",
          {"branch", "ordinal", "P[rad]", "energy[J]", "K[1/site]", "group_velocity[J]"},
          {}};
  for (auto& b : branches) {
    for (size_t i = 0; i < b.samples.size(); ++i)
      t.rows.push_back({std::string(branch_name(b.branch_id)), long(b.ordinal), b.samples[i].first,
                        b.samples[i].second, b.decay_constants[i], b.group_velocity[i]});
    if (!b.missing.empty())
      log << "branch " << branch_name(b.branch_id) << "/" << b.ordinal << " absent at "
          << b.missing.size() << " of " << grid.size() << " momenta\n";
  }
  return t;
}

Table regions_table(const RunConfig& c, std::ostream& log) {
  const auto& p = c.params;
  auto rs = sectors(c);
  std::vector<std::vector<AnalyticState>> parts(rs.size());
  parallel_for(static_cast<int>(rs.size()), [&](int i) { parts[i] = region_enumerate_infU(p, rs[i]); });
  Table t{"regions",
          {"P_index", "P[rad]", "region", "energy[J]", "overlap", "ipr[1]", "S[nats]", "residual[J]"},
          {}};
  std::map<std::string, int> counts;
  for (size_t i = 0; i < rs.size(); ++i)
    for (auto& a : parts[i]) {
      counts[region_name(a.region)]++;
      t.rows.push_back({long(rs[i]), lattice_momentum(rs[i], p.n), std::string(region_name(a.region)),
                        *a.state.energy, long(a.overlap), ipr(a.state),
                        entanglement_entropy(a.state).S_total, a.residual});
    }
  for (auto& [k, v] : counts) log << "region " << k << ": " << v << " states\n";
  return t;
}

Table eigenstate_table(const RunConfig& c) {
  if (!c.p_index) throw Error(ErrorKind::Config, "eigenstate needs --p");
  const auto& p = c.params;
  auto h = build_hamiltonian(p);
  int r = sectors(c).front();
  auto states = sector_states(p, h, r);
  Table t{"eigenstate",
          {"state", "type", "energy[J]", "block", "n", "m", "re[1]", "im[1]"},
          {}};
  for (size_t k = 0; k < states.size(); ++k) {
    if (c.state_index && *c.state_index != static_cast<int>(k)) continue;
    const auto& s = states[k];
    const CMat* blocks[3] = {&s.state.A, &s.state.B, &s.state.C};
    const char* names[3] = {"A", "B", "C"};
    for (int b = 0; b < 3; ++b)
      for (int n = 0; n < p.n; ++n)
        for (int m = 0; m < p.n; ++m) {
          cplx v = (*blocks[b])(n, m);
          t.rows.push_back({long(k), s.type, s.energy, std::string(names[b]), long(n), long(m),
                            v.real(), v.imag()});
        }
  }
  if (c.state_index && t.rows.empty())
    throw Error(ErrorKind::Config, "state index out of range: " + std::to_string(*c.state_index));
  return t;
}

Table evolve_table(const RunConfig& c) {
  const auto& p = c.params;
  const int steps = static_cast<int>(std::llround(c.t_max / c.dt_out));
  std::vector<double> times;
  for (int i = 0; i <= steps; ++i) times.push_back(i * c.dt_out);
  EvolveOptions opt;
  opt.method = c.method == "integrator" ? EvolveMethod::integrator : EvolveMethod::spectral;
  std::optional<Diagonalization> diag;
  if (opt.method == EvolveMethod::spectral) diag = diagonalize(p);
  auto tr = evolve(initial_state(p, c.initial), p, times, opt, diag ? &*diag : nullptr);
  Table t{"evolve", {"t[1/J]"}, {}};
  const std::map<std::string, std::string> units = {
      {"ipr", "1"}, {"S0", "nats"}, {"S1", "nats"}, {"S2", "nats"}, {"S", "nats"},
      {"n_db", "1"}, {"n_db_plain", "1"}, {"norm", "1"}, {"energy", "J"}};
  for (auto& [name, v] : tr.series) t.header.push_back(name + "[" + units.at(name) + "]");
  for (size_t i = 0; i < tr.times.size(); ++i) {
    std::vector<Cell> row{tr.times[i]};
    for (auto& [name, v] : tr.series) row.push_back(v[i]);
    t.rows.push_back(row);
  }
  return t;
}

Table dispatch(const RunConfig& c, std::ostream& log) {
  if (c.command == "spectrum") return spectrum_table(c);
  if (c.command == "doublon") return doublon_table(c, log);
  if (c.command == "regions") return regions_table(c, log);
  if (c.command == "eigenstate") return eigenstate_table(c);
  return evolve_table(c);
}

bool config_kind(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config:
    case ErrorKind::BadParams:
    case ErrorKind::BadSize:
    case ErrorKind::WrongMode:
    case ErrorKind::Unsupported:
    case ErrorKind::StepTooLarge:
      return true;
    default:
      return false;
  }
}

json options_json(const RunConfig& c) {
  json o = {{"format", c.format}};
  if (c.p_index) o["p"] = *c.p_index;
  else o["all_p"] = true;
  if (c.command == "doublon") o["p_grid"] = c.p_grid;
  if (c.command == "evolve") {
    o["initial"] = c.initial;
    o["t_max"] = c.t_max;
    o["dt_out"] = c.dt_out;
    o["method"] = c.method;
  }
  if (c.state_index) o["state"] = *c.state_index;
  return o;
}

}  // namespace

void RunConfig::validate() const {
  if (!kCommands.count(command)) throw Error(ErrorKind::Config, "unknown command '" + command + "'");
  params.validate();
  if (format != "csv" && format != "json")
    throw Error(ErrorKind::Config, "format must be csv or json");
  if (p_grid < 1) throw Error(ErrorKind::Config, "p_grid must be positive");
  if (!(t_max >= 0) || !std::isfinite(t_max)) throw Error(ErrorKind::Config, "t_max must be >= 0");
  if (!(dt_out > 0) || !std::isfinite(dt_out)) throw Error(ErrorKind::Config, "dt_out must be > 0");
  if (method != "spectral" && method != "integrator")
    throw Error(ErrorKind::Config, "method must be spectral or integrator");
  if (initial != "ab00" && initial != "aa00") throw Error(ErrorKind::Config, "initial must be ab00 or aa00");
  for (double v : sweep_u)
    if (!std::isfinite(v)) throw Error(ErrorKind::Config, "sweep.u entries must be finite");
  for (double v : sweep_omega)
    if (!std::isfinite(v)) throw Error(ErrorKind::Config, "sweep.omega entries must be finite");
}

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::Config, "config must be a JSON object");
  RunConfig c;
  try {
    for (auto& [key, v] : j.items()) {
      if (key == "command") c.command = v.get<std::string>();
      else if (key == "params") c.params = v.get<ModelParams>();
      else if (key == "p") c.p_index = v.get<int>();
      else if (key == "all_p") {
        if (v.get<bool>()) c.p_index.reset();
      } else if (key == "p_grid") c.p_grid = v.get<int>();
      else if (key == "out") c.output_dir = v.get<std::string>();
      else if (key == "format") c.format = v.get<std::string>();
      else if (key == "initial") c.initial = v.get<std::string>();
      else if (key == "t_max") c.t_max = v.get<double>();
      else if (key == "dt_out") c.dt_out = v.get<double>();
      else if (key == "method") c.method = v.get<std::string>();
      else if (key == "state") c.state_index = v.get<int>();
      else if (key == "sweep") {
        for (auto& [sk, sv] : v.items()) {
          if (sk == "u") c.sweep_u = sv.get<std::vector<double>>();
          else if (sk == "omega") c.sweep_omega = sv.get<std::vector<double>>();
          else throw Error(ErrorKind::Config, "unknown config key 'sweep." + sk + "'");
        }
      } else {
        throw Error(ErrorKind::Config, "unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, std::string("config type error: ") + e.what());
  }
  return c;
}

int run(const RunConfig& cfg, std::ostream& log) {
  try {
    cfg.validate();
    fs::create_directories(cfg.output_dir);
    std::vector<RunConfig> points;
    std::vector<double> us = cfg.sweep_u, oms = cfg.sweep_omega;
    const bool sweep = !us.empty() || !oms.empty();
    if (us.empty()) us.push_back(cfg.params.u1);
    if (oms.empty()) oms.push_back(cfg.params.omega);
    for (double u : us)
      for (double om : oms) {
        RunConfig c = cfg;
        if (!cfg.sweep_u.empty()) c.params.u1 = c.params.u2 = u;
        c.params.omega = om;
        points.push_back(c);
      }

    const std::string ext = cfg.format == "json" ? ".json" : ".csv";
    std::vector<std::string> files(points.size());
    std::vector<std::string> logs(points.size());
    std::mutex writer;
    parallel_for(static_cast<int>(points.size()), [&](int i) {
      std::ostringstream plog;
      Table t = dispatch(points[i], plog);
      std::string name = t.stem + (sweep ? "_" + std::to_string(i) : "") + ext;
      std::string body = render(t, cfg.format);
      std::lock_guard<std::mutex> lock(writer);
      std::ofstream(fs::path(cfg.output_dir) / name, std::ios::binary) << body;
      files[i] = name;
      logs[i] = plog.str();
    });

    json manifest = {{"tool", "cbh"},
                     {"version", CBH_VERSION},
                     {"command", cfg.command},
                     {"params", cfg.params},
                     {"options", options_json(cfg)}};
    json pts = json::array();
    for (size_t i = 0; i < points.size(); ++i) {
      json pt = {{"file", files[i]}};
      if (sweep) pt["params"] = points[i].params;
      pts.push_back(pt);
      log << logs[i] << "wrote " << (fs::path(cfg.output_dir) / files[i]).string() << "\n";
    }
    manifest["outputs"] = pts;
    std::ofstream(fs::path(cfg.output_dir) / "manifest.json", std::ios::binary) << manifest.dump(2) << "\n";
    return kExitOk;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return config_kind(e.kind()) ? kExitConfig : kExitSolver;
  } catch (const json::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Coupled Bose-Hubbard two-excitation solver"};
  std::string command, config_path, format, out, initial, method;
  ModelParams flags;
  int p = 0, p_grid = 64, state = 0;
  double t_max = 40, dt_out = 0.1;
  app.add_option("command", command, "spectrum | doublon | regions | eigenstate | evolve");
  app.add_option("--config", config_path, "JSON run configuration; flags override it");
  app.add_option("--n", flags.n, "lattice sites");
  app.add_option("--j1", flags.j1, "species-a hopping");
  app.add_option("--j2", flags.j2, "species-b hopping");
  app.add_option("--u1", flags.u1, "a-a on-site interaction");
  app.add_option("--u2", flags.u2, "b-b on-site interaction");
  app.add_option("--u3", flags.u3, "a-b on-site interaction");
  app.add_option("--omega", flags.omega, "Rabi coupling");
  app.add_option("--delta", flags.delta, "detuning of species a");
  app.add_flag("--hardcore", "U1 = U2 = infinity");
  auto* p_opt = app.add_option("--p", p, "momentum index r, P = 2 pi r / N");
  auto* all_opt = app.add_flag("--all-p", "every momentum sector");
  p_opt->excludes(all_opt);
  app.add_option("--p-grid", p_grid, "doublon momentum samples");
  app.add_option("--state", state, "eigenstate: position within the sector");
  app.add_option("--out", out, "output directory");
  app.add_option("--format", format, "csv | json");
  app.add_option("--initial", initial, "evolve: ab00 | aa00");
  app.add_option("--t-max", t_max, "evolve: final time (1/J)");
  app.add_option("--dt-out", dt_out, "evolve: output spacing (1/J)");
  app.add_option("--method", method, "evolve: spectral | integrator");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw Error(ErrorKind::Config, "cannot read config '" + config_path + "'");
      std::stringstream ss;
      ss << in.rdbuf();
      cfg = config_from_json(ss.str());
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  auto given = [&](const char* name) { return app.count(name) > 0; };
  if (given("command")) cfg.command = command;
  if (given("--n")) cfg.params.n = flags.n;
  if (given("--j1")) cfg.params.j1 = flags.j1;
  if (given("--j2")) cfg.params.j2 = flags.j2;
  if (given("--u1")) cfg.params.u1 = flags.u1;
  if (given("--u2")) cfg.params.u2 = flags.u2;
  if (given("--u3")) cfg.params.u3 = flags.u3;
  if (given("--omega")) cfg.params.omega = flags.omega;
  if (given("--delta")) cfg.params.delta = flags.delta;
  if (given("--hardcore")) cfg.params.u1_infinite = cfg.params.u2_infinite = true;
  if (given("--p")) cfg.p_index = p;
  if (given("--all-p")) cfg.p_index.reset();
  if (given("--p-grid")) cfg.p_grid = p_grid;
  if (given("--state")) cfg.state_index = state;
  if (given("--out")) cfg.output_dir = out;
  if (given("--format")) cfg.format = format;
  if (given("--initial")) cfg.initial = initial;
  if (given("--t-max")) cfg.t_max = t_max;
  if (given("--dt-out")) cfg.dt_out = dt_out;
  if (given("--method")) cfg.method = method;
  return run(cfg, std::cout);
}

}  // namespace cbh
