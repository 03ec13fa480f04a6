#include "egstokes/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "egstokes/problems.hpp"

namespace egstokes {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::string body = trim(s);
  if (body.size() >= 2 && body.front() == '[' && body.back() == ']') body = body.substr(1, body.size() - 2);
  std::istringstream in(body);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.size() >= 2 && (item.front() == '"' || item.front() == '\'')) item = item.substr(1, item.size() - 2);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size()) throw std::invalid_argument("bad number for " + key + ": '" + v + "'");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x)) throw std::invalid_argument("bad integer for " + key + ": '" + v + "'");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string s = lower(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw std::invalid_argument("bad boolean for " + key + ": '" + v + "'");
}

// Runs fn(i) for i in [0, count) on up to `workers` threads.
template <typename F>
void parallel_for(std::size_t count, int workers, F&& fn) {
  const std::size_t w = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, workers)));
  if (w <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < w; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::string number(double x) {
  std::ostringstream s;
  s << std::setprecision(10) << std::scientific << x;
  return s.str();
}

std::string rate_text(const std::optional<double>& r) {
  if (!r) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *r);
  return buf;
}

std::string rate_csv(const std::optional<double>& r) { return r ? number(*r) : ""; }

void write_case_vtk(const std::string& path, const Discretization& d, const Vec& x) {
  const SimplicialMesh& mesh = d.mesh;
  const DofLayout& layout = d.layout;
  const int dim = mesh.dim();
  VtkData data;
  std::vector<Vec3> nodal(mesh.num_vertices(), Vec3::Zero());
  for (Index v = 0; v < mesh.num_vertices(); ++v) {
    for (int c = 0; c < dim; ++c) nodal[v][c] = x[layout.continuous(v, c)];
  }
  const EgFunction uh(mesh, layout, {x.data(), std::size_t(layout.num_velocity())});
  std::vector<Vec3> cell(mesh.num_elements());
  std::vector<double> p(mesh.num_elements());
  for (Index k = 0; k < mesh.num_elements(); ++k) {
    cell[k] = uh.value(k, mesh.centroid(k));
    p[k] = x[layout.pressure(k)];
  }
  data.point_vectors.emplace_back("velocity_continuous", std::move(nodal));
  data.cell_vectors.emplace_back("velocity", std::move(cell));
  data.cell_scalars.emplace_back("pressure", std::move(p));
  write_vtk(mesh, path, data);
}

// base "out/run.vtk", tag "pr" -> "out/run_pr.vtk".
std::string tagged_path(const std::string& base, const std::string& tag, const std::string& default_ext) {
  const auto dot = base.rfind('.');
  const auto slash = base.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return base + "_" + tag + default_ext;
  return base.substr(0, dot) + "_" + tag + base.substr(dot);
}

Vec solve_case(const StokesSystem& system, const ExperimentConfig& cfg, CaseRow& row) {
  if (cfg.solver == SolverChoice::direct) return solve_direct(system);
  KrylovOptions opt;
  opt.rel_tol = cfg.tol;
  opt.max_iter = cfg.max_iter;
  const bool minres = cfg.solver == SolverChoice::minres;
  // MINRES needs a symmetric positive definite preconditioner.
  const PrecondKind kind = minres ? PrecondKind::diagonal : cfg.precond;
  KrylovResult r = solve_iterative(system, kind, cfg.fidelity, opt, minres ? KrylovMethod::minres : KrylovMethod::gmres);
  row.iterations = r.report.iterations;
  row.converged = r.report.converged;
  if (!row.converged) row.status = "not converged";
  return r.x;
}

// Solves every configured method on one (n, nu) pair.
std::vector<CaseRow> run_cases(const ExperimentConfig& cfg, int n, double nu, bool write_vtk_files) {
  const ProblemSpec problem = get_problem(cfg.problem, nu);
  const double rho = cfg.rho.value_or(problem.rho);
  Discretization d = discretize(problem.build_mesh(n), problem.f, problem.g, nu, rho);
  std::vector<CaseRow> rows;
  for (Method m : cfg.methods) {
    CaseRow row;
    row.method = method_name(m);
    row.n = n;
    row.h = 1.0 / n;
    row.nu = nu;
    row.rho = rho;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const StokesSystem system = build_system(m, d.blocks, d.mesh.volumes());
      row.dofs = system.matrix.rows();
      row.nnz = system.matrix.nonZeros();
      const Vec x = expand_solution(system, solve_case(system, cfg, row));
      const ErrorReport e = compute_errors(d.mesh, d.layout, problem, x, rho);
      row.velocity_energy = e.velocity_energy;
      row.pressure_l2 = e.pressure_l2;
      row.pressure_auxiliary = e.pressure_auxiliary;
      row.max_divergence = e.max_divergence;
      if (write_vtk_files) write_case_vtk(tagged_path(cfg.vtk, method_key(m) + "_n" + std::to_string(n), ".vtk"), d, x);
    } catch (const std::exception& ex) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.velocity_energy = row.pressure_l2 = row.pressure_auxiliary = row.max_divergence = nan;
      row.converged = false;
      row.status = std::string("error: ") + ex.what();
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rows.push_back(std::move(row));
  }
  return rows;
}

bool usable(const CaseRow& r) { return r.status == "ok" && r.velocity_energy > 0.0 && r.pressure_l2 > 0.0; }

std::optional<double> rate(double e0, double e1, double h0, double h1) {
  if (!(e0 > 0.0) || !(e1 > 0.0)) return std::nullopt;
  return eoc({e0, e1}, {h0, h1})[0];
}

}  // namespace

Study parse_study(const std::string& s) {
  const std::string v = lower(s);
  if (v == "convergence") return Study::convergence;
  if (v == "robustness") return Study::robustness;
  if (v == "precond") return Study::precond;
  if (v == "sparsity") return Study::sparsity;
  throw std::invalid_argument("unknown study '" + s + "'");
}

std::string to_string(Study s) {
  switch (s) {
    case Study::convergence: return "convergence";
    case Study::robustness: return "robustness";
    case Study::precond: return "precond";
    case Study::sparsity: return "sparsity";
  }
  return "";
}

SolverChoice parse_solver(const std::string& s) {
  const std::string v = lower(s);
  if (v == "direct") return SolverChoice::direct;
  if (v == "gmres") return SolverChoice::gmres;
  if (v == "minres") return SolverChoice::minres;
  throw std::invalid_argument("unknown solver '" + s + "'");
}

std::string to_string(SolverChoice s) {
  switch (s) {
    case SolverChoice::direct: return "direct";
    case SolverChoice::gmres: return "gmres";
    case SolverChoice::minres: return "minres";
  }
  return "";
}

void apply_setting(ExperimentConfig& c, const std::string& raw_key, const std::string& raw_value) {
  std::string key = lower(trim(raw_key));
  std::replace(key.begin(), key.end(), '-', '_');
  std::string value = trim(raw_value);
  if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
    value = value.substr(1, value.size() - 2);
  }
  if (key == "study") c.study = parse_study(value);
  else if (key == "problem") {
    get_problem(value, 1.0);  // validates the id
    c.problem = value;
  } else if (key == "methods") {
    c.methods.clear();
    for (const auto& m : split_list(value)) c.methods.push_back(parse_method(m));
  } else if (key == "n") {
    c.n.clear();
    for (const auto& x : split_list(value)) c.n.push_back(to_int(key, x));
  } else if (key == "nu") {
    c.nu.clear();
    for (const auto& x : split_list(value)) c.nu.push_back(to_double(key, x));
  } else if (key == "rho") c.rho = to_double(key, value);
  else if (key == "solver") c.solver = parse_solver(value);
  else if (key == "tol") c.tol = to_double(key, value);
  else if (key == "max_iter") c.max_iter = to_int(key, value);
  else if (key == "precond") c.precond = parse_precond_kind(value);
  else if (key == "fidelity") c.fidelity = parse_fidelity(value);
  else if (key == "kappa") c.kappa = to_bool(key, value);
  else if (key == "out" || key == "output") c.output = value;
  else if (key == "vtk") c.vtk = value;
  else if (key == "extended") c.extended = to_bool(key, value);
  else if (key == "workers") c.workers = to_int(key, value);
  else throw std::invalid_argument("unknown setting '" + raw_key + "'");
}

void read_config_file(ExperimentConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
  }
}

ExperimentConfig resolve(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  const int dim = get_problem(c.problem, 1.0).dim;
  if (c.methods.empty()) {
    switch (c.study) {
      case Study::convergence:
      case Study::robustness: c.methods = {Method::st, Method::pr}; break;
      case Study::precond:
      case Study::sparsity: c.methods = {Method::pr, Method::ppr, Method::cpr}; break;
    }
  }
  if (c.n.empty()) {
    switch (c.study) {
      case Study::convergence: c.n = dim == 2 ? std::vector<int>{4, 8, 16, 32, 64} : std::vector<int>{4, 8, 16}; break;
      case Study::robustness: c.n = {dim == 2 ? 32 : 16}; break;
      case Study::precond: c.n = {4}; break;
      case Study::sparsity: c.n = {dim == 2 ? 32 : 16}; break;
    }
  }
  if (c.nu.empty()) {
    switch (c.study) {
      case Study::convergence: c.nu = {1e-6}; break;
      case Study::robustness: c.nu = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}; break;
      case Study::precond: c.nu = {1.0, 1e-2, 1e-4, 1e-6}; break;
      case Study::sparsity: c.nu = {1.0}; break;
    }
  }
  const int cap = (dim == 2 ? 64 : 16) * (c.extended ? 2 : 1);
  for (int n : c.n) {
    if (n < 1) throw std::invalid_argument("n must be positive");
    if (n > cap) {
      throw std::invalid_argument("n = " + std::to_string(n) + " exceeds the desk-scale cap " + std::to_string(cap) +
                                  (c.extended ? "" : " (use --extended)"));
    }
  }
  for (double nu : c.nu) {
    if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  }
  if (c.rho && !(*c.rho > 0.0)) throw std::invalid_argument("rho must be positive");
  if (!(c.tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (c.max_iter < 1) throw std::invalid_argument("max_iter must be positive");
  return c;
}

std::vector<CaseRow> run_convergence(const ExperimentConfig& config) {
  const ExperimentConfig c = resolve(config);
  std::vector<std::pair<int, double>> tasks;
  for (double nu : c.nu) {
    for (int n : c.n) tasks.emplace_back(n, nu);
  }
  const int finest = *std::max_element(c.n.begin(), c.n.end());
  std::vector<std::vector<CaseRow>> out(tasks.size());
  parallel_for(tasks.size(), c.workers, [&](std::size_t i) {
    const bool vtk = !c.vtk.empty() && tasks[i].first == finest && tasks[i].second == c.nu.back();
    out[i] = run_cases(c, tasks[i].first, tasks[i].second, vtk);
  });
  // Rows in config order: nu, then method, then n.
  std::vector<CaseRow> rows;
  const std::size_t nm = c.methods.size();
  for (std::size_t iv = 0; iv < c.nu.size(); ++iv) {
    for (std::size_t m = 0; m < nm; ++m) {
      std::optional<CaseRow> prev;
      for (std::size_t in = 0; in < c.n.size(); ++in) {
        CaseRow row = out[iv * c.n.size() + in][m];
        if (prev && usable(*prev) && usable(row) && row.h < prev->h) {
          row.velocity_rate = rate(prev->velocity_energy, row.velocity_energy, prev->h, row.h);
          row.pressure_rate = rate(prev->pressure_l2, row.pressure_l2, prev->h, row.h);
          row.auxiliary_rate = rate(prev->pressure_auxiliary, row.pressure_auxiliary, prev->h, row.h);
        }
        rows.push_back(row);
        prev = row;
      }
    }
  }
  return rows;
}

std::vector<CaseRow> run_robustness(const ExperimentConfig& config) {
  ExperimentConfig c = resolve(config);
  std::vector<std::pair<int, double>> tasks;
  for (int n : c.n) {
    for (double nu : c.nu) tasks.emplace_back(n, nu);
  }
  std::vector<std::vector<CaseRow>> out(tasks.size());
  parallel_for(tasks.size(), c.workers, [&](std::size_t i) {
    const bool vtk = !c.vtk.empty() && i + 1 == tasks.size();
    out[i] = run_cases(c, tasks[i].first, tasks[i].second, vtk);
  });
  // Rows grouped by n, then method, then nu.
  std::vector<CaseRow> rows;
  for (std::size_t in = 0; in < c.n.size(); ++in) {
    for (std::size_t m = 0; m < c.methods.size(); ++m) {
      for (std::size_t iv = 0; iv < c.nu.size(); ++iv) rows.push_back(out[in * c.nu.size() + iv][m]);
    }
  }
  return rows;
}

PrecondStudy run_precond_study(const ExperimentConfig& config) {
  const ExperimentConfig c = resolve(config);
  PrecondStudy study;
  study.n = c.n.front();
  study.nu = c.nu;
  for (Method m : c.methods) {
    if (m == Method::st) continue;  // same operator as PR-EG
    study.methods.push_back(method_name(m));
  }
  const std::vector<PrecondKind> kinds{PrecondKind::diagonal, PrecondKind::lower, PrecondKind::upper};
  const std::vector<Fidelity> fidelities{Fidelity::exact, Fidelity::inexact};
  std::vector<std::vector<PrecondCell>> cells(c.nu.size());
  std::vector<std::vector<KappaCell>> kappas(c.nu.size());
  parallel_for(c.nu.size(), c.workers, [&](std::size_t iv) {
    const double nu = c.nu[iv];
    const ProblemSpec problem = get_problem(c.problem, nu);
    const double rho = c.rho.value_or(problem.rho);
    const Discretization d = discretize(problem.build_mesh(study.n), problem.f, problem.g, nu, rho);
    KrylovOptions opt;
    opt.rel_tol = c.tol;
    opt.max_iter = c.max_iter;
    for (Method m : c.methods) {
      if (m == Method::st) continue;
      const StokesSystem system = build_system(m, d.blocks, d.mesh.volumes());
      for (Fidelity f : fidelities) {
        for (PrecondKind k : kinds) {
          const KrylovResult r = solve_iterative(system, k, f, opt);
          PrecondCell cell;
          cell.method = method_name(m);
          cell.kind = k;
          cell.fidelity = f;
          cell.nu = nu;
          cell.iterations = r.report.iterations;
          cell.converged = r.report.converged;
          cell.velocity_inner = r.report.velocity_inner.mean();
          cell.pressure_inner = r.report.pressure_inner.mean();
          cells[iv].push_back(cell);
        }
      }
      if (c.kappa) kappas[iv].push_back({method_name(m), nu, condition_number(system)});
    }
  });
  for (std::size_t iv = 0; iv < c.nu.size(); ++iv) {
    study.cells.insert(study.cells.end(), cells[iv].begin(), cells[iv].end());
    study.kappa.insert(study.kappa.end(), kappas[iv].begin(), kappas[iv].end());
  }
  return study;
}

std::vector<SparsityRow> run_sparsity(const ExperimentConfig& config) {
  const ExperimentConfig c = resolve(config);
  const double nu = c.nu.front();
  std::vector<SparsityRow> rows;
  for (int n : c.n) {
    const ProblemSpec problem = get_problem(c.problem, nu);
    const double rho = c.rho.value_or(problem.rho);
    const Discretization d = discretize(problem.build_mesh(n), problem.f, problem.g, nu, rho);
    const Index reference = build_system(Method::pr, d.blocks, d.mesh.volumes()).matrix.rows();
    for (Method m : c.methods) {
      const StokesSystem s = build_system(m, d.blocks, d.mesh.volumes());
      SparsityRow row;
      row.method = method_name(m);
      row.n = n;
      row.elements = d.mesh.num_elements();
      row.dofs = s.matrix.rows();
      row.nnz = s.matrix.nonZeros();
      row.reduction = 1.0 - double(row.dofs) / double(reference);
      rows.push_back(row);
    }
  }
  return rows;
}

std::string format_sci(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  std::string s(buf);
  const auto e = s.find('e');
  const std::string mant = s.substr(0, e);
  const int exp = std::stoi(s.substr(e + 1));
  return mant + "e" + std::to_string(exp);
}

std::string Table::to_csv() const {
  auto line = [](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
      if (quote) {
        out += '"';
        for (char ch : cells[i]) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        out += '"';
      } else {
        out += cells[i];
      }
    }
    return out + "\n";
  };
  std::string out = line(header);
  for (const auto& r : rows) out += line(r);
  return out;
}

std::string Table::to_text() const {
  std::vector<std::size_t> width(header.size(), 0);
  for (std::size_t j = 0; j < header.size(); ++j) width[j] = header[j].size();
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.size() && j < width.size(); ++j) width[j] = std::max(width[j], r[j].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t j = 0; j < width.size(); ++j) {
      const std::string& cell = j < cells.size() ? cells[j] : std::string();
      if (j) out += "  ";
      out += std::string(width[j] - cell.size(), ' ') + cell;
    }
    return out + "\n";
  };
  std::string out = line(header);
  std::size_t total = 0;
  for (std::size_t w : width) total += w;
  out += std::string(total + 2 * (width.empty() ? 0 : width.size() - 1), '-') + "\n";
  for (const auto& r : rows) out += line(r);
  return out;
}

Table convergence_table(const std::vector<CaseRow>& rows, bool csv) {
  Table t;
  t.header = {"method", "n", "h", "nu", "velocity_energy", "velocity_rate", "pressure_l2", "pressure_rate",
              "pressure_aux", "aux_rate", "max_div", "iterations", "status"};
  for (const CaseRow& r : rows) {
    const auto num = [&](double x) { return csv ? number(x) : format_sci(x); };
    const auto rt = [&](const std::optional<double>& x) { return csv ? rate_csv(x) : rate_text(x); };
    t.rows.push_back({r.method, std::to_string(r.n), csv ? number(r.h) : "1/" + std::to_string(r.n), num(r.nu),
                      num(r.velocity_energy), rt(r.velocity_rate), num(r.pressure_l2), rt(r.pressure_rate),
                      num(r.pressure_auxiliary), rt(r.auxiliary_rate), num(r.max_divergence),
                      std::to_string(r.iterations), r.status});
  }
  return t;
}

Table robustness_table(const std::vector<CaseRow>& rows, bool csv) {
  Table t;
  t.header = {"method", "n", "nu", "velocity_energy", "pressure_l2", "pressure_aux", "max_div", "iterations", "status"};
  for (const CaseRow& r : rows) {
    const auto num = [&](double x) { return csv ? number(x) : format_sci(x); };
    t.rows.push_back({r.method, std::to_string(r.n), num(r.nu), num(r.velocity_energy), num(r.pressure_l2),
                      num(r.pressure_auxiliary), num(r.max_divergence), std::to_string(r.iterations), r.status});
  }
  return t;
}

Table precond_table(const PrecondStudy& study) {
  Table t;
  t.header = {"fidelity", "nu"};
  const std::vector<PrecondKind> kinds{PrecondKind::diagonal, PrecondKind::lower, PrecondKind::upper};
  for (const auto& m : study.methods) {
    for (PrecondKind k : kinds) t.header.push_back(m + ":" + to_string(k));
  }
  for (Fidelity f : {Fidelity::exact, Fidelity::inexact}) {
    for (double nu : study.nu) {
      std::vector<std::string> row{to_string(f), format_sci(nu)};
      for (const auto& m : study.methods) {
        for (PrecondKind k : kinds) {
          auto it = std::find_if(study.cells.begin(), study.cells.end(), [&](const PrecondCell& c) {
            return c.method == m && c.kind == k && c.fidelity == f && c.nu == nu;
          });
          row.push_back(it == study.cells.end() || !it->converged ? "--" : std::to_string(it->iterations));
        }
      }
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

Table kappa_table(const PrecondStudy& study) {
  Table t;
  t.header = {"nu"};
  for (const auto& m : study.methods) t.header.push_back(m);
  for (double nu : study.nu) {
    std::vector<std::string> row{format_sci(nu)};
    for (const auto& m : study.methods) {
      auto it = std::find_if(study.kappa.begin(), study.kappa.end(),
                             [&](const KappaCell& c) { return c.method == m && c.nu == nu; });
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", it == study.kappa.end() ? std::nan("") : it->kappa);
      row.push_back(it == study.kappa.end() ? "--" : buf);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table sparsity_table(const std::vector<SparsityRow>& rows) {
  Table t;
  t.header = {"method", "n", "elements", "dofs", "nnz", "reduction"};
  for (const SparsityRow& r : rows) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", r.reduction);
    t.rows.push_back({r.method, std::to_string(r.n), std::to_string(r.elements), std::to_string(r.dofs),
                      std::to_string(r.nnz), buf});
  }
  return t;
}

std::string run_study(const ExperimentConfig& config) {
  const ExperimentConfig c = resolve(config);
  std::string text;
  std::string csv;
  switch (c.study) {
    case Study::convergence: {
      const auto rows = run_convergence(c);
      text = convergence_table(rows, false).to_text();
      csv = convergence_table(rows, true).to_csv();
      break;
    }
    case Study::robustness: {
      const auto rows = run_robustness(c);
      text = robustness_table(rows, false).to_text();
      csv = robustness_table(rows, true).to_csv();
      break;
    }
    case Study::precond: {
      const PrecondStudy s = run_precond_study(c);
      const Table it = precond_table(s);
      text = "Iteration counts (n = " + std::to_string(s.n) + ")\n" + it.to_text();
      csv = it.to_csv();
      if (c.kappa) {
        const Table k = kappa_table(s);
        text += "\nCondition numbers, diagonal exact preconditioner\n" + k.to_text();
        if (!c.output.empty()) {
          std::ofstream out(tagged_path(c.output, "kappa", ".csv"));
          if (!out) throw std::runtime_error("cannot write condition-number CSV next to " + c.output);
          out << k.to_csv();
        }
      }
      break;
    }
    case Study::sparsity: {
      const Table t = sparsity_table(run_sparsity(c));
      text = t.to_text();
      csv = t.to_csv();
      break;
    }
  }
  if (!c.output.empty()) {
    std::ofstream out(c.output);
    if (!out) throw std::runtime_error("cannot write " + c.output);
    out << csv;
  }
  return text;
}

}  // namespace egstokes
