// Command-line workbench: structural verification, variational
// calculus, power-balance decomposition, Casimir tests, midpoint
// simulation with an energy ledger, a grid integration-by-parts
// check, and built-in model emission.
//
// Exit codes: 0 success / checks passed (Indeterminate counts as
// non-failure), 1 a check failed, 2 usage, parse, or model errors.
// Diagnostics go to standard error; results go to standard output
// with machine-greppable PASS/FAIL/INDETERMINATE verdict prefixes.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "phw/builtins.hpp"
#include "phw/discrete.hpp"
#include "phw/errors.hpp"
#include "phw/grid1d.hpp"
#include "phw/modelfile.hpp"
#include "phw/parser.hpp"
#include "phw/phs.hpp"
#include "phw/printer.hpp"
#include "phw/variational.hpp"

namespace {

using namespace phw;

ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path);
  out << text;
  out.flush();
  if (!out) throw Error("write failed: " + path);
}

const char* word(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    default: return "INDETERMINATE";
  }
}

void print_check(const std::string& name, const CheckReport& r) {
  std::cout << word(r.verdict) << ' ' << name;
  if (!r.detail.empty()) std::cout << ": " << r.detail;
  std::cout << '\n';
}

/// Splits "name=expr" at the first '=', trimming spaces around the name.
std::pair<std::string, std::string> split_binding(const std::string& s) {
  const std::size_t eq = s.find('=');
  if (eq == std::string::npos)
    throw Error("expected NAME=EXPR, got: " + s);
  std::string name = s.substr(0, eq);
  const std::size_t b = name.find_first_not_of(" \t");
  const std::size_t e = name.find_last_not_of(" \t");
  name = b == std::string::npos ? "" : name.substr(b, e - b + 1);
  if (name.empty()) throw Error("expected NAME=EXPR, got: " + s);
  return {name, s.substr(eq + 1)};
}

/// Parse space with the reserved time parameter available.
ModelSpace with_time(const ModelSpace& space) {
  ModelSpace sp = space;
  if (!sp.find_param("t")) sp.add_param(ParamSpec{"t", {}, {}, {}});
  return sp;
}

int run_verify(const std::string& file) {
  const ModelFile mf = load_model(file);
  print_check("skew", mf.structure.skew);
  print_check("dissipation", mf.structure.dissipation);
  const bool failed = mf.structure.skew.verdict == Verdict::Fail ||
                      mf.structure.dissipation.verdict == Verdict::Fail;
  return failed ? 1 : 0;
}

int run_vardiff(const std::string& file) {
  const ModelFile mf = load_model(file);
  const ModelSpace& sp = mf.system.space;
  const std::vector<Expr> e = efforts(mf.system);
  int slot = 0;
  for (int alpha = 0; alpha < sp.field_count(); ++alpha)
    if (sp.is_state(alpha))
      std::cout << "effort[" << sp.field_name(alpha)
                << "]: " << render(e[slot++], sp) << '\n';
  const BoundaryCovector b = boundary_operator(mf.system.hamiltonian, sp);
  for (int alpha = 0; alpha < sp.field_count(); ++alpha) {
    if (!sp.is_state(alpha)) continue;
    for (int a = 0; a < sp.dim(); ++a)
      std::cout << "boundary[" << sp.field_name(alpha) << "]["
                << sp.independent_name(a)
                << "]: " << render(b.comp[alpha][a], sp) << '\n';
  }
  return 0;
}

int run_balance(const std::string& file) {
  const ModelFile mf = load_model(file);
  const ModelSpace& sp = mf.system.space;
  const PowerBalance pb = power_balance(mf.system);
  int slot = 0;
  for (int alpha = 0; alpha < sp.field_count(); ++alpha)
    if (sp.is_state(alpha))
      std::cout << "effort[" << sp.field_name(alpha)
                << "]: " << render(pb.effort[slot++], sp) << '\n';
  slot = 0;
  for (int alpha : sp.input_indices())
    std::cout << "output[" << sp.field_name(alpha)
              << "]: " << render(pb.output[slot++], sp) << '\n';
  std::cout << "dissipation: " << render(pb.dissipation, sp) << '\n';
  std::cout << "domain_port: " << render(pb.domain_port, sp) << '\n';
  for (int a = 0; a < sp.dim(); ++a)
    std::cout << "boundary[" << sp.independent_name(a)
              << "]: " << render(pb.boundary[a], sp) << '\n';
  std::cout << "residual: " << render(pb.residual, sp) << '\n';
  return 0;
}

int run_casimir(const std::string& file, const std::string& candidate) {
  const ModelFile mf = load_model(file);
  const ModelSpace& sp = mf.system.space;
  const Expr C = parse_expression(candidate, sp);
  for (const Coordinate& c : C.coordinates())
    if (c.kind == Coordinate::Kind::Derivative && c.multi.size() > 1)
      throw Error(
          "the Casimir candidate must be a first-order density "
          "(no repeated derivatives)");
  const CasimirReport rep = casimir_check(mf.system, C);
  if (rep.verdict == Tri::Yes) {
    std::cout << "PASS casimir";
  } else if (rep.verdict == Tri::No) {
    std::cout << "FAIL casimir: not a Casimir";
  } else {
    std::cout << "INDETERMINATE casimir";
  }
  if (!rep.detail.empty()) {
    if (rep.verdict == Tri::No)
      std::cout << " (" << rep.detail << ')';
    else
      std::cout << ": " << rep.detail;
  }
  std::cout << '\n';
  int slot = 0;
  for (int alpha = 0; alpha < sp.field_count(); ++alpha)
    if (sp.is_state(alpha))
      std::cout << "residual[" << sp.field_name(alpha)
                << "]: " << render(rep.residual[slot++], sp) << '\n';
  slot = 0;
  for (int alpha : sp.input_indices())
    std::cout << "input_residual[" << sp.field_name(alpha)
              << "]: " << render(rep.input_residual[slot++], sp) << '\n';
  return rep.verdict == Tri::No ? 1 : 0;
}

int run_simulate(const std::string& file, int nx, double dt, double tend,
                 const std::string& out_path, const std::string& ledger_path,
                 int stride, const std::vector<std::string>& ic_args,
                 const std::vector<std::string>& input_args) {
  const ModelFile mf = load_model(file);
  const ModelSpace& sp = mf.system.space;
  if (dt <= 0.0) throw Error("--dt must be positive");
  const long long steps = std::llround(tend / dt);
  if (steps < 1) throw Error("--tend must cover at least one step of --dt");

  std::optional<DiscreteModel> model;
  try {
    model.emplace(mf.system, nx);
  } catch (const SimError& e) {
    throw SimError("model not numerically supported: " + std::string(e.what()));
  }

  std::vector<Expr> ic;
  if (!ic_args.empty()) {
    ic.assign(static_cast<std::size_t>(sp.state_count()), Expr::integer(0));
    for (const std::string& arg : ic_args) {
      const auto [name, text] = split_binding(arg);
      const std::optional<int> alpha = sp.find_field(name);
      if (!alpha || !sp.is_state(*alpha))
        throw Error("--ic names a state field; unknown: " + name);
      int slot = 0;
      for (int i = 0; i < *alpha; ++i)
        if (sp.is_state(i)) ++slot;
      ic[static_cast<std::size_t>(slot)] = parse_expression(text, sp);
    }
  }

  SimOptions opt;
  opt.dt = dt;
  opt.steps = static_cast<int>(steps);
  opt.stride = stride;
  opt.record_states = !out_path.empty();
  if (!input_args.empty()) {
    const ModelSpace tsp = with_time(sp);
    opt.input.assign(static_cast<std::size_t>(sp.input_count()),
                     Expr::integer(0));
    for (const std::string& arg : input_args) {
      const auto [name, text] = split_binding(arg);
      const std::optional<int> alpha = sp.find_field(name);
      if (!alpha || !sp.is_input(*alpha))
        throw Error("--input names an input field; unknown: " + name);
      int slot = 0;
      for (int i = 0; i < *alpha; ++i)
        if (sp.is_input(i)) ++slot;
      opt.input[static_cast<std::size_t>(slot)] = parse_expression(text, tsp);
    }
  }

  const Eigen::VectorXd y0 = model->nodal_state(ic);
  const SimResult res = model->run(y0, opt);

  if (!out_path.empty()) {
    write_file(out_path, trajectory_csv(*model, res));
    std::cout << "wrote " << out_path << '\n';
  }
  if (!ledger_path.empty()) {
    write_file(ledger_path, ledger_csv(res.rows));
    std::cout << "wrote " << ledger_path << '\n';
  }

  double max_res = 0.0;
  for (const LedgerRow& r : res.rows)
    max_res = std::max(max_res, std::abs(r.residual));
  char line[256];
  std::snprintf(line, sizeof line,
                "simulated %lld steps (dt=%g, nx=%d): H %.17g -> %.17g, "
                "max |ledger residual| %.3g",
                steps, dt, nx, res.rows.front().H, res.rows.back().H, max_res);
  std::cout << line << '\n';
  return 0;
}

int run_stokes(int nx, int vectors, unsigned long long seed) {
  const Grid1D g = Grid1D::make(nx, 0.0, 1.0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  double max_defect = 0.0;
  double max_ratio = 0.0;  // defect / (1e-13 * |w|_inf * n)
  for (int k = 0; k < vectors; ++k) {
    Eigen::VectorXd w(nx);
    for (int i = 0; i < nx; ++i) w(i) = dist(rng);
    const double defect = std::abs(stokes_defect(g, w));
    const double bound = 1e-13 * w.lpNorm<Eigen::Infinity>() * nx;
    max_defect = std::max(max_defect, defect);
    if (bound > 0.0) max_ratio = std::max(max_ratio, defect / bound);
  }
  char line[256];
  std::snprintf(line, sizeof line,
                "max defect %.3e over %d random vectors on %d nodes "
                "(bound 1e-13*|w|_inf*n)",
                max_defect, vectors, nx);
  std::cout << line << '\n';
  const bool ok = max_ratio <= 1.0;
  std::cout << (ok ? "PASS" : "FAIL") << " stokes-check\n";
  return ok ? 0 : 1;
}

int run_builtin(const std::string& name, const std::string& emit_path) {
  const PHSystem sys = make_builtin(name);
  std::string text =
      "# parameter values in this file are illustrative defaults, not part "
      "of the model's definition\n";
  text += emit_model(sys);
  if (emit_path.empty()) {
    std::cout << text;
  } else {
    write_file(emit_path, text);
    std::cout << "wrote " << emit_path << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Workbench for distributed-parameter port-Hamiltonian models: "
      "symbolic structure checks, variational calculus, power-balance "
      "decomposition, Casimir tests, and energy-consistent simulation."};
  app.require_subcommand(1);

  std::string file, candidate, out_path, ledger_path, emit_path, name;
  int nx = 0, stride = 1, vectors = 1000;
  double dt = 0.0, tend = 0.0;
  unsigned long long seed = 0x5eed1ba5ULL;
  std::vector<std::string> ic_args, input_args;

  CLI::App* verify =
      app.add_subcommand("verify", "Check the interconnection operator for "
                                   "skewness and the dissipation operator for "
                                   "non-negative self-adjointness");
  verify->add_option("file", file, "model file")->required();

  CLI::App* vardiff = app.add_subcommand(
      "vardiff", "Print the variational derivative (effort) per state and "
                 "the boundary covector of the energy density");
  vardiff->add_option("file", file, "model file")->required();

  CLI::App* balance = app.add_subcommand(
      "balance", "Print the symbolic energy-rate decomposition: efforts, "
                 "collocated outputs, dissipation density, domain port, "
                 "boundary flux densities, and the residual");
  balance->add_option("file", file, "model file")->required();

  CLI::App* casimir = app.add_subcommand(
      "casimir", "Test whether a first-order density generates a conserved "
                 "functional for every Hamiltonian");
  casimir->add_option("file", file, "model file")->required();
  casimir->add_option("--candidate", candidate, "candidate density")
      ->required();

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Integrate a one-dimensional model with the implicit "
                  "midpoint rule on a summation-by-parts grid");
  simulate->add_option("file", file, "model file")->required();
  simulate->add_option("--nx", nx, "grid nodes")->required();
  simulate->add_option("--dt", dt, "time step")->required();
  simulate->add_option("--tend", tend, "end time; steps = round(tend/dt)")
      ->required();
  simulate->add_option("--out", out_path, "trajectory CSV path");
  simulate->add_option("--ledger", ledger_path, "energy-ledger CSV path");
  simulate->add_option("--stride", stride, "emit every k-th step")
      ->default_val(1);
  simulate->add_option("--ic", ic_args,
                       "initial condition FIELD=EXPR (repeatable; "
                       "unspecified states start at zero)");
  simulate->add_option("--input", input_args,
                       "input signal NAME=EXPR of the coordinate and t "
                       "(repeatable)");

  CLI::App* stokes = app.add_subcommand(
      "stokes-check", "Check the grid's integration-by-parts identity: "
                      "quadrature of D*w against the boundary difference");
  stokes->add_option("--nx", nx, "grid nodes")->required();
  stokes->add_option("--vectors", vectors, "number of random vectors")
      ->default_val(1000);
  stokes->add_option("--seed", seed, "random seed");

  CLI::App* builtin = app.add_subcommand(
      "builtin", "Emit a built-in model file (string, string_damped, "
                 "casimir3, mhd)");
  builtin->add_option("name", name, "built-in model name")->required();
  builtin->add_option("--emit", emit_path, "output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (verify->parsed()) return run_verify(file);
    if (vardiff->parsed()) return run_vardiff(file);
    if (balance->parsed()) return run_balance(file);
    if (casimir->parsed()) return run_casimir(file, candidate);
    if (simulate->parsed())
      return run_simulate(file, nx, dt, tend, out_path, ledger_path, stride,
                          ic_args, input_args);
    if (stokes->parsed()) return run_stokes(nx, vectors, seed);
    if (builtin->parsed()) return run_builtin(name, emit_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
