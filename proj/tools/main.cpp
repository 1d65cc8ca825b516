#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "tsg/csv.hpp"
#include "tsg/errors.hpp"
#include "tsg/scenario.hpp"

namespace fs = std::filesystem;
using namespace tsg;

namespace {

enum Exit : int {
  kOk = 0,
  kIoError = 1,
  kUsage = 2,
  kParse = 3,
  kPrecondition = 4,
  kSolver = 5,
  kModel = 6,
};

struct Options {
  std::string scenario;
  std::string output_dir;
  std::optional<double> dt, duration, tol, gravity, alpha, beta, nu, deploy_time;
  std::optional<int> max_iter;
  std::optional<std::string> setup, stage;
  int jobs = 1;
  std::vector<double> values;
};

void add_common(CLI::App* app, Options& o) {
  app->add_option("scenario", o.scenario, "scenario file or built-in name (example1, example2, example3)")->required();
  app->add_option("-o,--output-dir", o.output_dir, "output directory (default: $TSGDYN_OUTPUT_DIR or .)");
  app->add_option("--dt", o.dt, "time step, s")->check(CLI::PositiveNumber);
  app->add_option("--duration", o.duration, "simulated time, s")->check(CLI::NonNegativeNumber);
  app->add_option("--tol", o.tol, "constraint tolerance")->check(CLI::PositiveNumber);
  app->add_option("--max-iter", o.max_iter, "Newton iteration limit")->check(CLI::PositiveNumber);
  app->add_option("--gravity", o.gravity, "gravitational acceleration, m/s^2")->check(CLI::NonNegativeNumber);
  app->add_option("--alpha", o.alpha, "rest-length factor of essential cables")->check(CLI::PositiveNumber);
  app->add_option("--beta", o.beta, "rest-length factor of auxiliary cables")->check(CLI::PositiveNumber);
  app->add_option("--setup", o.setup, "example2 cable setup")->check(CLI::IsMember({"UN", "DN", "US", "US-AUX"}));
  app->add_option("--nu", o.nu, "ground excitation frequency, Hz")->check(CLI::NonNegativeNumber);
  app->add_option("--deploy-time", o.deploy_time, "deployment time T_d, s")->check(CLI::PositiveNumber);
  app->add_option("--stage", o.stage, "example3 stage")->check(CLI::IsMember({"initial", "target", "deploy"}));
}

void set_factor(Scenario& s, const std::string& group, double f) {
  bool any = false;
  for (auto& c : s.cables)
    if (c.group == group && c.mode == RestLengthMode::Factor) {
      c.factor = f;
      any = true;
    }
  if (!any) throw ParseError("scenario has no '" + group + "' cables with a rest_length_factor");
}

Scenario load(const Options& o) {
  Scenario s;
  const bool builtin_name = is_builtin(o.scenario) && !fs::exists(o.scenario);
  if (builtin_name) {
    BuiltinOptions b;
    if (o.gravity) b.gravity = *o.gravity;
    if (o.alpha) b.alpha = *o.alpha;
    if (o.beta) b.beta = *o.beta;
    if (o.setup) b.setup = *o.setup;
    if (o.nu) b.nu = *o.nu;
    if (o.deploy_time) b.deploy_time = *o.deploy_time;
    if (o.stage) b.stage = *o.stage;
    if ((o.alpha || o.beta || o.setup) && o.scenario != "example2")
      throw ParseError("--alpha, --beta and --setup apply to example2 only");
    if ((o.nu || o.deploy_time || o.stage) && o.scenario != "example3")
      throw ParseError("--nu, --deploy-time and --stage apply to example3 only");
    s = builtin(o.scenario, b);
  } else {
    ParsedScenario ps = parse_scenario_file(o.scenario);
    if (!ps.defaulted.empty()) {
      std::cerr << "defaults used for:";
      for (const auto& d : ps.defaulted) std::cerr << ' ' << d;
      std::cerr << "\n";
    }
    s = std::move(ps.scenario);
    if (o.setup || o.stage) throw ParseError("--setup and --stage apply to built-in scenarios only");
    if (o.gravity) {
      s.gravity = VectorXd::Zero(s.dim);
      s.gravity(s.dim - 1) = -*o.gravity;
    }
    if (o.alpha) set_factor(s, "essential", *o.alpha);
    if (o.beta) set_factor(s, "auxiliary", *o.beta);
    if (o.nu) {
      bool any = false;
      for (auto& p : s.prescribed)
        if (p.amplitude != 0.0) {
          p.frequency = *o.nu;
          any = true;
        }
      if (!any) throw ParseError("--nu given but no prescribed motion has an amplitude");
    }
    if (o.deploy_time) {
      bool any = false;
      for (auto& c : s.cables)
        if (c.final_rest_length) {
          c.actuation_duration = *o.deploy_time;
          any = true;
        }
      if (!any) throw ParseError("--deploy-time given but no cable is actuated");
    }
  }
  if (o.dt) s.solver.h = *o.dt;
  if (o.duration) s.duration = *o.duration;
  if (o.tol) s.solver.tol = *o.tol;
  if (o.max_iter) s.solver.max_iter = *o.max_iter;
  return s;
}

fs::path output_dir(const Options& o) {
  fs::path p = o.output_dir;
  if (p.empty()) {
    const char* env = std::getenv("TSGDYN_OUTPUT_DIR");
    p = env && *env ? fs::path(env) : fs::path(".");
  }
  fs::create_directories(p);
  return p;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw std::ios_base::failure("cannot write " + p.string());
  return f;
}

int run_simulate(const Options& o) {
  const Scenario s = load(o);
  const Model m = build_model(s);
  const fs::path dir = output_dir(o);
  Integrator probe(*m.forces, s.solver);
  const double defect = probe.velocity_defect(probe.initial_state(m.q0, m.qdot0));
  if (defect > 1e-8) std::cerr << "warning: initial velocities violate the constraints by " << defect << "\n";
  const double phi0 = m.topology->n_constraints() ? m.topology->constraint_residual(m.q0).lpNorm<Eigen::Infinity>() : 0.0;
  if (phi0 > s.solver.tol)
    throw PreconditionError("initial coordinates violate the constraints (" + std::to_string(phi0) + ")");

  SimulationOptions so;
  so.record_stride = s.record_stride;
  so.progress = [&](const SystemState& st) { std::cerr << "t = " << st.t << " s of " << s.duration << "\n"; };
  const SimulationResult r = simulate(*m.forces, m.q0, m.qdot0, s.duration, s.solver, so);
  auto traj = open_out(dir / "trajectory.csv");
  write_trajectory_csv(traj, *m.forces, r);
  auto en = open_out(dir / "energy.csv");
  write_energy_csv(en, *m.forces, r);
  auto sl = open_out(dir / "slack_events.csv");
  write_slack_events_csv(sl, *m.forces, r);
  std::cerr << r.steps << " steps, " << r.slack_events.size() << " slack events, max |constraint| "
            << r.max_constraint << "\n";
  if (r.failed) {
    std::cerr << "error: " << r.diagnostic << "\n";
    return kSolver;
  }
  return kOk;
}

struct ModalRun {
  LinearizedModel lin;
  ModeSet modes;
};

ModalRun modal_of(const Scenario& s) {
  const Model m = build_model(s);
  if (!s.modal_gravity) m.forces->set_gravity(VectorXd::Zero(s.dim));
  ModalRun r;
  r.lin = linearize(*m.forces, m.q0);
  r.modes = solve_modes(r.lin, *m.topology);
  return r;
}

int run_modal(const Options& o) {
  const Scenario s = load(o);
  const ModalRun r = modal_of(s);
  const fs::path dir = output_dir(o);
  auto f = open_out(dir / "frequencies.csv");
  write_frequencies_csv(f, r.modes);
  auto g = open_out(dir / "modes.csv");
  write_modes_csv(g, r.lin, r.modes);
  if (r.modes.frequencies.size())
    std::cerr << r.modes.frequencies.size() << " modes, lowest " << r.modes.frequencies(0) << " Hz\n";
  return kOk;
}

int run_inverse_statics(const Options& o) {
  const Scenario s = load(o);
  const Model m = build_model(s);
  RestLengthResult r;
  if (m.statics) {
    r = *m.statics;
  } else {
    r = inverse_statics_rest_lengths(*m.forces, m.q0, {});
  }
  auto f = open_out(output_dir(o) / "restlengths.csv");
  write_rest_lengths_csv(f, *m.forces, m.q0, r);
  std::cerr << "rank(B): " << r.rank_B << ", residual " << r.residual << "\n";
  return kOk;
}

int run_sweep(const Options& o) {
  const Scenario base = load(o);
  SweepSpec sp = base.sweep.value_or(SweepSpec{});
  if (!o.values.empty()) sp.values = o.values;
  if (sp.values.empty()) throw ParseError("no sweep values: give --values or a sweep section");

  const std::size_t n = sp.values.size();
  std::vector<std::optional<ModalRun>> out(n);
  std::vector<std::string> errors(n);
  std::vector<int> codes(n, kOk);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      Scenario s = base;
      const double v = sp.values[i];
      try {
        if (sp.parameter != SweepParameter::Beta) set_factor(s, "essential", v);
        if (sp.parameter != SweepParameter::Alpha) set_factor(s, "auxiliary", v);
        out[i] = modal_of(s);
      } catch (const PreconditionError& e) {
        errors[i] = e.what();
        codes[i] = kPrecondition;
      } catch (const SolverError& e) {
        errors[i] = e.what();
        codes[i] = kSolver;
      } catch (const ParseError& e) {
        errors[i] = e.what();
        codes[i] = kParse;
      } catch (const ModelError& e) {
        errors[i] = e.what();
        codes[i] = kModel;
      } catch (const std::exception& e) {
        errors[i] = e.what();
        codes[i] = kIoError;
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(o.jobs, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  Eigen::Index nf = 0;
  for (const auto& r : out)
    if (r) nf = std::max(nf, r->modes.frequencies.size());
  auto group_factor = [&](const std::string& g) {
    for (const auto& c : base.cables)
      if (c.group == g && c.mode == RestLengthMode::Factor) return c.factor;
    return std::numeric_limits<double>::quiet_NaN();
  };
  auto f = open_out(output_dir(o) / "grid.csv");
  f.precision(17);
  f << "alpha,beta";
  for (Eigen::Index k = 0; k < nf; ++k) f << ",f" << k + 1;
  f << '\n';
  int code = kOk;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = sp.values[i];
    const double a = sp.parameter == SweepParameter::Beta ? group_factor("essential") : v;
    const double b = sp.parameter == SweepParameter::Alpha ? group_factor("auxiliary") : v;
    f << a << ',' << b;
    for (Eigen::Index k = 0; k < nf; ++k) {
      if (out[i] && k < out[i]->modes.frequencies.size())
        f << ',' << out[i]->modes.frequencies(k);
      else
        f << ",nan";
    }
    f << '\n';
    if (codes[i] != kOk) {
      std::cerr << "grid point " << v << ": " << errors[i] << "\n";
      if (code == kOk) code = codes[i];
    }
  }
  return code;
}

int run_check(const Options& o) {
  const Scenario s = load(o);
  const Model m = build_model(s);
  const auto& T = *m.topology;
  const int dof = degrees_of_freedom(T, m.q0);
  int rank_b = 0;
  if (m.forces->num_cables() > 0) {
    MatrixXd B;
    VectorXd b;
    rest_length_system(*m.forces, m.q0, 0.0, B, b);
    rank_b = numerical_rank(B);
  }
  int slack = 0;
  for (const auto& c : m.forces->cable_states(m.q0, m.qdot0, 0.0)) slack += c.slack ? 1 : 0;
  const double phi = T.n_constraints() ? T.constraint_residual(m.q0).lpNorm<Eigen::Infinity>() : 0.0;
  std::cout << "DoF: " << dof << ", rank(B): " << rank_b << ", slack cables: " << slack << "\n";
  std::cout << "coordinates: " << T.n() << " (free " << T.n_free() << "), constraints: " << T.n_constraints()
            << " (dropped " << T.dropped_constraints().size() << "), max |constraint|: " << phi << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensegrity statics, modal analysis and dynamics in natural coordinates"};
  app.require_subcommand(1);
  Options o;
  auto* sim = app.add_subcommand("simulate", "integrate a scenario; writes trajectory.csv, energy.csv, slack_events.csv");
  auto* modal = app.add_subcommand("modal", "linearize at the initial configuration; writes frequencies.csv, modes.csv");
  auto* inv = app.add_subcommand("inverse-statics", "solve rest lengths; writes restlengths.csv");
  auto* sweep = app.add_subcommand("sweep", "modal analysis over rest-length factors; writes grid.csv");
  auto* check = app.add_subcommand("check", "print degrees of freedom, rank(B) and slack cables");
  for (auto* sc : {sim, modal, inv, sweep, check}) add_common(sc, o);
  sweep->add_option("-j,--jobs", o.jobs, "parallel grid points")->check(CLI::PositiveNumber);
  sweep->add_option("--values", o.values, "sweep values (overrides the scenario's list)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*sim) return run_simulate(o);
    if (*modal) return run_modal(o);
    if (*inv) return run_inverse_statics(o);
    if (*sweep) return run_sweep(o);
    if (*check) return run_check(o);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition failed: " << e.what() << "\n";
    return kPrecondition;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolver;
  } catch (const ModelError& e) {
    std::cerr << "invalid model: " << e.what() << "\n";
    return kModel;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kUsage;
}
