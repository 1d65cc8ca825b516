#include <benchmark/benchmark.h>

#include "tsg/integrator.hpp"
#include "tsg/modal.hpp"
#include "tsg/scenario.hpp"

using namespace tsg;

namespace {

const Model& model(const std::string& name) {
  static const Model m1 = build_model(builtin("example1"));
  static const Model m2 = build_model(builtin("example2"));
  static const Model m3 = build_model(builtin("example3"));
  return name == "example1" ? m1 : name == "example2" ? m2 : m3;
}

void step(benchmark::State& state, const std::string& name) {
  const Model& m = model(name);
  Integrator integ(*m.forces, m.scenario.solver);
  SystemState s = integ.initial_state(m.q0, m.qdot0), next;
  int iterations = 0;
  for (auto _ : state) {
    iterations += integ.step(s, next).iterations;
    s = next;
  }
  state.counters["newton_iter"] = benchmark::Counter(iterations, benchmark::Counter::kAvgIterations);
}

void derivatives(benchmark::State& state) {
  const Model& m = model("example3");
  VectorXd v = VectorXd::Constant(m.q0.size(), 0.01);
  MatrixXd Kq, Kv;
  for (auto _ : state) {
    m.forces->tension_force_derivatives(m.q0, v, 0.0, Kq, Kv);
    benchmark::DoNotOptimize(Kq.data());
  }
}

void modal(benchmark::State& state) {
  const Model& m = model("example3");
  for (auto _ : state) {
    const auto ms = solve_modes(linearize(*m.forces, m.q0), *m.topology);
    benchmark::DoNotOptimize(ms.frequencies.data());
  }
}

void build(benchmark::State& state) {
  const Scenario s = builtin("example3");
  for (auto _ : state) {
    const Model m = build_model(s);
    benchmark::DoNotOptimize(m.q0.data());
  }
}

}  // namespace

BENCHMARK_CAPTURE(step, pendulum, std::string("example1"));
BENCHMARK_CAPTURE(step, planar_tower, std::string("example2"));
BENCHMARK_CAPTURE(step, tower, std::string("example3"));
BENCHMARK(derivatives);
BENCHMARK(modal);
BENCHMARK(build)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
