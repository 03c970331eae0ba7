#include <benchmark/benchmark.h>

#include "avsfe/drivers.hpp"

namespace {

using namespace avsfe;

void bench_element_system(benchmark::State& state) {
  const ProblemSpec spec = eriksson_johnson_1d(0.1);
  const Mesh mesh = problem_mesh(spec, 8, 8);
  const SpacesBundle sb = make_spaces(mesh, spec.mode, static_cast<int>(state.range(0)));
  FormOptions opts;
  for (auto _ : state) {
    for (int t = 0; t < mesh.n_triangles(); ++t)
      benchmark::DoNotOptimize(element_B_F(spec, sb, t, opts));
  }
  state.SetItemsProcessed(state.iterations() * mesh.n_triangles());
}
BENCHMARK(bench_element_system)->Arg(1)->Arg(2);

void bench_spacetime_solve(benchmark::State& state) {
  const ProblemSpec spec = eriksson_johnson_1d(0.1);
  const int n = static_cast<int>(state.range(0));
  const Mesh mesh = problem_mesh(spec, n, n);
  const SpacesBundle sb = make_spaces(mesh, spec.mode, 1);
  const DiscreteSystem ds = spacetime_system(spec, sb, {});
  for (auto _ : state) benchmark::DoNotOptimize(solve(ds));
}
BENCHMARK(bench_spacetime_solve)->Arg(8)->Arg(16);

void bench_genalpha_step(benchmark::State& state) {
  const ProblemSpec spec = rotating_ring(500.0);
  const int n = static_cast<int>(state.range(0));
  const Mesh mesh = problem_mesh(spec, n, n);
  const SpacesBundle sb = make_spaces(mesh, spec.mode, 1);
  const GenAlphaParams params = make_params(0.9, 1e-2);
  GenAlphaState s0 = initial_data(spec, mesh, sb, {});
  for (auto _ : state) benchmark::DoNotOptimize(step(spec, sb, params, s0, {}));
}
BENCHMARK(bench_genalpha_step)->Arg(8)->Arg(16);

void bench_bisect(benchmark::State& state) {
  const ProblemSpec spec = eriksson_johnson_1d(0.1);
  const Mesh mesh = problem_mesh(spec, 16, 16);
  std::vector<int> marked;
  for (int t = 0; t < mesh.n_triangles(); t += 3) marked.push_back(t);
  for (auto _ : state) benchmark::DoNotOptimize(bisect(mesh, marked));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(marked.size()));
}
BENCHMARK(bench_bisect);

void bench_basis_eval(benchmark::State& state) {
  std::vector<Vec2> pts;
  for (int i = 0; i < 64; ++i) pts.emplace_back(0.3 + 0.001 * i, 0.2 + 0.002 * i);
  for (auto _ : state)
    benchmark::DoNotOptimize(eval_basis(static_cast<int>(state.range(0)), pts));
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(bench_basis_eval)->Arg(1)->Arg(2);

} // namespace

BENCHMARK_MAIN();
