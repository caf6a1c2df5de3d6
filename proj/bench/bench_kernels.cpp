// Serial vs parallel kernels and per-step solver cost.
// Run: ./rowsolve_bench --benchmark_filter=Gemv

#include <benchmark/benchmark.h>

#include "rowsolve/kernels.hpp"
#include "rowsolve/problems.hpp"
#include "rowsolve/solvers.hpp"

using namespace rowsolve;

namespace {

const ProblemInstance& preset()
{
    static const ProblemInstance inst = example1(50, 0.1, 1);
    return inst;
}

const ProblemInstance& tomo()
{
    static const ProblemInstance inst = tomography(32, 48, 48, 1);
    return inst;
}

template <bool Parallel>
void BM_Gemv(benchmark::State& state)
{
    const MatrixStore& a = state.range(0) ? tomo().a : preset().a;
    std::vector<double> x(a.cols(), 1.0), y(a.rows());
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::parallel::gemv(a, x, y);
        else
            kernels::serial::gemv(a, x, y);
        benchmark::DoNotOptimize(y.data());
    }
}

template <bool Parallel>
void BM_GramRows(benchmark::State& state)
{
    const MatrixStore& a = preset().a;
    for (auto _ : state) {
        auto g = Parallel ? kernels::parallel::gram_rows(a) : kernels::serial::gram_rows(a);
        benchmark::DoNotOptimize(g.values().data());
    }
}

void BM_Step(benchmark::State& state)
{
    const ProblemInstance& inst = preset();
    SolverConfig c;
    c.method = static_cast<Method>(state.range(0));
    c.tau_rows = c.tau_cols = 10;
    c.exec = state.range(1) ? ExecMode::matvec : ExecMode::cached;
    SolverSession s(c, inst.a, inst.b);
    auto st = s.initial_state(0);
    for (auto _ : state) s.step(st);
    state.SetLabel(to_string(c.method) + "/" + to_string(s.exec_mode()));
}

}  // namespace

BENCHMARK(BM_Gemv<false>)->Arg(0)->Arg(1);
BENCHMARK(BM_Gemv<true>)->Arg(0)->Arg(1);
BENCHMARK(BM_GramRows<false>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GramRows<true>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Step)
    ->ArgsProduct({{static_cast<int>(Method::rmr), static_cast<int>(Method::ermr), static_cast<int>(Method::gek),
                    static_cast<int>(Method::reabk)},
                   {0, 1}});

BENCHMARK_MAIN();
