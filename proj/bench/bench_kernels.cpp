// Reference vs OpenMP kernels for rate and Redfield assembly.

#include <benchmark/benchmark.h>

#include "darkchain/brme.hpp"
#include "darkchain/experiments.hpp"

using namespace darkchain;

namespace {

NetworkModel model(int n) {
    PointSpec p;
    p.cell.shape = CellShape::Prism;
    p.n_cells = n;
    p.hparams.Jb = 10.0;
    return build_point_model(p);
}

void rates(benchmark::State& st, Exec exec) {
    const auto m = model(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(transition_matrix(m.es, m.channels, exec));
    st.SetLabel("D=" + std::to_string(m.es.dim()));
}

void redfield(benchmark::State& st, Exec exec) {
    const auto m = model(static_cast<int>(st.range(0)));
    LiouvillianOptions opt;
    opt.exec = exec;
    for (auto _ : st) benchmark::DoNotOptimize(build_liouvillian(m.es, m.channels, opt));
    st.SetLabel("D=" + std::to_string(m.es.dim()));
}

void pme(benchmark::State& st) {
    const auto m = model(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(solve_pme(m));
}

}  // namespace

BENCHMARK_CAPTURE(rates, reference, Exec::Serial)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(rates, parallel, Exec::Parallel)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(redfield, reference, Exec::Serial)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(redfield, parallel, Exec::Parallel)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(pme)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
