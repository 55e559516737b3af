#include <benchmark/benchmark.h>

#include "nngsat/cnf.hpp"
#include "nngsat/mpnn.hpp"
#include "nngsat/solver.hpp"
#include "nngsat/structures.hpp"

using namespace nngsat;

static void BM_SolveRandom3Sat(benchmark::State& state) {
    int n = (int)state.range(0);
    Cnf f = random_3sat(n, 4.3, 7);
    for (auto _ : state) {
        SolverOutcome out = solve(f, {}, SolveBudget::unlimited(), 1);
        benchmark::DoNotOptimize(out.status);
    }
}
BENCHMARK(BM_SolveRandom3Sat)->Arg(50)->Arg(75)->Arg(100);

static void BM_SolveMultiplierMiter(benchmark::State& state) {
    int n = (int)state.range(0);
    Circuit c = gen_multiplier(n, n);
    Miter m = build_miter(c);
    for (auto _ : state) {
        SolverOutcome out = solve(m.cnf, {}, SolveBudget::unlimited(), 1);
        benchmark::DoNotOptimize(out.status);
    }
}
BENCHMARK(BM_SolveMultiplierMiter)->Arg(3)->Arg(4);

static void BM_MpForward(benchmark::State& state) {
    int n = (int)state.range(0);
    Cnf f = random_3sat(n, 4.3, 7);
    GraphEncoding g = encode_graph(f);
    MpnnModel model = MpnnModel::init(32, 1);
    for (auto _ : state) {
        VoteTrace tr = mp_forward(model, g, 26);
        benchmark::DoNotOptimize(tr.cr);
    }
}
BENCHMARK(BM_MpForward)->Arg(40)->Arg(200);

static void BM_LossAndGrad(benchmark::State& state) {
    Cnf f = random_3sat((int)state.range(0), 4.3, 7);
    GraphEncoding g = encode_graph(f);
    MpnnModel model = MpnnModel::init(32, 1);
    for (auto _ : state) {
        LossResult lr = loss_and_grad(model, g, true, 26);
        benchmark::DoNotOptimize(lr.loss);
    }
}
BENCHMARK(BM_LossAndGrad)->Arg(40);

BENCHMARK_MAIN();
