#include <benchmark/benchmark.h>

#include "hystab/experiments.hpp"
#include "hystab/geometry.hpp"
#include "hystab/simulate.hpp"
#include "hystab/synth.hpp"

using namespace hystab;

namespace {

static void BM_JacobiEig5(benchmark::State& state) {
    Matrix p{{1, 1, 0, -1.5, -2},
             {1, 7.74, 5.51, -8.74, -15.86},
             {0, 5.51, 7.4, -5.51, -14.36},
             {-1.5, -8.74, -5.51, 10.24, 17.86},
             {-2, -15.86, -14.36, 17.86, 38.36}};
    for (auto _ : state) benchmark::DoNotOptimize(eig_symmetric(p).values.back());
}
BENCHMARK(BM_JacobiEig5);

static void BM_StorageClosedForm(benchmark::State& state) {
    auto op = DuhemOperator::coleman_hodgdon(1e-2, 2.5e-3, 5e-3);
    StorageEvaluator eval(op);
    double g = 0.05;
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval.storage_ccw(g, 1.0).value);
        g = -g;
    }
}
BENCHMARK(BM_StorageClosedForm);

static void BM_StorageGeneric(benchmark::State& state) {
    auto op = DuhemOperator::coleman_hodgdon(1e-2, 2.5e-3, 5e-3);
    GeomOptions gen;
    gen.route = Route::Generic;
    for (auto _ : state) {
        StorageEvaluator eval(op, gen);  // fresh cache: full traversing solve
        benchmark::DoNotOptimize(eval.storage_ccw(0.05, 1.0).value);
    }
}
BENCHMARK(BM_StorageGeneric);

static void BM_ClosedLoopStep(benchmark::State& state) {
    auto setup = make_experiment("vii_a_negative");
    SimulateOptions opt;
    opt.dt = 1e-3;
    opt.output_every = 1000000;
    for (auto _ : state) {
        auto traj = simulate_closed_loop(setup.ic, setup.run.x0, 1.0, opt);
        benchmark::DoNotOptimize(traj.y_phi.back());
    }
    state.SetItemsProcessed(state.iterations() * 1000);  // RK4 steps per run
}
BENCHMARK(BM_ClosedLoopStep);

static void BM_CertVerify5x5(benchmark::State& state) {
    auto setup = make_experiment("vii_a_negative");
    const auto& cert = std::get<CertificateCwCcw>(setup.certificate);
    for (auto _ : state) benchmark::DoNotOptimize(verify_cw_ccw(setup.ic.sys, cert).pass());
}
BENCHMARK(BM_CertVerify5x5);

static void BM_FeasibilitySearchCaseB(benchmark::State& state) {
    auto setup = make_experiment("vii_a_negative");
    Matrix l{{0, 0, 0.25, 0, 0}};
    SearchHints hints;
    hints.L = &l;
    for (auto _ : state)
        benchmark::DoNotOptimize(feasibility_search(setup.ic.sys, FeedbackCase::B, hints));
}
BENCHMARK(BM_FeasibilitySearchCaseB);

}  // namespace

BENCHMARK_MAIN();
