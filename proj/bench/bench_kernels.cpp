// Serial vs OpenMP timing of the per-segment growth and solid kernels on a
// TEVG history tiled to 24 * range(0) segments.

#include "cmv/kernels.hpp"
#include "cmv/scenario.hpp"

#include <benchmark/benchmark.h>

using namespace cmv;

namespace {

struct Workload {
    std::vector<VesselSegment> segments;
    std::vector<GrowthInput> growth;
    std::vector<SolidInput> solid;
};

Workload make_workload(int tiles) {
    ScenarioConfig sc = load_preset("tevg-interposition");
    sc.coupling.t_max = 20.0;
    run_simulation(sc.vessel, sc.coupling);
    Vessel& v = sc.vessel;
    const double s = v.time + sc.coupling.ds;

    Workload w;
    for (int t = 0; t < tiles; ++t)
        for (std::size_t i = 0; i < v.segments.size(); ++i) {
            VesselSegment seg = v.segments[i];
            MixtureState& ms = seg.mixture;
            std::vector<double> m(ms.size());
            for (std::size_t a = 0; a < ms.size(); ++a) m[a] = ms.constituents[a].cohorts.back().m_r;
            ms.open_step(s, v.status[i].dsigma, v.status[i].dtau, m);
            w.segments.push_back(std::move(seg));

            GrowthInput g;
            g.p_kpa = v.status[i].p / kPaToDynCm2;
            g.wss = v.status[i].wss;
            g.sigma_h = v.sigma_h[i];
            g.tau_h = v.tau_h[i];
            g.s = s;
            g.invariant = v.homeostasis.invariant;
            g.balance_ds = sc.coupling.ds;
            w.growth.push_back(g);

            SolidInput si;
            si.p_kpa = g.p_kpa;
            si.j_target = v.status[i].j_target;
            si.dtau = v.status[i].dtau;
            si.k_p = sc.coupling.k_p;
            si.stress_scale = std::abs(v.sigma_h[i]);
            si.solver = sc.coupling.solid;
            w.solid.push_back(si);
        }
    return w;
}

void growth(benchmark::State& state, Execution ex) {
    Workload w = make_workload(static_cast<int>(state.range(0)));
    std::vector<GrowthOutput> out;
    for (auto _ : state) {
        growth_all(w.segments, w.growth, out, ex);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(w.segments.size()));
}

void solid(benchmark::State& state, Execution ex) {
    const Workload w = make_workload(static_cast<int>(state.range(0)));
    std::vector<Tensor2> out;
    for (auto _ : state) {
        solid_all(w.segments, w.solid, out, ex);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(w.segments.size()));
}

} // namespace

BENCHMARK_CAPTURE(growth, serial, Execution::Serial)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(growth, parallel, Execution::Parallel)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(solid, serial, Execution::Serial)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(solid, parallel, Execution::Parallel)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
