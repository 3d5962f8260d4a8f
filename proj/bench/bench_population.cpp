#include "evorl/envs/hopper.hpp"
#include "evorl/objectives.hpp"
#include "evorl/population.hpp"

#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

using namespace evorl;

namespace {

struct Fixture
{
    std::unique_ptr<PolicyObjective> objective;
    EsState state;
    EsConfig config;
    std::vector<PerturbationPair> pairs;
    ObsNormalizer normalizer;
};

// 40 hopper rollouts of a 64-unit policy: the per-generation cost in a real run.
const Fixture& fixture()
{
    static const Fixture f = [] {
        Fixture x;
        HopperEnv env;
        const ActionMode mode = ActionMode::deterministic();
        x.objective = std::make_unique<PolicyObjective>(env, es_policy_spec(env, {64}, mode), mode);
        Rng init = make_rng(5);
        std::vector<double> center(x.objective->dim());
        for (double& v : center)
            v = 0.1 * standard_normal(init);
        x.state = make_es_state(std::move(center), 11, env.observation_dim());
        x.pairs = sample_perturbations(x.state, x.config);
        Rng rng = make_rng(7);
        assign_seeds(x.pairs, SeedMode::independent, rng);
        x.normalizer = x.state.normalizer;
        return x;
    }();
    return f;
}

void BM_population_serial(benchmark::State& st)
{
    const Fixture& f = fixture();
    EvalContext ctx{&f.normalizer, 0.0};
    for (auto _ : st) {
        auto r = evaluate_population_serial(*f.objective, f.state.center, f.config.sigma, f.pairs, 1, ctx);
        benchmark::DoNotOptimize(r.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(2 * f.pairs.size()));
}

void BM_population_omp(benchmark::State& st)
{
    const Fixture& f = fixture();
    EvalContext ctx{&f.normalizer, 0.0};
    const int workers = static_cast<int>(st.range(0));
    for (auto _ : st) {
        auto r = evaluate_population_omp(*f.objective, f.state.center, f.config.sigma, f.pairs, 1, ctx, workers);
        benchmark::DoNotOptimize(r.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(2 * f.pairs.size()));
    st.counters["workers"] = workers;
}

} // namespace

BENCHMARK(BM_population_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_population_omp)
    ->DenseRange(1, 4)
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
