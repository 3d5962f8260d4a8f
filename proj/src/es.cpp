#include "evorl/es.hpp"

#include "evorl/population.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace evorl {

namespace {
constexpr std::uint64_t tag_noise = 0x6e6f697365ULL;
constexpr std::uint64_t tag_seeds = 0x7365656473ULL;
constexpr std::uint64_t tag_center = 0x63656e746572ULL;
} // namespace

std::string to_string(SeedMode m)
{
    return m == SeedMode::independent ? "independent" : "super_symmetric";
}

std::string to_string(FitnessMode m)
{
    return m == FitnessMode::centered_rank ? "centered_rank" : "raw_paired_difference";
}

SeedMode parse_seed_mode(const std::string& s)
{
    if (s == "independent")
        return SeedMode::independent;
    if (s == "super_symmetric")
        return SeedMode::super_symmetric;
    throw std::invalid_argument("unknown seed mode '" + s + "'");
}

FitnessMode parse_fitness_mode(const std::string& s)
{
    if (s == "centered_rank")
        return FitnessMode::centered_rank;
    if (s == "raw_paired_difference")
        return FitnessMode::raw_paired_difference;
    throw std::invalid_argument("unknown fitness mode '" + s + "'");
}

void EsConfig::validate() const
{
    if (!(sigma > 0.0))
        throw std::invalid_argument("EsConfig: sigma must be > 0");
    if (pop_pairs < 1)
        throw std::invalid_argument("EsConfig: pop_pairs must be >= 1");
    if (!(weight_decay >= 0.0 && weight_decay < 1.0))
        throw std::invalid_argument("EsConfig: weight_decay must lie in [0, 1)");
    if (episodes_per_eval < 1 || center_eval_episodes < 1)
        throw std::invalid_argument("EsConfig: episode counts must be >= 1");
}

EsState make_es_state(std::vector<double> center, std::uint64_t master_seed, std::size_t obs_dim, AdamParams adam)
{
    EsState s;
    s.adam = Adam(center.size(), adam);
    s.center = std::move(center);
    s.master_seed = master_seed;
    s.normalizer = ObsNormalizer(obs_dim);
    return s;
}

std::vector<double> perturbation(std::uint64_t noise_seed, std::size_t dim)
{
    Rng rng = make_rng(noise_seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::vector<double> eps(dim);
    for (double& e : eps)
        e = n01(rng);
    return eps;
}

std::vector<PerturbationPair> sample_perturbations(const EsState& state, const EsConfig& config)
{
    std::vector<PerturbationPair> pairs(config.pop_pairs);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        pairs[i].pair_index = i;
        pairs[i].noise_seed = derive_key({state.master_seed, state.generation, i, tag_noise});
    }
    return pairs;
}

void assign_seeds(std::span<PerturbationPair> pairs, SeedMode mode, Rng& rng)
{
    for (auto& p : pairs) {
        p.eval_seed_plus = rng();
        p.eval_seed_minus = mode == SeedMode::super_symmetric ? p.eval_seed_plus : rng();
    }
}

std::vector<double> shape_fitness(std::span<const double> raw)
{
    const std::size_t n = raw.size();
    for (double f : raw)
        if (!std::isfinite(f))
            throw std::invalid_argument("shape_fitness: non-finite fitness value");
    std::vector<double> u(n, 0.0);
    if (n < 2)
        return u;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && raw[order[j + 1]] == raw[order[i]])
            ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + j);
        for (std::size_t k = i; k <= j; ++k)
            u[order[k]] = avg_rank / static_cast<double>(n - 1) - 0.5;
        i = j + 1;
    }
    return u;
}

std::vector<double> estimate_gradient(std::span<const PerturbationPair> pairs, std::span<const double> utilities,
                                      double sigma, std::size_t dim)
{
    if (utilities.size() != 2 * pairs.size())
        throw std::invalid_argument("estimate_gradient: need two utilities per pair");
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return pairs[a].pair_index < pairs[b].pair_index; });

    std::vector<double> g(dim, 0.0);
    for (std::size_t pos : order) {
        const double diff = utilities[2 * pos] - utilities[2 * pos + 1];
        if (diff == 0.0)
            continue;
        const std::vector<double> eps = perturbation(pairs[pos].noise_seed, dim);
        for (std::size_t k = 0; k < dim; ++k)
            g[k] += diff * eps[k];
    }
    const double scale = 1.0 / (2.0 * static_cast<double>(pairs.size()) * sigma);
    for (double& v : g)
        v *= scale;
    return g;
}

void es_step(EsState& state, std::span<const double> gradient, const EsConfig& config)
{
    if (gradient.size() != state.center.size())
        throw std::invalid_argument("es_step: gradient length does not match center");
    for (double g : gradient)
        if (!std::isfinite(g))
            throw std::invalid_argument("es_step: non-finite gradient");
    state.adam.ascend(state.center, gradient, config.step_size);
    if (config.weight_decay > 0.0)
        for (double& c : state.center)
            c *= 1.0 - config.weight_decay;
    ++state.generation;
}

GenerationReport es_generation(EsState& state, const EsConfig& config, const Objective& objective, int workers,
                               std::vector<double>* gradient_out)
{
    config.validate();
    if (state.center.size() != objective.dim())
        throw std::invalid_argument("evolve: center length " + std::to_string(state.center.size()) +
                                    " does not match objective dimension " + std::to_string(objective.dim()));

    std::vector<PerturbationPair> pairs = sample_perturbations(state, config);
    Rng seed_rng = make_rng(derive_key({state.master_seed, state.generation, tag_seeds}));
    assign_seeds(pairs, config.seed_mode, seed_rng);

    const bool observes = objective.observation_dim() > 0;
    EvalContext ctx;
    ctx.normalizer = observes ? &state.normalizer : nullptr;
    ctx.obs_sample_rate = observes ? config.obs_sample_rate : 0.0;

    std::vector<OffspringResult> results;
    try {
        results = evaluate_population(objective, state.center, config.sigma, pairs, config.episodes_per_eval, ctx,
                                      workers);
    }
    catch (const std::exception& e) {
        throw std::runtime_error("generation " + std::to_string(state.generation) + ": " + e.what());
    }

    std::vector<double> raw(results.size());
    GenerationReport rep;
    rep.generation = state.generation;
    rep.best_fitness = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (std::size_t j = 0; j < results.size(); ++j) {
        raw[j] = results[j].fitness;
        if (!std::isfinite(raw[j]))
            throw std::runtime_error("generation " + std::to_string(state.generation) + ": non-finite fitness");
        rep.best_fitness = std::max(rep.best_fitness, raw[j]);
        sum += raw[j];
        state.eval_steps += results[j].steps;
        ++state.evaluations;
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        pairs[i].fitness_plus = raw[2 * i];
        pairs[i].fitness_minus = raw[2 * i + 1];
    }
    rep.mean_fitness = sum / static_cast<double>(raw.size());

    const std::vector<double> utilities =
        config.fitness_mode == FitnessMode::centered_rank ? shape_fitness(raw) : raw;
    std::vector<double> grad = estimate_gradient(pairs, utilities, config.sigma, state.center.size());
    double gn = 0.0;
    for (double g : grad)
        gn += g * g;
    rep.gradient_norm = std::sqrt(gn);

    const EvalResult center_eval = objective.evaluate(
        state.center, derive_key({state.master_seed, state.generation, tag_center}), config.center_eval_episodes, ctx,
        nullptr);
    rep.center_fitness = center_eval.fitness;

    es_step(state, grad, config);

    if (observes) {
        std::vector<double> merged;
        for (const auto& r : results)
            merged.insert(merged.end(), r.sampled_obs.begin(), r.sampled_obs.end());
        state.normalizer.update(merged, merged.size() / objective.observation_dim());
    }
    rep.eval_steps = state.eval_steps;
    rep.evaluations = state.evaluations;
    if (gradient_out)
        *gradient_out = std::move(grad);
    return rep;
}

EsRun evolve(EsState state, const EsConfig& config, const Objective& objective, std::uint64_t eval_step_budget,
             const EsRunOptions& options)
{
    EsRun run;
    run.best_center = state.center;
    run.best_normalizer = state.normalizer;
    run.best_center_fitness = -std::numeric_limits<double>::infinity();
    std::size_t gens = 0;
    while (state.eval_steps < eval_step_budget && (options.max_generations == 0 || gens < options.max_generations)) {
        std::vector<double> center_before = state.center;
        ObsNormalizer norm_before = state.normalizer;
        GenerationReport rep = es_generation(state, config, objective, options.workers);
        if (rep.center_fitness > run.best_center_fitness) {
            run.best_center_fitness = rep.center_fitness;
            run.best_center = std::move(center_before);
            run.best_normalizer = std::move(norm_before);
        }
        run.reports.push_back(rep);
        if (options.on_generation)
            options.on_generation(rep, state);
        ++gens;
    }
    run.state = std::move(state);
    return run;
}

} // namespace evorl
