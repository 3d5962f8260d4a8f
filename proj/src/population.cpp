#include "evorl/population.hpp"

#include <omp.h>

#include <exception>
#include <stdexcept>
#include <string>

namespace evorl {

namespace {

OffspringResult evaluate_member(const Objective& objective, std::span<const double> center, double sigma,
                                const PerturbationPair& pair, bool minus, std::size_t episodes,
                                const EvalContext& ctx)
{
    const std::vector<double> eps = perturbation(pair.noise_seed, center.size());
    std::vector<double> theta(center.begin(), center.end());
    const double s = minus ? -sigma : sigma;
    for (std::size_t k = 0; k < theta.size(); ++k)
        theta[k] += s * eps[k];
    OffspringResult r;
    const std::uint64_t seed = minus ? pair.eval_seed_minus : pair.eval_seed_plus;
    const EvalResult e = objective.evaluate(theta, seed, episodes, ctx, ctx.obs_sample_rate > 0.0 ? &r.sampled_obs : nullptr);
    r.fitness = e.fitness;
    r.steps = e.steps;
    return r;
}

} // namespace

std::vector<OffspringResult> evaluate_population_serial(const Objective& objective, std::span<const double> center,
                                                        double sigma, std::span<const PerturbationPair> pairs,
                                                        std::size_t episodes, const EvalContext& ctx)
{
    std::vector<OffspringResult> out(2 * pairs.size());
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = evaluate_member(objective, center, sigma, pairs[j / 2], j % 2 == 1, episodes, ctx);
    return out;
}

std::vector<OffspringResult> evaluate_population_omp(const Objective& objective, std::span<const double> center,
                                                     double sigma, std::span<const PerturbationPair> pairs,
                                                     std::size_t episodes, const EvalContext& ctx, int workers)
{
    std::vector<OffspringResult> out(2 * pairs.size());
    const long n = static_cast<long>(out.size());
    std::exception_ptr failure;
    long failed_at = -1;
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers > 0 ? workers : 1)
    for (long j = 0; j < n; ++j) {
        try {
            out[static_cast<std::size_t>(j)] =
                evaluate_member(objective, center, sigma, pairs[static_cast<std::size_t>(j) / 2], j % 2 == 1, episodes, ctx);
        }
        catch (...) {
#pragma omp critical(evorl_population_failure)
            if (!failure || j < failed_at) {
                failure = std::current_exception();
                failed_at = j;
            }
        }
    }
    if (failure)
        std::rethrow_exception(failure);
    return out;
}

std::vector<OffspringResult> evaluate_population(const Objective& objective, std::span<const double> center,
                                                 double sigma, std::span<const PerturbationPair> pairs,
                                                 std::size_t episodes, const EvalContext& ctx, int workers)
{
    if (workers <= 0)
        return evaluate_population_serial(objective, center, sigma, pairs, episodes, ctx);
    return evaluate_population_omp(objective, center, sigma, pairs, episodes, ctx, workers);
}

} // namespace evorl
