#pragma once

#include "evorl/es.hpp"

#include <span>
#include <vector>

namespace evorl {

struct OffspringResult
{
    double fitness = 0.0;
    std::uint64_t steps = 0;
    std::vector<double> sampled_obs;
};

/// Evaluates the 2N offspring center +/- sigma*eps_i. Slot 2i is the plus
/// member of pairs[i], slot 2i+1 the minus member.
///
/// The serial kernel is the reference; the OpenMP kernel must return
/// bit-identical results for any worker count.
std::vector<OffspringResult> evaluate_population_serial(const Objective& objective, std::span<const double> center,
                                                        double sigma, std::span<const PerturbationPair> pairs,
                                                        std::size_t episodes, const EvalContext& ctx);

std::vector<OffspringResult> evaluate_population_omp(const Objective& objective, std::span<const double> center,
                                                     double sigma, std::span<const PerturbationPair> pairs,
                                                     std::size_t episodes, const EvalContext& ctx, int workers);

/// Dispatch: workers <= 0 selects the serial kernel.
std::vector<OffspringResult> evaluate_population(const Objective& objective, std::span<const double> center,
                                                 double sigma, std::span<const PerturbationPair> pairs,
                                                 std::size_t episodes, const EvalContext& ctx, int workers);

} // namespace evorl
