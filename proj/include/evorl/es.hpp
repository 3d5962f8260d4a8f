#pragma once

#include "evorl/adam.hpp"
#include "evorl/normalizer.hpp"
#include "evorl/rng.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace evorl {

enum class SeedMode { independent, super_symmetric };
enum class FitnessMode { centered_rank, raw_paired_difference };

std::string to_string(SeedMode m);
std::string to_string(FitnessMode m);
SeedMode parse_seed_mode(const std::string& s);
FitnessMode parse_fitness_mode(const std::string& s);

struct EsConfig
{
    double sigma = 0.02;
    double step_size = 0.01;
    std::size_t pop_pairs = 20;
    std::size_t episodes_per_eval = 1;
    double weight_decay = 0.005;
    SeedMode seed_mode = SeedMode::independent;
    FitnessMode fitness_mode = FitnessMode::centered_rank;
    AdamParams adam{};
    double obs_sample_rate = 0.01;
    std::size_t center_eval_episodes = 1;

    void validate() const;
};

/// Search-distribution mean plus optimizer and normalizer state.
struct EsState
{
    std::vector<double> center;
    Adam adam;
    std::uint64_t generation = 0;
    std::uint64_t eval_steps = 0;  // offspring environment steps consumed
    std::uint64_t evaluations = 0; // offspring evaluations performed
    ObsNormalizer normalizer;
    std::uint64_t master_seed = 0;
};

EsState make_es_state(std::vector<double> center, std::uint64_t master_seed, std::size_t obs_dim = 0,
                      AdamParams adam = {});

/// One antithetic couple: theta + sigma*eps and theta - sigma*eps.
struct PerturbationPair
{
    std::size_t pair_index = 0;
    std::uint64_t noise_seed = 0;
    std::uint64_t eval_seed_plus = 0;
    std::uint64_t eval_seed_minus = 0;
    double fitness_plus = 0.0;
    double fitness_minus = 0.0;
};

/// Regenerates the perturbation direction of a pair.
std::vector<double> perturbation(std::uint64_t noise_seed, std::size_t dim);

std::vector<PerturbationPair> sample_perturbations(const EsState& state, const EsConfig& config);

/// independent: 2N fresh episode seeds; super_symmetric: N fresh seeds, each
/// shared by both members of its pair.
void assign_seeds(std::span<PerturbationPair> pairs, SeedMode mode, Rng& rng);

/// Centered ranks in [-0.5, 0.5]; ties receive their average rank.
std::vector<double> shape_fitness(std::span<const double> raw);

/// Ascent direction (1 / (2 N sigma)) * sum_pairs (u_plus - u_minus) * eps.
/// `utilities` holds 2N values ordered (plus, minus) per pair index.
/// Pairs are reduced in pair_index order whatever order they arrive in.
std::vector<double> estimate_gradient(std::span<const PerturbationPair> pairs, std::span<const double> utilities,
                                      double sigma, std::size_t dim);

/// Adam ascent on the center, then multiplicative weight decay.
void es_step(EsState& state, std::span<const double> gradient, const EsConfig& config);

struct EvalResult
{
    double fitness = 0.0;
    std::uint64_t steps = 0;
};

/// Read-only context shared by all evaluations of a generation.
struct EvalContext
{
    const ObsNormalizer* normalizer = nullptr;
    double obs_sample_rate = 0.0;
};

/// Fitness function over parameter vectors. evaluate() must be thread-safe
/// and a pure function of (params, eval_seed, context).
class Objective
{
public:
    virtual ~Objective() = default;
    virtual std::size_t dim() const = 0;
    virtual std::size_t observation_dim() const { return 0; }
    /// `sampled_obs` (may be null) receives a subsample of raw observations.
    virtual EvalResult evaluate(std::span<const double> params, std::uint64_t eval_seed, std::size_t episodes,
                                const EvalContext& ctx, std::vector<double>* sampled_obs) const = 0;
};

struct GenerationReport
{
    std::uint64_t generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    double center_fitness = 0.0;
    double gradient_norm = 0.0;
    std::uint64_t eval_steps = 0;
    std::uint64_t evaluations = 0;
};

struct EsRunOptions
{
    int workers = 1; // 0 = serial reference kernel
    std::function<void(const GenerationReport&, const EsState&)> on_generation;
    std::size_t max_generations = 0; // 0 = unlimited
};

struct EsRun
{
    EsState state;
    std::vector<GenerationReport> reports;
    std::vector<double> best_center; // center with the highest center evaluation
    ObsNormalizer best_normalizer;
    double best_center_fitness = 0.0;
};

/// Runs generations until `eval_step_budget` offspring steps have been used
/// (or max_generations is reached). Deterministic in the master seed and
/// independent of the worker count.
EsRun evolve(EsState state, const EsConfig& config, const Objective& objective, std::uint64_t eval_step_budget,
             const EsRunOptions& options = {});

/// Single generation; exposed for tests and custom loops.
GenerationReport es_generation(EsState& state, const EsConfig& config, const Objective& objective,
                               int workers, std::vector<double>* gradient_out = nullptr);

} // namespace evorl
