#pragma once

#include "evorl/adam.hpp"
#include "evorl/env.hpp"
#include "evorl/mlp.hpp"
#include "evorl/normalizer.hpp"
#include "evorl/policy.hpp"
#include "evorl/rng.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace evorl {

struct LrSchedule
{
    enum class Kind { constant, linear };
    Kind kind = Kind::constant;
    double start = 2.5e-4;
    double end = 2.5e-4;

    /// Learning rate at training progress in [0, 1].
    double at(double progress) const;
};

struct PpoConfig
{
    double clip = 0.2;       // actor ratio clip
    double value_clip = 0.5; // critic clip around the collecting value
    double entropy_coef = 0.0;
    std::size_t rollout_steps = 512;
    std::size_t minibatch = 128;
    std::size_t epochs = 10;
    double gamma = 0.99;
    double lambda = 0.95;
    LrSchedule lr{};
    bool normalize_advantages = true;
    double max_grad_norm = 0.5;
    std::vector<std::size_t> hidden{256, 256};
    double initial_log_std = 0.0;
    std::size_t eval_episodes = 3; // deterministic evaluation after each update

    void validate() const;
};

/// One rollout of on-policy experience. Observations are stored normalized
/// with the statistics in force when they were collected.
struct RolloutBuffer
{
    std::size_t obs_dim = 0;
    std::size_t act_dim = 0;
    std::vector<double> obs;     // n x obs_dim
    std::vector<double> actions; // n x act_dim, unclamped samples
    std::vector<double> log_probs;
    std::vector<double> rewards;
    std::vector<double> dones;
    std::vector<double> values;
    double last_value = 0.0; // bootstrap value of the state after the last step
    std::vector<double> advantages;
    std::vector<double> returns;
    std::vector<double> raw_obs; // unnormalized, for the normalizer update
    std::vector<double> episode_returns; // returns of episodes that finished in this rollout

    std::size_t size() const { return rewards.size(); }
};

struct PpoState
{
    ParamVector actor;  // Gaussian mean head with state-independent log-sigma
    ParamVector critic; // scalar value
    Adam actor_opt;
    Adam critic_opt;
    std::uint64_t steps = 0;
    std::uint64_t updates = 0;
    ObsNormalizer normalizer;
};

PpoState make_ppo_state(std::size_t obs_dim, std::size_t act_dim, const PpoConfig& config, std::uint64_t seed);

/// Environment cursor that persists across rollouts (episodes continue over
/// rollout boundaries).
struct RolloutCursor
{
    std::unique_ptr<Env> env;
    std::vector<double> obs;
    std::uint64_t episode_seed_key = 0;
    std::uint64_t episodes_started = 0;
    double running_return = 0.0;
};

RolloutCursor make_cursor(const Env& prototype, std::uint64_t seed);

class PpoDivergence : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

RolloutBuffer collect_rollout(const PpoState& state, RolloutCursor& cursor, std::size_t n_steps, Rng& rng);

/// GAE advantages and return targets (advantage + value), unnormalized.
void compute_gae(RolloutBuffer& buffer, double gamma, double lambda);

/// min(r A, clip(r, 1 - eps, 1 + eps) A).
double clipped_objective(double ratio, double advantage, double eps);

struct LossAndGrad
{
    double loss = 0.0;
    std::vector<double> grad;
    double entropy = 0.0;
    double clip_fraction = 0.0;
};

/// Negated mean clipped surrogate minus entropy bonus over `indices`, with
/// its gradient for the actor. `advantages` are the (possibly normalized)
/// advantages aligned with the buffer.
LossAndGrad ppo_surrogate(const RolloutBuffer& buffer, std::span<const std::size_t> indices,
                          std::span<const double> advantages, const ParamVector& actor, double clip,
                          double entropy_coef);

/// Mean of max((V - R)^2, (V_old + clip(V - V_old, +-c) - R)^2) and its gradient.
LossAndGrad value_loss(const RolloutBuffer& buffer, std::span<const std::size_t> indices, const ParamVector& critic,
                       double value_clip);

struct UpdateStats
{
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
};

/// Epochs of shuffled minibatch Adam steps on actor and critic. `progress`
/// in [0, 1] selects the learning rate.
UpdateStats ppo_update(PpoState& state, RolloutBuffer& buffer, const PpoConfig& config, Rng& rng, double progress);

Policy ppo_policy(const PpoState& state);

struct PpoUpdateReport
{
    std::uint64_t update = 0;
    std::uint64_t steps = 0;
    double mean_return = 0.0; // mean of episodes finished during the rollout (NaN if none)
    double best_return = 0.0;
    double eval_return = 0.0; // deterministic evaluation of the updated policy
    UpdateStats stats;
};

struct PpoRun
{
    PpoState state;
    std::vector<PpoUpdateReport> reports;
    Policy best_policy;
    double best_eval = 0.0;
};

struct PpoRunOptions
{
    std::function<void(const PpoUpdateReport&, const Policy& evaluated)> on_update;
    std::uint64_t eval_seed_key = 0;
};

PpoRun train_ppo(const PpoConfig& config, const Env& prototype, std::uint64_t budget, std::uint64_t seed,
                 const PpoRunOptions& options = {});

/// Mean deterministic return of `policy` over `episodes` episodes keyed by `key`.
double evaluate_deterministic(const Policy& policy, const Env& prototype, std::size_t episodes, std::uint64_t key);

} // namespace evorl
