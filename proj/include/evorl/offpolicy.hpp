#pragma once

#include "evorl/adam.hpp"
#include "evorl/env.hpp"
#include "evorl/mlp.hpp"
#include "evorl/policy.hpp"
#include "evorl/replay.hpp"
#include "evorl/rng.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace evorl {

struct RlCommonConfig
{
    double gamma = 0.99;
    double tau = 0.005; // polyak coefficient
    std::size_t batch_size = 256;
    double target_noise = 0.2; // TD3 target-policy smoothing std
    double noise_clip = 0.5;
    std::size_t policy_delay = 2;
    std::size_t warmup_steps = 1000; // uniform random actions before learning starts
    std::size_t buffer_capacity = 1000000;
    double actor_lr = 3e-4;
    double critic_lr = 3e-4;
    std::vector<std::size_t> hidden{64, 64};
    double exploration_noise = 0.1; // TD3 behaviour noise std
    double alpha = 0.2;             // SAC entropy coefficient (fixed)
    std::size_t eval_interval = 5000;
    std::size_t eval_episodes = 3;

    void validate() const;
};

/// Twin critics, their targets, and the Adam state of the online copies.
struct TwinCritics
{
    ParamVector q1, q2;
    ParamVector q1_target, q2_target;
    Adam opt1, opt2;
};

struct Td3State
{
    ParamVector actor; // tanh-output deterministic policy
    ParamVector actor_target;
    Adam actor_opt;
    TwinCritics critics;
    std::uint64_t critic_updates = 0;
    std::uint64_t steps = 0;
};

struct SacState
{
    ParamVector actor; // outputs [mean, log_std] of the pre-squash Gaussian
    Adam actor_opt;
    TwinCritics critics;
    double alpha = 0.2;
    std::uint64_t updates = 0;
    std::uint64_t steps = 0;
};

Td3State make_td3_state(std::size_t obs_dim, std::size_t act_dim, const RlCommonConfig& config, std::uint64_t seed);
SacState make_sac_state(std::size_t obs_dim, std::size_t act_dim, const RlCommonConfig& config, std::uint64_t seed);

/// Q(s, a) for every row of a batch; `critic` takes the concatenation [s, a].
std::vector<double> q_values(const ParamVector& critic, std::span<const double> obs, std::span<const double> actions,
                             std::size_t count);

/// Deterministic TD3 actions for a batch of observations.
std::vector<double> td3_actions(const ParamVector& actor, std::span<const double> obs, std::size_t count);

/// y = r + gamma (1 - d) min(q1, q2), elementwise.
std::vector<double> clipped_double_q(std::span<const double> rewards, std::span<const double> dones,
                                     std::span<const double> q1, std::span<const double> q2, double gamma);

/// TD3 target with clipped Gaussian smoothing noise on the target action.
/// With `noise_std` = 0 no randomness is drawn.
std::vector<double> td3_target(const TransitionBatch& batch, const Td3State& state, double gamma, double noise_std,
                               double noise_clip, Rng& rng);

struct CriticLoss
{
    double loss = 0.0;
    std::vector<double> grad;
};

/// Mean squared error (Q(s, a) - y)^2 and its parameter gradient.
CriticLoss critic_loss(const ParamVector& critic, const TransitionBatch& batch, std::span<const double> y);

/// One Adam step on each critic; returns the two losses.
std::pair<double, double> critic_update(TwinCritics& critics, const TransitionBatch& batch, std::span<const double> y,
                                        double lr);

/// Loss -mean Q1(s, pi(s)) and its gradient with respect to the actor.
CriticLoss td3_actor_loss(const ParamVector& actor, const ParamVector& q1, const TransitionBatch& batch);
void td3_actor_update(Td3State& state, const TransitionBatch& batch, double lr);

/// target <- tau * source + (1 - tau) * target.
void polyak_update(ParamVector& target, const ParamVector& source, double tau);

/// One TD3 iteration on a batch: critic step, and every policy_delay critic
/// steps an actor step followed by target updates.
void td3_train_step(Td3State& state, const TransitionBatch& batch, const RlCommonConfig& config, Rng& rng);

/// Log-density of a = tanh(u) when u ~ N(mean, exp(log_std)^2), evaluated
/// through the pre-squash sample u.
double squashed_gaussian_log_prob(std::span<const double> mean, std::span<const double> log_std,
                                  std::span<const double> u);

/// Splits raw SAC actor outputs into mean and clamped log-sigma.
void split_sac_output(std::span<const double> out, std::span<double> mean, std::span<double> log_std);

/// Soft target y = r + gamma (1 - d) (min Q'(s', a') - alpha log pi(a'|s')),
/// a' drawn from the current policy. With `rng` null the deterministic
/// action tanh(mean) is used and the log-probability term is dropped.
std::vector<double> sac_target(const TransitionBatch& batch, const SacState& state, double gamma, Rng* rng);

/// alpha log pi(a|s) - min Q(s, a) with reparameterized a = tanh(mean + sigma xi),
/// xi given per sample (count x act_dim), and its actor gradient.
CriticLoss sac_actor_loss(const ParamVector& actor, const TwinCritics& critics, const TransitionBatch& batch,
                          std::span<const double> xi, double alpha);

/// Critic step on soft targets, actor step, target updates.
void sac_update(SacState& state, const TransitionBatch& batch, const RlCommonConfig& config, Rng& rng);

Policy td3_policy(const Td3State& state);
Policy sac_policy(const SacState& state);

struct OffPolicyReport
{
    std::uint64_t steps = 0;
    std::uint64_t updates = 0;
    double mean_return = 0.0; // episodes finished since the previous report (NaN if none)
    double best_return = 0.0;
    double eval_return = 0.0;
};

struct OffPolicyRun
{
    std::vector<OffPolicyReport> reports;
    Policy best_policy;
    double best_eval = 0.0;
    Policy final_policy;
};

struct OffPolicyOptions
{
    std::function<void(const OffPolicyReport&, const Policy& evaluated)> on_report;
    std::uint64_t eval_seed_key = 0;
};

OffPolicyRun train_td3(const RlCommonConfig& config, const Env& prototype, std::uint64_t budget, std::uint64_t seed,
                       const OffPolicyOptions& options = {});
OffPolicyRun train_sac(const RlCommonConfig& config, const Env& prototype, std::uint64_t budget, std::uint64_t seed,
                       const OffPolicyOptions& options = {});

} // namespace evorl
