#pragma once

#include "evorl/action.hpp"
#include "evorl/env.hpp"
#include "evorl/mlp.hpp"
#include "evorl/normalizer.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace evorl {

/// How raw network outputs map to environment actions.
enum class PolicyHead {
    mean,         // outputs are action means (optionally a log-sigma parameter block)
    squashed_gaussian // first half means, second half log-sigma; action = tanh(sample)
};

/// A trained (or training) controller: network, normalizer and the rule that
/// turns outputs into actions. This is what checkpoints store and what
/// post-evaluation runs.
struct Policy
{
    MlpSpec spec;
    std::vector<double> params;
    ObsNormalizer normalizer; // count 0 => identity
    ActionMode mode;          // used when acting stochastically
    PolicyHead head = PolicyHead::mean;

    std::size_t action_dim() const;

    /// Deterministic action (distribution mode / mean, squashed or clamped).
    std::vector<double> act_deterministic(std::span<const double> raw_obs) const;
    /// Action under `mode` (or the squashed Gaussian for that head).
    std::vector<double> act_stochastic(std::span<const double> raw_obs, Rng& rng) const;
};

struct EpisodeOutcome
{
    double ret = 0.0;
    double displacement = 0.0;
    std::uint64_t steps = 0;
};

struct EpisodeOptions
{
    bool stochastic = false;
    std::uint64_t action_key = 0;             // keys the action-noise stream
    std::vector<double>* observations = nullptr;  // optional raw-observation sink
    double observation_sample_rate = 1.0;
    std::vector<std::pair<double, double>>* positions = nullptr; // per-step agent position
};

/// Runs one episode of `policy` on `env` from `seed`.
EpisodeOutcome run_episode(const Policy& policy, Env& env, EpisodeSeed seed, const EpisodeOptions& opts = {});

} // namespace evorl
