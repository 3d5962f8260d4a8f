#include "evorl/policy.hpp"

#include <algorithm>
#include <cmath>

namespace evorl {

std::size_t Policy::action_dim() const
{
    return head == PolicyHead::squashed_gaussian ? spec.output_dim() / 2 : spec.output_dim();
}

std::vector<double> Policy::act_deterministic(std::span<const double> raw_obs) const
{
    const auto obs = normalizer.normalize(raw_obs);
    Distribution d = forward(spec, params, obs);
    if (head == PolicyHead::squashed_gaussian) {
        std::vector<double> a(d.mean.begin(), d.mean.begin() + static_cast<std::ptrdiff_t>(action_dim()));
        for (double& v : a)
            v = std::tanh(v);
        return a;
    }
    clamp_action(d.mean);
    return d.mean;
}

std::vector<double> Policy::act_stochastic(std::span<const double> raw_obs, Rng& rng) const
{
    const auto obs = normalizer.normalize(raw_obs);
    Distribution d = forward(spec, params, obs);
    if (head == PolicyHead::squashed_gaussian) {
        const std::size_t n = action_dim();
        std::vector<double> a(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double log_std = std::clamp(d.mean[n + i], -20.0, 2.0);
            a[i] = std::tanh(d.mean[i] + std::exp(log_std) * standard_normal(rng));
        }
        return a;
    }
    return sample_action(d, mode, rng);
}

EpisodeOutcome run_episode(const Policy& policy, Env& env, EpisodeSeed seed, const EpisodeOptions& opts)
{
    Rng act_rng = make_rng(opts.action_key);
    Rng sample_rng = make_rng(derive_key({opts.action_key, 0x6f6273ULL}));
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    EpisodeOutcome out;
    std::vector<double> obs = env.reset(seed);
    MlpWorkspace ws(policy.spec);
    std::vector<double> nobs(obs.size());
    const bool plain_deterministic = !opts.stochastic && policy.head == PolicyHead::mean;
    while (true) {
        if (opts.observations && (opts.observation_sample_rate >= 1.0 || coin(sample_rng) < opts.observation_sample_rate))
            opts.observations->insert(opts.observations->end(), obs.begin(), obs.end());

        std::vector<double> action;
        if (plain_deterministic) {
            // Hot path for ES evaluation: no temporaries beyond the action.
            policy.normalizer.normalize(obs, nobs);
            auto y = forward_into(policy.spec, policy.params, nobs, ws);
            action.assign(y.begin(), y.end());
            clamp_action(action);
        }
        else if (opts.stochastic) {
            action = policy.act_stochastic(obs, act_rng);
        }
        else {
            action = policy.act_deterministic(obs);
        }

        StepResult r = env.step(action);
        out.ret += r.reward;
        ++out.steps;
        if (opts.positions)
            opts.positions->emplace_back(r.pos_x, r.pos_y);
        if (r.done) {
            out.displacement = r.pos_x - env.start_x();
            break;
        }
        obs = std::move(r.observation);
    }
    return out;
}

} // namespace evorl
