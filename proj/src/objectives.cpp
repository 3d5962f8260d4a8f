#include "evorl/objectives.hpp"

#include "evorl/rng.hpp"

#include <stdexcept>

namespace evorl {

double SphereObjective::value(std::span<const double> params) const
{
    if (params.size() != optimum_.size())
        throw std::invalid_argument("SphereObjective: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double d = params[i] - optimum_[i];
        s += d * d;
    }
    return -s;
}

EvalResult SphereObjective::evaluate(std::span<const double> params, std::uint64_t, std::size_t,
                                     const EvalContext&, std::vector<double>*) const
{
    return {value(params), 1};
}

double NoisySphereObjective::seed_offset(std::uint64_t eval_seed, std::size_t episode)
{
    Rng rng = make_rng(derive_key({eval_seed, static_cast<std::uint64_t>(episode), 0x6e6f6973ULL}));
    return standard_normal(rng);
}

EvalResult NoisySphereObjective::evaluate(std::span<const double> params, std::uint64_t eval_seed,
                                          std::size_t episodes, const EvalContext&, std::vector<double>*) const
{
    const double g = sphere_.value(params);
    double noise = 0.0;
    for (std::size_t k = 0; k < episodes; ++k)
        noise += seed_offset(eval_seed, k);
    return {g + noise_std_ * noise / static_cast<double>(episodes), episodes};
}

PolicyObjective::PolicyObjective(const Env& prototype, MlpSpec spec, ActionMode mode)
    : prototype_(prototype.clone()), spec_(std::move(spec)), mode_(mode)
{
    spec_.validate();
    mode_.validate();
    if (spec_.input_dim() != prototype_->observation_dim() || spec_.output_dim() != prototype_->action_dim())
        throw std::invalid_argument("PolicyObjective: network shape does not match environment " +
                                    prototype_->name());
    if (mode_.kind == ActionMode::Kind::parametric_gaussian && !spec_.log_std_head)
        throw std::invalid_argument("PolicyObjective: parametric_gaussian mode needs a log-sigma head");
}

Policy PolicyObjective::make_policy(std::vector<double> params, ObsNormalizer normalizer) const
{
    Policy p;
    p.spec = spec_;
    p.params = std::move(params);
    p.normalizer = std::move(normalizer);
    p.mode = mode_;
    p.head = PolicyHead::mean;
    return p;
}

EvalResult PolicyObjective::evaluate(std::span<const double> params, std::uint64_t eval_seed, std::size_t episodes,
                                     const EvalContext& ctx, std::vector<double>* sampled_obs) const
{
    Policy policy = make_policy(std::vector<double>(params.begin(), params.end()),
                                ctx.normalizer ? *ctx.normalizer : ObsNormalizer(spec_.input_dim()));
    std::unique_ptr<Env> env = prototype_->clone();
    EvalResult res;
    double total = 0.0;
    for (std::size_t k = 0; k < episodes; ++k) {
        EpisodeOptions opts;
        opts.stochastic = mode_.kind != ActionMode::Kind::deterministic;
        opts.action_key = derive_key({eval_seed, static_cast<std::uint64_t>(k), 0x616374ULL});
        opts.observations = sampled_obs;
        opts.observation_sample_rate = ctx.obs_sample_rate;
        const EpisodeOutcome o = run_episode(policy, *env, env->episode_seed(eval_seed, k), opts);
        total += o.ret;
        res.steps += o.steps;
    }
    res.fitness = total / static_cast<double>(episodes);
    return res;
}

MlpSpec es_policy_spec(const Env& env, const std::vector<std::size_t>& hidden, const ActionMode& mode)
{
    MlpSpec spec;
    spec.layer_sizes.push_back(env.observation_dim());
    spec.layer_sizes.insert(spec.layer_sizes.end(), hidden.begin(), hidden.end());
    spec.layer_sizes.push_back(env.action_dim());
    spec.output_activation = Activation::tanh;
    spec.log_std_head = mode.kind == ActionMode::Kind::parametric_gaussian;
    return spec;
}

} // namespace evorl
