#pragma once

#include "evorl/action.hpp"
#include "evorl/env.hpp"
#include "evorl/es.hpp"
#include "evorl/mlp.hpp"
#include "evorl/policy.hpp"

#include <memory>
#include <vector>

namespace evorl {

/// f(theta) = -||theta - optimum||^2. One "step" per evaluation.
class SphereObjective final : public Objective
{
public:
    explicit SphereObjective(std::vector<double> optimum) : optimum_(std::move(optimum)) {}
    std::size_t dim() const override { return optimum_.size(); }
    double value(std::span<const double> params) const;
    EvalResult evaluate(std::span<const double> params, std::uint64_t eval_seed, std::size_t episodes,
                        const EvalContext& ctx, std::vector<double>* sampled_obs) const override;

private:
    std::vector<double> optimum_;
};

/// Sphere plus a seed-dependent additive offset: f(theta, s) = g(theta) + noise_std * z(s),
/// z(s) ~ N(0, 1) a pure function of the episode seed. Multi-episode
/// evaluations average independent per-episode seeds.
class NoisySphereObjective final : public Objective
{
public:
    NoisySphereObjective(std::vector<double> optimum, double noise_std)
        : sphere_(std::move(optimum)), noise_std_(noise_std)
    {
    }
    std::size_t dim() const override { return sphere_.dim(); }
    double noise_free(std::span<const double> params) const { return sphere_.value(params); }
    static double seed_offset(std::uint64_t eval_seed, std::size_t episode);
    EvalResult evaluate(std::span<const double> params, std::uint64_t eval_seed, std::size_t episodes,
                        const EvalContext& ctx, std::vector<double>* sampled_obs) const override;

private:
    SphereObjective sphere_;
    double noise_std_;
};

/// Fitness of a neural policy: mean episode return over `episodes` episodes
/// of a private clone of the prototype environment.
class PolicyObjective final : public Objective
{
public:
    PolicyObjective(const Env& prototype, MlpSpec spec, ActionMode mode);

    std::size_t dim() const override { return spec_.param_count(); }
    std::size_t observation_dim() const override { return spec_.input_dim(); }
    EvalResult evaluate(std::span<const double> params, std::uint64_t eval_seed, std::size_t episodes,
                        const EvalContext& ctx, std::vector<double>* sampled_obs) const override;

    const MlpSpec& spec() const { return spec_; }
    const ActionMode& mode() const { return mode_; }
    Policy make_policy(std::vector<double> params, ObsNormalizer normalizer) const;

private:
    std::unique_ptr<Env> prototype_;
    MlpSpec spec_;
    ActionMode mode_;
};

/// Network shape used for ES policies on `env`: tanh outputs, log-sigma head
/// when the action mode is parametric.
MlpSpec es_policy_spec(const Env& env, const std::vector<std::size_t>& hidden, const ActionMode& mode);

} // namespace evorl
