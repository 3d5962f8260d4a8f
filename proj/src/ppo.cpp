#include "evorl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace evorl {

namespace {
constexpr std::uint64_t tag_actor = 0x6163746f72ULL;
constexpr std::uint64_t tag_critic = 0x637269746963ULL;
constexpr std::uint64_t tag_episode = 0x657069ULL;
constexpr std::uint64_t tag_rng = 0x70706f726e67ULL;
constexpr std::uint64_t tag_eval = 0x6576616cULL;
const double half_log_2pi = 0.5 * std::log(2.0 * 3.14159265358979323846);

MlpSpec net_spec(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out, bool log_std)
{
    MlpSpec s;
    s.layer_sizes.push_back(in);
    s.layer_sizes.insert(s.layer_sizes.end(), hidden.begin(), hidden.end());
    s.layer_sizes.push_back(out);
    s.output_activation = Activation::identity;
    s.log_std_head = log_std;
    return s;
}

std::span<const double> row(const std::vector<double>& v, std::size_t i, std::size_t width)
{
    return std::span<const double>(v).subspan(i * width, width);
}

void append(std::vector<double>& dst, std::span<const double> src)
{
    dst.insert(dst.end(), src.begin(), src.end());
}

} // namespace

double LrSchedule::at(double progress) const
{
    if (kind == Kind::constant)
        return start;
    const double p = std::clamp(progress, 0.0, 1.0);
    return start + (end - start) * p;
}

void PpoConfig::validate() const
{
    if (!(clip > 0.0 && clip < 1.0))
        throw std::invalid_argument("PpoConfig: clip must lie in (0, 1)");
    if (!(value_clip > 0.0))
        throw std::invalid_argument("PpoConfig: value_clip must be > 0");
    if (rollout_steps < 1 || minibatch < 1 || epochs < 1)
        throw std::invalid_argument("PpoConfig: rollout_steps, minibatch and epochs must be >= 1");
    if (minibatch > rollout_steps)
        throw std::invalid_argument("PpoConfig: minibatch must not exceed rollout_steps");
    if (!(gamma >= 0.0 && gamma <= 1.0) || !(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("PpoConfig: gamma and lambda must lie in [0, 1]");
    if (entropy_coef < 0.0)
        throw std::invalid_argument("PpoConfig: entropy_coef must be >= 0");
}

PpoState make_ppo_state(std::size_t obs_dim, std::size_t act_dim, const PpoConfig& config, std::uint64_t seed)
{
    PpoState s;
    s.actor = init_mlp(net_spec(obs_dim, config.hidden, act_dim, true), derive_key({seed, tag_actor}),
                       config.initial_log_std);
    // Small output layer for the policy mean keeps initial actions near zero.
    {
        const auto& ls = s.actor.spec.layer_sizes;
        const std::size_t n_in = ls[ls.size() - 2];
        const std::size_t off = s.actor.spec.weight_count() - (n_in + 1) * act_dim;
        for (std::size_t k = 0; k < n_in * act_dim; ++k)
            s.actor.values[off + k] *= 0.01;
    }
    s.critic = init_mlp(net_spec(obs_dim, config.hidden, 1, false), derive_key({seed, tag_critic}));
    s.actor_opt = Adam(s.actor.values.size());
    s.critic_opt = Adam(s.critic.values.size());
    s.normalizer = ObsNormalizer(obs_dim);
    return s;
}

RolloutCursor make_cursor(const Env& prototype, std::uint64_t seed)
{
    RolloutCursor c;
    c.env = prototype.clone();
    c.episode_seed_key = derive_key({seed, tag_episode});
    return c;
}

RolloutBuffer collect_rollout(const PpoState& state, RolloutCursor& cursor, std::size_t n_steps, Rng& rng)
{
    if (n_steps < 1)
        throw std::invalid_argument("collect_rollout: n_steps must be >= 1");
    Env& env = *cursor.env;
    const std::size_t od = env.observation_dim();
    const std::size_t ad = env.action_dim();
    if (state.actor.spec.input_dim() != od || state.actor.spec.output_dim() != ad)
        throw std::invalid_argument("collect_rollout: actor shape does not match environment " + env.name());

    RolloutBuffer b;
    b.obs_dim = od;
    b.act_dim = ad;
    b.obs.reserve(n_steps * od);
    b.raw_obs.reserve(n_steps * od);
    b.actions.reserve(n_steps * ad);

    MlpWorkspace aws(state.actor.spec);
    MlpWorkspace cws(state.critic.spec);
    const auto log_std = state.actor.view().subspan(state.actor.spec.log_std_offset(), ad);
    std::vector<double> nobs(od);

    for (std::size_t t = 0; t < n_steps; ++t) {
        if (env.done()) {
            cursor.obs = env.reset(derive_key({cursor.episode_seed_key, cursor.episodes_started}));
            ++cursor.episodes_started;
            cursor.running_return = 0.0;
        }
        state.normalizer.normalize(cursor.obs, nobs);
        append(b.raw_obs, cursor.obs);
        append(b.obs, nobs);

        auto mean = forward_into(state.actor.spec, state.actor.values, nobs, aws);
        std::vector<double> a = sample_gaussian(mean, log_std, rng);
        b.log_probs.push_back(gaussian_log_prob(mean, log_std, a));
        append(b.actions, a);
        b.values.push_back(forward_into(state.critic.spec, state.critic.values, nobs, cws)[0]);

        StepResult r;
        try {
            r = env.step(a);
        }
        catch (const std::exception& e) {
            throw std::runtime_error("rollout step " + std::to_string(t) + ": " + e.what());
        }
        b.rewards.push_back(r.reward);
        b.dones.push_back(r.done ? 1.0 : 0.0);
        cursor.running_return += r.reward;
        if (r.done)
            b.episode_returns.push_back(cursor.running_return);
        cursor.obs = std::move(r.observation);
    }
    if (env.done()) {
        b.last_value = 0.0; // masked by the final done flag anyway
    }
    else {
        state.normalizer.normalize(cursor.obs, nobs);
        b.last_value = forward_into(state.critic.spec, state.critic.values, nobs, cws)[0];
    }
    return b;
}

void compute_gae(RolloutBuffer& buffer, double gamma, double lambda)
{
    const std::size_t n = buffer.size();
    buffer.advantages.assign(n, 0.0);
    buffer.returns.assign(n, 0.0);
    double next_adv = 0.0;
    double next_value = buffer.last_value;
    for (std::size_t t = n; t-- > 0;) {
        const double live = 1.0 - buffer.dones[t];
        const double delta = buffer.rewards[t] + gamma * live * next_value - buffer.values[t];
        next_adv = delta + gamma * lambda * live * next_adv;
        buffer.advantages[t] = next_adv;
        buffer.returns[t] = next_adv + buffer.values[t];
        next_value = buffer.values[t];
    }
}

double clipped_objective(double ratio, double advantage, double eps)
{
    return std::min(ratio * advantage, std::clamp(ratio, 1.0 - eps, 1.0 + eps) * advantage);
}

LossAndGrad ppo_surrogate(const RolloutBuffer& buffer, std::span<const std::size_t> indices,
                          std::span<const double> advantages, const ParamVector& actor, double clip,
                          double entropy_coef)
{
    const MlpSpec& spec = actor.spec;
    const std::size_t ad = spec.output_dim();
    const std::size_t od = spec.input_dim();
    const std::size_t n = indices.size();
    if (n == 0)
        throw std::invalid_argument("ppo_surrogate: empty minibatch");
    const auto log_std = actor.view().subspan(spec.log_std_offset(), ad);

    GradBatch gb;
    gb.count = n;
    gb.inputs.reserve(n * od);
    gb.upstream.assign(n * ad, 0.0);
    gb.log_std_upstream.assign(n * ad, 0.0);

    LossAndGrad out;
    MlpWorkspace ws(spec);
    double obj_sum = 0.0;
    std::size_t clipped = 0;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = indices[k];
        const auto obs = row(buffer.obs, i, od);
        append(gb.inputs, obs);
        const auto mean = forward_record(spec, actor.values, obs, ws, gb.activations);
        const auto a = row(buffer.actions, i, ad);
        const double logp = gaussian_log_prob(mean, log_std, a);
        const double ratio = std::exp(logp - buffer.log_probs[i]);
        if (!std::isfinite(ratio))
            throw PpoDivergence("ppo_surrogate: non-finite probability ratio");
        const double A = advantages[i];
        const double unclipped = ratio * A;
        const double obj = clipped_objective(ratio, A, clip);
        obj_sum += obj;
        if (unclipped > obj) {
            ++clipped; // clipped term is the minimum: no gradient through the ratio
            continue;
        }
        // d(-obj/n)/d(logp) = -ratio * A / n
        const double w = -unclipped * inv_n;
        for (std::size_t d = 0; d < ad; ++d) {
            const double inv_var = std::exp(-2.0 * log_std[d]);
            const double diff = a[d] - mean[d];
            gb.upstream[k * ad + d] = w * diff * inv_var;
            gb.log_std_upstream[k * ad + d] = w * (diff * diff * inv_var - 1.0);
        }
    }
    out.grad = backward(spec, actor.values, gb);
    out.entropy = gaussian_entropy(log_std);
    for (std::size_t d = 0; d < ad; ++d)
        out.grad[spec.log_std_offset() + d] -= entropy_coef;
    out.loss = -obj_sum * inv_n - entropy_coef * out.entropy;
    out.clip_fraction = static_cast<double>(clipped) * inv_n;
    return out;
}

LossAndGrad value_loss(const RolloutBuffer& buffer, std::span<const std::size_t> indices, const ParamVector& critic,
                       double value_clip)
{
    const MlpSpec& spec = critic.spec;
    const std::size_t od = spec.input_dim();
    const std::size_t n = indices.size();
    if (n == 0)
        throw std::invalid_argument("value_loss: empty minibatch");
    GradBatch gb;
    gb.count = n;
    gb.inputs.reserve(n * od);
    gb.upstream.assign(n, 0.0);
    MlpWorkspace ws(spec);
    const double inv_n = 1.0 / static_cast<double>(n);
    double sum = 0.0;
    std::size_t clipped = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = indices[k];
        const auto obs = row(buffer.obs, i, od);
        append(gb.inputs, obs);
        const double v = forward_record(spec, critic.values, obs, ws, gb.activations)[0];
        const double v_old = buffer.values[i];
        const double R = buffer.returns[i];
        const double delta = v - v_old;
        const double delta_c = std::clamp(delta, -value_clip, value_clip);
        const double l1 = (v - R) * (v - R);
        const double vc = v_old + delta_c;
        const double l2 = (vc - R) * (vc - R);
        if (l1 >= l2) {
            sum += l1;
            gb.upstream[k] = 2.0 * (v - R) * inv_n;
        }
        else {
            sum += l2;
            if (delta_c == delta)
                gb.upstream[k] = 2.0 * (vc - R) * inv_n;
            else
                ++clipped;
        }
    }
    LossAndGrad out;
    out.grad = backward(spec, critic.values, gb);
    out.loss = sum * inv_n;
    out.clip_fraction = static_cast<double>(clipped) * inv_n;
    return out;
}

UpdateStats ppo_update(PpoState& state, RolloutBuffer& buffer, const PpoConfig& config, Rng& rng, double progress)
{
    const std::size_t n = buffer.size();
    if (n == 0 || buffer.advantages.size() != n || buffer.returns.size() != n)
        throw std::invalid_argument("ppo_update: buffer lacks advantages or return targets");

    std::vector<double> adv = buffer.advantages;
    if (config.normalize_advantages && n > 1) {
        const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / static_cast<double>(n);
        double var = 0.0;
        for (double a : adv)
            var += (a - mean) * (a - mean);
        const double sd = std::sqrt(var / static_cast<double>(n));
        for (double& a : adv)
            a = (a - mean) / (sd + 1e-8);
    }

    const double lr = config.lr.at(progress);
    const std::size_t mb = std::min(config.minibatch, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    UpdateStats stats;
    std::size_t batches = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start + mb <= n; start += mb) {
            const std::span<const std::size_t> idx(order.data() + start, mb);
            LossAndGrad pg = ppo_surrogate(buffer, idx, adv, state.actor, config.clip, config.entropy_coef);
            LossAndGrad vg = value_loss(buffer, idx, state.critic, config.value_clip);
            clip_grad_norm(pg.grad, config.max_grad_norm);
            clip_grad_norm(vg.grad, config.max_grad_norm);
            state.actor_opt.descend(state.actor.values, pg.grad, lr);
            state.critic_opt.descend(state.critic.values, vg.grad, lr);
            stats.policy_loss += pg.loss;
            stats.value_loss += vg.loss;
            stats.entropy += pg.entropy;
            stats.clip_fraction += pg.clip_fraction;
            ++batches;
        }
    }
    if (batches > 0) {
        const double inv = 1.0 / static_cast<double>(batches);
        stats.policy_loss *= inv;
        stats.value_loss *= inv;
        stats.entropy *= inv;
        stats.clip_fraction *= inv;
    }
    for (double v : state.actor.values)
        if (!std::isfinite(v))
            throw PpoDivergence("ppo_update: actor parameters diverged");
    state.steps += n;
    ++state.updates;
    return stats;
}

Policy ppo_policy(const PpoState& state)
{
    Policy p;
    p.spec = state.actor.spec;
    p.params = state.actor.values;
    p.normalizer = state.normalizer;
    p.mode = ActionMode::parametric_gaussian(1.0);
    p.head = PolicyHead::mean;
    return p;
}

double evaluate_deterministic(const Policy& policy, const Env& prototype, std::size_t episodes, std::uint64_t key)
{
    std::unique_ptr<Env> env = prototype.clone();
    double total = 0.0;
    for (std::size_t k = 0; k < episodes; ++k)
        total += run_episode(policy, *env, env->episode_seed(key, k)).ret;
    return episodes > 0 ? total / static_cast<double>(episodes) : 0.0;
}

PpoRun train_ppo(const PpoConfig& config, const Env& prototype, std::uint64_t budget, std::uint64_t seed,
                 const PpoRunOptions& options)
{
    config.validate();
    PpoRun run;
    run.state = make_ppo_state(prototype.observation_dim(), prototype.action_dim(), config, seed);
    run.best_policy = ppo_policy(run.state);
    run.best_eval = -std::numeric_limits<double>::infinity();
    RolloutCursor cursor = make_cursor(prototype, seed);
    Rng rng = make_rng(derive_key({seed, tag_rng}));
    const std::uint64_t eval_key =
        options.eval_seed_key != 0 ? options.eval_seed_key : derive_key({seed, tag_eval});

    while (run.state.steps < budget) {
        const std::size_t n = static_cast<std::size_t>(
            std::min<std::uint64_t>(config.rollout_steps, budget - run.state.steps));
        const double progress = static_cast<double>(run.state.steps) / static_cast<double>(budget);
        RolloutBuffer buf = collect_rollout(run.state, cursor, n, rng);
        compute_gae(buf, config.gamma, config.lambda);
        PpoUpdateReport rep;
        rep.stats = ppo_update(run.state, buf, config, rng, progress);
        run.state.normalizer.update(buf.raw_obs, buf.size());

        rep.update = run.state.updates;
        rep.steps = run.state.steps;
        if (buf.episode_returns.empty()) {
            rep.mean_return = std::numeric_limits<double>::quiet_NaN();
            rep.best_return = std::numeric_limits<double>::quiet_NaN();
        }
        else {
            rep.mean_return = std::accumulate(buf.episode_returns.begin(), buf.episode_returns.end(), 0.0) /
                              static_cast<double>(buf.episode_returns.size());
            rep.best_return = *std::max_element(buf.episode_returns.begin(), buf.episode_returns.end());
        }
        Policy current = ppo_policy(run.state);
        rep.eval_return = evaluate_deterministic(current, prototype, config.eval_episodes, eval_key);
        if (options.on_update)
            options.on_update(rep, current);
        if (rep.eval_return > run.best_eval) {
            run.best_eval = rep.eval_return;
            run.best_policy = std::move(current);
        }
        run.reports.push_back(rep);
    }
    return run;
}

} // namespace evorl
