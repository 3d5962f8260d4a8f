#include "evorl/offpolicy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>

namespace evorl {

namespace {

constexpr std::uint64_t tag_actor = 0x6163746f72ULL;
constexpr std::uint64_t tag_q1 = 0x7131ULL;
constexpr std::uint64_t tag_q2 = 0x7132ULL;
constexpr std::uint64_t tag_episode = 0x657069ULL;
constexpr std::uint64_t tag_rng = 0x6f66667267ULL;
constexpr std::uint64_t tag_eval = 0x6576616cULL;
const double half_log_2pi = 0.5 * std::log(2.0 * 3.14159265358979323846);
constexpr double log_std_min = -20.0;
constexpr double log_std_max = 2.0;

MlpSpec net(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out, Activation out_act)
{
    MlpSpec s;
    s.layer_sizes.push_back(in);
    s.layer_sizes.insert(s.layer_sizes.end(), hidden.begin(), hidden.end());
    s.layer_sizes.push_back(out);
    s.output_activation = out_act;
    return s;
}

TwinCritics make_critics(std::size_t obs_dim, std::size_t act_dim, const RlCommonConfig& config, std::uint64_t seed)
{
    const MlpSpec spec = net(obs_dim + act_dim, config.hidden, 1, Activation::identity);
    TwinCritics c;
    c.q1 = init_mlp(spec, derive_key({seed, tag_q1}));
    c.q2 = init_mlp(spec, derive_key({seed, tag_q2}));
    c.q1_target = c.q1;
    c.q2_target = c.q2;
    c.opt1 = Adam(c.q1.values.size());
    c.opt2 = Adam(c.q2.values.size());
    return c;
}

std::vector<double> concat_rows(std::span<const double> obs, std::span<const double> actions, std::size_t count)
{
    if (count == 0)
        return {};
    const std::size_t od = obs.size() / count;
    const std::size_t ad = actions.size() / count;
    std::vector<double> out;
    out.reserve(count * (od + ad));
    for (std::size_t i = 0; i < count; ++i) {
        out.insert(out.end(), obs.begin() + static_cast<std::ptrdiff_t>(i * od),
                   obs.begin() + static_cast<std::ptrdiff_t>((i + 1) * od));
        out.insert(out.end(), actions.begin() + static_cast<std::ptrdiff_t>(i * ad),
                   actions.begin() + static_cast<std::ptrdiff_t>((i + 1) * ad));
    }
    return out;
}

// log(1 - tanh(u)^2), stable for large |u|.
double log_one_minus_tanh_sq(double u)
{
    const double x = -2.0 * u;
    const double softplus = x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    return 2.0 * (std::log(2.0) - u - softplus);
}

// dQ/da for every row, taken from the critic's input gradient.
std::vector<double> action_gradient(const ParamVector& critic, const std::vector<double>& inputs,
                                    std::vector<double> upstream, std::size_t count, std::size_t obs_dim,
                                    std::size_t act_dim, std::vector<double>* param_grad = nullptr)
{
    GradBatch gb;
    gb.count = count;
    gb.inputs = inputs;
    gb.upstream = std::move(upstream);
    BackwardResult br = backward_with_inputs(critic.spec, critic.values, gb);
    std::vector<double> da(count * act_dim);
    const std::size_t width = obs_dim + act_dim;
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t d = 0; d < act_dim; ++d)
            da[i * act_dim + d] = br.input_grad[i * width + obs_dim + d];
    if (param_grad)
        *param_grad = std::move(br.param_grad);
    return da;
}

} // namespace

void RlCommonConfig::validate() const
{
    if (!(tau > 0.0 && tau <= 1.0))
        throw std::invalid_argument("RlCommonConfig: tau must lie in (0, 1]");
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw std::invalid_argument("RlCommonConfig: gamma must lie in [0, 1]");
    if (batch_size < 1 || policy_delay < 1 || buffer_capacity < 1)
        throw std::invalid_argument("RlCommonConfig: batch_size, policy_delay and buffer_capacity must be >= 1");
    if (alpha < 0.0)
        throw std::invalid_argument("RlCommonConfig: alpha must be >= 0");
    if (target_noise < 0.0 || noise_clip < 0.0 || exploration_noise < 0.0)
        throw std::invalid_argument("RlCommonConfig: noise parameters must be >= 0");
}

Td3State make_td3_state(std::size_t obs_dim, std::size_t act_dim, const RlCommonConfig& config, std::uint64_t seed)
{
    Td3State s;
    s.actor = init_mlp(net(obs_dim, config.hidden, act_dim, Activation::tanh), derive_key({seed, tag_actor}));
    s.actor_target = s.actor;
    s.actor_opt = Adam(s.actor.values.size());
    s.critics = make_critics(obs_dim, act_dim, config, seed);
    return s;
}

SacState make_sac_state(std::size_t obs_dim, std::size_t act_dim, const RlCommonConfig& config, std::uint64_t seed)
{
    SacState s;
    s.actor = init_mlp(net(obs_dim, config.hidden, 2 * act_dim, Activation::identity), derive_key({seed, tag_actor}));
    s.actor_opt = Adam(s.actor.values.size());
    s.critics = make_critics(obs_dim, act_dim, config, seed);
    s.alpha = config.alpha;
    return s;
}

std::vector<double> q_values(const ParamVector& critic, std::span<const double> obs, std::span<const double> actions,
                             std::size_t count)
{
    const std::vector<double> in = concat_rows(obs, actions, count);
    return forward_batch(critic.spec, critic.values, in, count);
}

std::vector<double> td3_actions(const ParamVector& actor, std::span<const double> obs, std::size_t count)
{
    return forward_batch(actor.spec, actor.values, obs, count);
}

std::vector<double> clipped_double_q(std::span<const double> rewards, std::span<const double> dones,
                                     std::span<const double> q1, std::span<const double> q2, double gamma)
{
    const std::size_t n = rewards.size();
    if (dones.size() != n || q1.size() != n || q2.size() != n)
        throw std::invalid_argument("clipped_double_q: length mismatch");
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i)
        y[i] = rewards[i] + gamma * (1.0 - dones[i]) * std::min(q1[i], q2[i]);
    return y;
}

std::vector<double> td3_target(const TransitionBatch& batch, const Td3State& state, double gamma, double noise_std,
                               double noise_clip, Rng& rng)
{
    const std::size_t n = batch.count;
    std::vector<double> a = td3_actions(state.actor_target, batch.next_obs, n);
    if (noise_std > 0.0)
        for (double& v : a)
            v = std::clamp(v + std::clamp(noise_std * standard_normal(rng), -noise_clip, noise_clip), -1.0, 1.0);
    const auto q1 = q_values(state.critics.q1_target, batch.next_obs, a, n);
    const auto q2 = q_values(state.critics.q2_target, batch.next_obs, a, n);
    return clipped_double_q(batch.rewards, batch.dones, q1, q2, gamma);
}

CriticLoss critic_loss(const ParamVector& critic, const TransitionBatch& batch, std::span<const double> y)
{
    const std::size_t n = batch.count;
    if (y.size() != n || n == 0)
        throw std::invalid_argument("critic_loss: targets do not match the batch");
    GradBatch gb;
    gb.count = n;
    gb.inputs = concat_rows(batch.obs, batch.actions, n);
    const auto q = forward_batch(critic.spec, critic.values, gb.inputs, n);
    gb.upstream.resize(n);
    CriticLoss out;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double e = q[i] - y[i];
        out.loss += e * e * inv_n;
        gb.upstream[i] = 2.0 * e * inv_n;
    }
    out.grad = backward(critic.spec, critic.values, gb);
    return out;
}

std::pair<double, double> critic_update(TwinCritics& critics, const TransitionBatch& batch, std::span<const double> y,
                                        double lr)
{
    CriticLoss l1 = critic_loss(critics.q1, batch, y);
    CriticLoss l2 = critic_loss(critics.q2, batch, y);
    critics.opt1.descend(critics.q1.values, l1.grad, lr);
    critics.opt2.descend(critics.q2.values, l2.grad, lr);
    return {l1.loss, l2.loss};
}

CriticLoss td3_actor_loss(const ParamVector& actor, const ParamVector& q1, const TransitionBatch& batch)
{
    const std::size_t n = batch.count;
    const std::size_t od = actor.spec.input_dim();
    const std::size_t ad = actor.spec.output_dim();
    const std::vector<double> a = td3_actions(actor, batch.obs, n);
    const std::vector<double> in = concat_rows(batch.obs, a, n);
    const auto q = forward_batch(q1.spec, q1.values, in, n);
    CriticLoss out;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double v : q)
        out.loss -= v * inv_n;
    const std::vector<double> da = action_gradient(q1, in, std::vector<double>(n, -inv_n), n, od, ad);
    GradBatch gb;
    gb.count = n;
    gb.inputs.assign(batch.obs.begin(), batch.obs.end());
    gb.upstream = da;
    out.grad = backward(actor.spec, actor.values, gb);
    return out;
}

void td3_actor_update(Td3State& state, const TransitionBatch& batch, double lr)
{
    CriticLoss l = td3_actor_loss(state.actor, state.critics.q1, batch);
    state.actor_opt.descend(state.actor.values, l.grad, lr);
}

void polyak_update(ParamVector& target, const ParamVector& source, double tau)
{
    if (target.values.size() != source.values.size())
        throw std::invalid_argument("polyak_update: parameter count mismatch");
    if (tau == 1.0) {
        target.values = source.values;
        return;
    }
    for (std::size_t i = 0; i < target.values.size(); ++i)
        target.values[i] = tau * source.values[i] + (1.0 - tau) * target.values[i];
}

void td3_train_step(Td3State& state, const TransitionBatch& batch, const RlCommonConfig& config, Rng& rng)
{
    const auto y = td3_target(batch, state, config.gamma, config.target_noise, config.noise_clip, rng);
    critic_update(state.critics, batch, y, config.critic_lr);
    ++state.critic_updates;
    if (state.critic_updates % config.policy_delay == 0) {
        td3_actor_update(state, batch, config.actor_lr);
        polyak_update(state.actor_target, state.actor, config.tau);
        polyak_update(state.critics.q1_target, state.critics.q1, config.tau);
        polyak_update(state.critics.q2_target, state.critics.q2, config.tau);
    }
}

double squashed_gaussian_log_prob(std::span<const double> mean, std::span<const double> log_std,
                                  std::span<const double> u)
{
    double lp = 0.0;
    for (std::size_t d = 0; d < u.size(); ++d) {
        const double z = (u[d] - mean[d]) * std::exp(-log_std[d]);
        lp += -0.5 * z * z - log_std[d] - half_log_2pi - log_one_minus_tanh_sq(u[d]);
    }
    return lp;
}

void split_sac_output(std::span<const double> out, std::span<double> mean, std::span<double> log_std)
{
    const std::size_t ad = mean.size();
    for (std::size_t d = 0; d < ad; ++d) {
        mean[d] = out[d];
        log_std[d] = std::clamp(out[ad + d], log_std_min, log_std_max);
    }
}

std::vector<double> sac_target(const TransitionBatch& batch, const SacState& state, double gamma, Rng* rng)
{
    const std::size_t n = batch.count;
    const std::size_t ad = state.actor.spec.output_dim() / 2;
    const auto raw = forward_batch(state.actor.spec, state.actor.values, batch.next_obs, n);
    std::vector<double> a(n * ad);
    std::vector<double> logp(n, 0.0);
    std::vector<double> mean(ad), ls(ad), u(ad);
    for (std::size_t i = 0; i < n; ++i) {
        split_sac_output(std::span<const double>(raw).subspan(i * 2 * ad, 2 * ad), mean, ls);
        for (std::size_t d = 0; d < ad; ++d)
            u[d] = rng ? mean[d] + std::exp(ls[d]) * standard_normal(*rng) : mean[d];
        if (rng)
            logp[i] = squashed_gaussian_log_prob(mean, ls, u);
        for (std::size_t d = 0; d < ad; ++d)
            a[i * ad + d] = std::tanh(u[d]);
    }
    const auto q1 = q_values(state.critics.q1_target, batch.next_obs, a, n);
    const auto q2 = q_values(state.critics.q2_target, batch.next_obs, a, n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i)
        y[i] = batch.rewards[i] + gamma * (1.0 - batch.dones[i]) * (std::min(q1[i], q2[i]) - state.alpha * logp[i]);
    return y;
}

CriticLoss sac_actor_loss(const ParamVector& actor, const TwinCritics& critics, const TransitionBatch& batch,
                          std::span<const double> xi, double alpha)
{
    const std::size_t n = batch.count;
    const std::size_t od = actor.spec.input_dim();
    const std::size_t ad = actor.spec.output_dim() / 2;
    if (xi.size() != n * ad)
        throw std::invalid_argument("sac_actor_loss: need one noise vector per sample");
    const auto raw = forward_batch(actor.spec, actor.values, batch.obs, n);

    std::vector<double> u(n * ad), a(n * ad), sigma(n * ad);
    std::vector<double> mean(ad), ls(ad);
    std::vector<double> logp(n);
    for (std::size_t i = 0; i < n; ++i) {
        split_sac_output(std::span<const double>(raw).subspan(i * 2 * ad, 2 * ad), mean, ls);
        for (std::size_t d = 0; d < ad; ++d) {
            sigma[i * ad + d] = std::exp(ls[d]);
            u[i * ad + d] = mean[d] + sigma[i * ad + d] * xi[i * ad + d];
            a[i * ad + d] = std::tanh(u[i * ad + d]);
        }
        logp[i] = squashed_gaussian_log_prob(mean, ls, std::span<const double>(u).subspan(i * ad, ad));
    }

    const std::vector<double> in = concat_rows(batch.obs, a, n);
    const auto q1 = forward_batch(critics.q1.spec, critics.q1.values, in, n);
    const auto q2 = forward_batch(critics.q2.spec, critics.q2.values, in, n);
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> up1(n, 0.0), up2(n, 0.0);
    CriticLoss out;
    for (std::size_t i = 0; i < n; ++i) {
        const bool first = q1[i] <= q2[i];
        out.loss += (alpha * logp[i] - (first ? q1[i] : q2[i])) * inv_n;
        (first ? up1 : up2)[i] = 1.0;
    }
    const auto da1 = action_gradient(critics.q1, in, up1, n, od, ad);
    const auto da2 = action_gradient(critics.q2, in, up2, n, od, ad);

    GradBatch gb;
    gb.count = n;
    gb.inputs.assign(batch.obs.begin(), batch.obs.end());
    gb.upstream.assign(n * 2 * ad, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < ad; ++d) {
            const std::size_t k = i * ad + d;
            const double dq_da = da1[k] + da2[k];
            // d/du of [-log(1 - tanh^2 u)] is 2 tanh u; da/du = 1 - a^2.
            const double dl_du = (alpha * 2.0 * a[k] - dq_da * (1.0 - a[k] * a[k])) * inv_n;
            gb.upstream[i * 2 * ad + d] = dl_du;
            const double raw_ls = raw[i * 2 * ad + ad + d];
            if (raw_ls > log_std_min && raw_ls < log_std_max)
                gb.upstream[i * 2 * ad + ad + d] = -alpha * inv_n + dl_du * sigma[k] * xi[k];
        }
    }
    out.grad = backward(actor.spec, actor.values, gb);
    return out;
}

void sac_update(SacState& state, const TransitionBatch& batch, const RlCommonConfig& config, Rng& rng)
{
    const auto y = sac_target(batch, state, config.gamma, &rng);
    critic_update(state.critics, batch, y, config.critic_lr);
    const std::size_t ad = state.actor.spec.output_dim() / 2;
    std::vector<double> xi(batch.count * ad);
    for (double& v : xi)
        v = standard_normal(rng);
    CriticLoss l = sac_actor_loss(state.actor, state.critics, batch, xi, state.alpha);
    state.actor_opt.descend(state.actor.values, l.grad, config.actor_lr);
    polyak_update(state.critics.q1_target, state.critics.q1, config.tau);
    polyak_update(state.critics.q2_target, state.critics.q2, config.tau);
    ++state.updates;
}

Policy td3_policy(const Td3State& state)
{
    Policy p;
    p.spec = state.actor.spec;
    p.params = state.actor.values;
    p.normalizer = ObsNormalizer(state.actor.spec.input_dim());
    p.mode = ActionMode::deterministic();
    p.head = PolicyHead::mean;
    return p;
}

Policy sac_policy(const SacState& state)
{
    Policy p;
    p.spec = state.actor.spec;
    p.params = state.actor.values;
    p.normalizer = ObsNormalizer(state.actor.spec.input_dim());
    p.mode = ActionMode::deterministic();
    p.head = PolicyHead::squashed_gaussian;
    return p;
}

namespace {

double eval_policy(const Policy& policy, const Env& prototype, std::size_t episodes, std::uint64_t key)
{
    std::unique_ptr<Env> env = prototype.clone();
    double total = 0.0;
    for (std::size_t k = 0; k < episodes; ++k)
        total += run_episode(policy, *env, env->episode_seed(key, k)).ret;
    return episodes > 0 ? total / static_cast<double>(episodes) : 0.0;
}

// Shared interaction loop. `explore` maps an observation to a behaviour
// action, `learn` performs one update, `snapshot` yields the current policy.
template <class Explore, class Learn, class Snapshot>
OffPolicyRun interact(const RlCommonConfig& config, const Env& prototype, std::uint64_t budget, std::uint64_t seed,
                      const OffPolicyOptions& options, Rng& rng, Explore explore, Learn learn, Snapshot snapshot)
{
    config.validate();
    std::unique_ptr<Env> env = prototype.clone();
    const std::size_t od = env->observation_dim();
    const std::size_t ad = env->action_dim();
    ReplayBuffer buffer(od, ad, config.buffer_capacity);
    const std::uint64_t episode_key = derive_key({seed, tag_episode});
    const std::uint64_t eval_key = options.eval_seed_key != 0 ? options.eval_seed_key : derive_key({seed, tag_eval});

    OffPolicyRun run;
    run.best_policy = snapshot();
    run.best_eval = -std::numeric_limits<double>::infinity();
    std::uint64_t episodes = 0;
    std::uint64_t updates = 0;
    std::vector<double> obs = env->reset(derive_key({episode_key, episodes++}));
    double running = 0.0;
    std::vector<double> finished;

    for (std::uint64_t step = 0; step < budget; ++step) {
        std::vector<double> action(ad);
        if (step < config.warmup_steps) {
            for (double& v : action)
                v = uniform(rng, -1.0, 1.0);
        }
        else {
            action = explore(obs);
        }
        StepResult r = env->step(action);
        running += r.reward;
        buffer.add(obs, action, r.reward, r.observation, r.done);
        if (r.done) {
            finished.push_back(running);
            running = 0.0;
            obs = env->reset(derive_key({episode_key, episodes++}));
        }
        else {
            obs = std::move(r.observation);
        }
        if (step >= config.warmup_steps) {
            learn(buffer.sample(config.batch_size, rng));
            ++updates;
        }
        const bool last = step + 1 == budget;
        if ((step + 1) % config.eval_interval == 0 || last) {
            OffPolicyReport rep;
            rep.steps = step + 1;
            rep.updates = updates;
            if (finished.empty()) {
                rep.mean_return = rep.best_return = std::numeric_limits<double>::quiet_NaN();
            }
            else {
                rep.mean_return = std::accumulate(finished.begin(), finished.end(), 0.0) /
                                  static_cast<double>(finished.size());
                rep.best_return = *std::max_element(finished.begin(), finished.end());
            }
            finished.clear();
            Policy current = snapshot();
            rep.eval_return = eval_policy(current, prototype, config.eval_episodes, eval_key);
            if (options.on_report)
                options.on_report(rep, current);
            if (rep.eval_return > run.best_eval) {
                run.best_eval = rep.eval_return;
                run.best_policy = std::move(current);
            }
            run.reports.push_back(rep);
        }
    }
    run.final_policy = snapshot();
    return run;
}

} // namespace

OffPolicyRun train_td3(const RlCommonConfig& config, const Env& prototype, std::uint64_t budget, std::uint64_t seed,
                       const OffPolicyOptions& options)
{
    Td3State state = make_td3_state(prototype.observation_dim(), prototype.action_dim(), config, seed);
    Rng rng = make_rng(derive_key({seed, tag_rng}));
    MlpWorkspace ws(state.actor.spec);
    auto explore = [&](const std::vector<double>& obs) {
        auto y = forward_into(state.actor.spec, state.actor.values, obs, ws);
        std::vector<double> a(y.begin(), y.end());
        for (double& v : a)
            v = std::clamp(v + config.exploration_noise * standard_normal(rng), -1.0, 1.0);
        return a;
    };
    auto learn = [&](const TransitionBatch& b) {
        td3_train_step(state, b, config, rng);
        ++state.steps;
    };
    return interact(config, prototype, budget, seed, options, rng, explore, learn, [&] { return td3_policy(state); });
}

OffPolicyRun train_sac(const RlCommonConfig& config, const Env& prototype, std::uint64_t budget, std::uint64_t seed,
                       const OffPolicyOptions& options)
{
    SacState state = make_sac_state(prototype.observation_dim(), prototype.action_dim(), config, seed);
    Rng rng = make_rng(derive_key({seed, tag_rng}));
    auto explore = [&](const std::vector<double>& obs) { return sac_policy(state).act_stochastic(obs, rng); };
    auto learn = [&](const TransitionBatch& b) {
        sac_update(state, b, config, rng);
        ++state.steps;
    };
    return interact(config, prototype, budget, seed, options, rng, explore, learn, [&] { return sac_policy(state); });
}

} // namespace evorl
