#include "evorl/envs/sparse_goal.hpp"
#include "evorl/offpolicy.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace evorl;

namespace {

RlCommonConfig small_config()
{
    RlCommonConfig c;
    c.hidden = {8, 8};
    c.batch_size = 16;
    c.warmup_steps = 50;
    c.eval_interval = 100;
    c.eval_episodes = 1;
    return c;
}

TransitionBatch random_batch(std::size_t n, std::size_t od, std::size_t ad, Rng& rng)
{
    TransitionBatch b;
    b.count = n;
    b.obs = oracle::uniform_vector(rng, n * od, -1, 1);
    b.next_obs = oracle::uniform_vector(rng, n * od, -1, 1);
    b.actions = oracle::uniform_vector(rng, n * ad, -1, 1);
    b.rewards = oracle::uniform_vector(rng, n, -1, 1);
    for (std::size_t i = 0; i < n; ++i)
        b.dones.push_back(i % 4 == 3 ? 1.0 : 0.0);
    return b;
}

void jitter(ParamVector& p, Rng& rng, double s)
{
    for (double& v : p.values)
        v += uniform(rng, -s, s);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

} // namespace

TEST_SUITE("offpolicy_core")
{
    TEST_CASE("clipped double-Q target substitutions")
    {
        const std::vector<double> r{0.0, 1.0}, d{0.0, 1.0}, q1{2.0, 7.0}, q2{3.0, -4.0};
        const auto y = clipped_double_q(r, d, q1, q2, 0.99);
        CHECK(y[0] == doctest::Approx(1.98));
        CHECK(y[1] == 1.0);
    }

    TEST_CASE("noise-free TD3 target uses the target networks")
    {
        Rng rng = make_rng(1);
        const auto c = small_config();
        Td3State s = make_td3_state(3, 2, c, 4);
        jitter(s.actor_target, rng, 0.5);
        jitter(s.critics.q1_target, rng, 0.5);
        jitter(s.critics.q2_target, rng, 0.5);
        const auto b = random_batch(10, 3, 2, rng);
        Rng unused = make_rng(99);
        const Rng before = unused;
        const auto y = td3_target(b, s, 0.9, 0.0, 0.5, unused);
        CHECK(unused == before);
        const auto a = td3_actions(s.actor_target, b.next_obs, 10);
        const auto q1 = q_values(s.critics.q1_target, b.next_obs, a, 10);
        const auto q2 = q_values(s.critics.q2_target, b.next_obs, a, 10);
        CHECK(y == clipped_double_q(b.rewards, b.dones, q1, q2, 0.9));
    }

    TEST_CASE("smoothed TD3 target stays within the clipped action band")
    {
        Rng rng = make_rng(2);
        const auto c = small_config();
        Td3State s = make_td3_state(3, 1, c, 4);
        jitter(s.critics.q1_target, rng, 0.5);
        jitter(s.critics.q2_target, rng, 0.5);
        TransitionBatch b = random_batch(1, 3, 1, rng);
        b.dones = {0.0};
        // Q is monotone along a line only locally, so bound y by the range of
        // min-Q over the admissible actions.
        const double a0 = td3_actions(s.actor_target, b.next_obs, 1)[0];
        double lo = 1e300, hi = -1e300;
        for (int k = 0; k <= 400; ++k) {
            const double a = std::clamp(a0 - 0.1 + 0.2 * k / 400.0, -1.0, 1.0);
            const std::vector<double> av{a};
            const double q = std::min(q_values(s.critics.q1_target, b.next_obs, av, 1)[0],
                                      q_values(s.critics.q2_target, b.next_obs, av, 1)[0]);
            lo = std::min(lo, b.rewards[0] + 0.9 * q);
            hi = std::max(hi, b.rewards[0] + 0.9 * q);
        }
        for (int k = 0; k < 200; ++k) {
            const double y = td3_target(b, s, 0.9, 5.0, 0.1, rng)[0];
            CHECK(y >= lo - 1e-6);
            CHECK(y <= hi + 1e-6);
        }
    }

    TEST_CASE("critic loss by hand")
    {
        // Q([s, a]) = w . [s, a] + b.
        ParamVector q{MlpSpec{{3, 1}}, {0.5, -1.0, 2.0, 0.25}};
        TransitionBatch b;
        b.count = 2;
        b.obs = {1.0, 2.0, 0.0, -1.0};
        b.actions = {0.5, 1.0};
        const std::vector<double> y{0.0, 1.0};
        // Q = 0.5 - 2 + 1 + 0.25 = -0.25 and 0 + 1 + 2 + 0.25 = 3.25.
        const auto l = critic_loss(q, b, y);
        CHECK(l.loss == doctest::Approx((0.0625 + 5.0625) / 2));
        auto f = [&](const std::vector<double>& p) { return critic_loss(ParamVector{q.spec, p}, b, y).loss; };
        CHECK(oracle::rel_error(l.grad, oracle::fd_gradient(f, q.values)) < 1e-6);

        const std::vector<double> exact{-0.25, 3.25};
        const auto z = critic_loss(q, b, exact);
        CHECK(z.loss == 0.0);
        for (double g : z.grad)
            CHECK(g == 0.0);
    }

    TEST_CASE("critic updates are independent")
    {
        Rng rng = make_rng(3);
        const auto c = small_config();
        Td3State s = make_td3_state(3, 2, c, 4);
        Td3State t = s;
        jitter(t.critics.q2, rng, 0.3);
        const auto b = random_batch(8, 3, 2, rng);
        const auto y = oracle::uniform_vector(rng, 8, -1, 1);
        critic_update(s.critics, b, y, 1e-3);
        critic_update(t.critics, b, y, 1e-3);
        CHECK(s.critics.q1.values == t.critics.q1.values);
        CHECK(s.critics.q2.values != t.critics.q2.values);
        CHECK(s.critics.q1_target.values == make_td3_state(3, 2, c, 4).critics.q1_target.values);
    }

    TEST_CASE("polyak averaging")
    {
        ParamVector src{MlpSpec{{2, 1}}, {1.0, 2.0, 3.0}};
        ParamVector tgt{MlpSpec{{2, 1}}, {-1.0, 0.0, 0.5}};
        ParamVector keep = tgt;
        polyak_update(keep, src, 0.0);
        CHECK(keep.values == tgt.values);
        ParamVector mix = tgt;
        polyak_update(mix, src, 0.005);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(mix.values[i] == doctest::Approx(0.005 * src.values[i] + 0.995 * tgt.values[i]));
        polyak_update(tgt, src, 1.0);
        CHECK(tgt.values == src.values);
        ParamVector wrong{MlpSpec{{3, 1}}, {0, 0, 0, 0}};
        CHECK_THROWS(polyak_update(wrong, src, 0.5));
    }

    TEST_CASE("TD3 actor gradient matches finite differences")
    {
        Rng rng = make_rng(4);
        const auto c = small_config();
        Td3State s = make_td3_state(3, 2, c, 4);
        jitter(s.actor, rng, 0.3);
        jitter(s.critics.q1, rng, 0.3);
        const auto b = random_batch(6, 3, 2, rng);
        const auto l = td3_actor_loss(s.actor, s.critics.q1, b);
        auto f = [&](const std::vector<double>& p) {
            return td3_actor_loss(ParamVector{s.actor.spec, p}, s.critics.q1, b).loss;
        };
        CHECK(oracle::rel_error(l.grad, oracle::fd_gradient(f, s.actor.values)) < 1e-5);
        const auto a = td3_actions(s.actor, b.obs, 6);
        const auto q = q_values(s.critics.q1, b.obs, a, 6);
        double m = 0;
        for (double v : q)
            m += v / 6;
        CHECK(l.loss == doctest::Approx(-m));
    }

    TEST_CASE("actor updates are delayed")
    {
        Rng rng = make_rng(5);
        auto c = small_config();
        c.policy_delay = 2;
        Td3State s = make_td3_state(3, 2, c, 4);
        const auto b = random_batch(8, 3, 2, rng);
        const auto a0 = s.actor.values, t0 = s.critics.q1_target.values;
        td3_train_step(s, b, c, rng);
        CHECK(s.actor.values == a0);
        CHECK(s.critics.q1_target.values == t0);
        td3_train_step(s, b, c, rng);
        CHECK(s.actor.values != a0);
        CHECK(s.critics.q1_target.values != t0);
        CHECK(s.critic_updates == 2);
    }

    TEST_CASE("squashed Gaussian density")
    {
        const std::vector<double> mean{0.3}, ls{std::log(0.7)};
        const double sigma = 0.7;
        // Density of tanh(u) from the derivative of its CDF.
        for (double t : {-0.95, -0.5, 0.0, 0.2, 0.6, 0.9}) {
            const double h = 1e-5;
            const double cdf_hi = normal_cdf((std::atanh(t + h) - 0.3) / sigma);
            const double cdf_lo = normal_cdf((std::atanh(t - h) - 0.3) / sigma);
            const double expect = (cdf_hi - cdf_lo) / (2 * h);
            const std::vector<double> u{std::atanh(t)};
            CHECK(std::exp(squashed_gaussian_log_prob(mean, ls, u)) == doctest::Approx(expect).epsilon(1e-3));
        }
        // Total mass in action space.
        double mass = 0.0;
        const int m = 200000;
        for (int k = 0; k < m; ++k) {
            const double u = -8.0 + 16.0 * (k + 0.5) / m;
            const double a = std::tanh(u);
            const double da = (1 - a * a) * 16.0 / m;
            mass += std::exp(squashed_gaussian_log_prob(mean, ls, std::vector<double>{u})) * da;
        }
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
        // Large |u| stays finite.
        CHECK(std::isfinite(squashed_gaussian_log_prob(mean, ls, std::vector<double>{40.0})));
    }

    TEST_CASE("log-sigma is clamped")
    {
        const std::vector<double> out{0.1, -0.2, -50.0, 9.0};
        std::vector<double> mean(2), ls(2);
        split_sac_output(out, mean, ls);
        CHECK(mean == std::vector<double>{0.1, -0.2});
        CHECK(ls == std::vector<double>{-20.0, 2.0});
    }

    TEST_CASE("SAC with zero temperature reduces to the noise-free TD3 target")
    {
        Rng rng = make_rng(6);
        auto c = small_config();
        Td3State td3 = make_td3_state(3, 2, c, 7);
        SacState sac = make_sac_state(3, 2, c, 7);
        jitter(td3.actor_target, rng, 0.4);
        jitter(td3.critics.q1_target, rng, 0.4);
        jitter(td3.critics.q2_target, rng, 0.4);
        sac.critics = td3.critics;
        sac.alpha = 0.0;
        // Copy the TD3 target actor into the mean rows of the SAC actor.
        const MlpSpec& ts = td3.actor_target.spec;
        const MlpSpec& ss = sac.actor.spec;
        std::size_t ti = 0, si = 0;
        for (std::size_t l = 0; l < ts.num_layers(); ++l) {
            const std::size_t in = ts.layer_sizes[l], out_t = ts.layer_sizes[l + 1], out_s = ss.layer_sizes[l + 1];
            for (std::size_t r = 0; r < out_s; ++r)
                for (std::size_t k = 0; k < in; ++k)
                    sac.actor.values[si + r * in + k] = r < out_t ? td3.actor_target.values[ti + r * in + k] : 0.1;
            si += out_s * in;
            ti += out_t * in;
            for (std::size_t r = 0; r < out_s; ++r)
                sac.actor.values[si + r] = r < out_t ? td3.actor_target.values[ti + r] : -1.0;
            si += out_s;
            ti += out_t;
        }
        const auto b = random_batch(12, 3, 2, rng);
        Rng unused = make_rng(0);
        const auto y_td3 = td3_target(b, td3, 0.95, 0.0, 0.5, unused);
        const auto y_sac = sac_target(b, sac, 0.95, nullptr);
        for (std::size_t i = 0; i < 12; ++i)
            CHECK(std::abs(y_td3[i] - y_sac[i]) <= 1e-12);
    }

    TEST_CASE("SAC target is pessimistic over the twin critics")
    {
        Rng rng = make_rng(8);
        auto c = small_config();
        SacState s = make_sac_state(3, 2, c, 7);
        jitter(s.critics.q1_target, rng, 0.4);
        jitter(s.critics.q2_target, rng, 0.4);
        s.alpha = 0.0;
        const auto b = random_batch(12, 3, 2, rng);
        SacState only1 = s, only2 = s;
        only1.critics.q2_target = s.critics.q1_target;
        only2.critics.q1_target = s.critics.q2_target;
        const auto y = sac_target(b, s, 0.9, nullptr);
        const auto y1 = sac_target(b, only1, 0.9, nullptr);
        const auto y2 = sac_target(b, only2, 0.9, nullptr);
        for (std::size_t i = 0; i < 12; ++i)
            CHECK(y[i] == std::min(y1[i], y2[i]));
    }

    TEST_CASE("SAC actor gradient matches finite differences")
    {
        Rng rng = make_rng(9);
        auto c = small_config();
        SacState s = make_sac_state(3, 2, c, 7);
        jitter(s.actor, rng, 0.3);
        jitter(s.critics.q1, rng, 0.3);
        jitter(s.critics.q2, rng, 0.3);
        const auto b = random_batch(6, 3, 2, rng);
        std::vector<double> xi(12);
        for (double& x : xi)
            x = standard_normal(rng);
        for (double alpha : {0.0, 0.2}) {
            const auto l = sac_actor_loss(s.actor, s.critics, b, xi, alpha);
            auto f = [&](const std::vector<double>& p) {
                return sac_actor_loss(ParamVector{s.actor.spec, p}, s.critics, b, xi, alpha).loss;
            };
            CHECK(oracle::rel_error(l.grad, oracle::fd_gradient(f, s.actor.values)) < 1e-5);
        }
        CHECK_THROWS(sac_actor_loss(s.actor, s.critics, b, std::vector<double>(3), 0.2));
    }

    TEST_CASE("replay buffer is a FIFO ring sampled from stored entries")
    {
        ReplayBuffer rb(2, 1, 3);
        Rng rng = make_rng(10);
        CHECK_THROWS(rb.sample(1, rng));
        for (int k = 0; k < 5; ++k) {
            const std::vector<double> o{double(k), 0.0}, a{double(k)}, n{double(k + 1), 0.0};
            rb.add(o, a, k, n, k == 4);
        }
        CHECK(rb.size() == 3);
        CHECK(rb.total_added() == 5);
        CHECK(std::set<std::uint64_t>{rb.id_at(0), rb.id_at(1), rb.id_at(2)} == std::set<std::uint64_t>{2, 3, 4});
        const auto b = rb.sample(500, rng);
        std::set<std::uint64_t> seen(b.ids.begin(), b.ids.end());
        CHECK(seen == std::set<std::uint64_t>{2, 3, 4});
        for (std::size_t i = 0; i < b.count; ++i) {
            CHECK(b.rewards[i] == double(b.ids[i]));
            CHECK(b.obs[2 * i] == double(b.ids[i]));
            CHECK(b.next_obs[2 * i] == double(b.ids[i] + 1));
            CHECK(b.dones[i] == (b.ids[i] == 4 ? 1.0 : 0.0));
        }
        CHECK_THROWS(rb.add(std::vector<double>{1.0}, std::vector<double>{1.0}, 0, std::vector<double>{1.0, 2.0}, false));
        CHECK_THROWS(ReplayBuffer(2, 1, 0));
    }

    TEST_CASE("config validation")
    {
        RlCommonConfig c;
        c.tau = 0.0;
        CHECK_THROWS(c.validate());
        c = {};
        c.tau = 1.0;
        CHECK_NOTHROW(c.validate());
    }

    TEST_CASE("training runs are deterministic and report on schedule")
    {
        const auto c = small_config();
        SparseGoalEnv env;
        const auto a = train_td3(c, env, 250, 3);
        const auto b = train_td3(c, env, 250, 3);
        REQUIRE(a.reports.size() == 3); // 100, 200, 250
        CHECK(a.reports.back().steps == 250);
        CHECK(a.reports[0].updates == 50);
        CHECK(a.best_eval == b.best_eval);
        CHECK(a.final_policy.params == b.final_policy.params);

        const auto s1 = train_sac(c, env, 150, 3);
        const auto s2 = train_sac(c, env, 150, 3);
        CHECK(s1.reports.size() == 2);
        CHECK(s1.final_policy.params == s2.final_policy.params);
    }
}
