#include "evorl/es.hpp"
#include "evorl/objectives.hpp"
#include "evorl/population.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

using namespace evorl;

TEST_SUITE("es_core")
{
    TEST_CASE("perturbations are antithetic and regenerable")
    {
        EsState s = make_es_state(std::vector<double>(5, 0.0), 42);
        EsConfig c;
        const auto p1 = sample_perturbations(s, c);
        const auto p2 = sample_perturbations(s, c);
        REQUIRE(p1.size() == 20);
        for (std::size_t i = 0; i < p1.size(); ++i) {
            CHECK(p1[i].noise_seed == p2[i].noise_seed);
            const auto e = perturbation(p1[i].noise_seed, 5);
            CHECK(e == perturbation(p2[i].noise_seed, 5));
            for (double v : e)
                CHECK(v + (-v) == 0.0);
        }
        s.generation = 1;
        CHECK(sample_perturbations(s, c)[0].noise_seed != p1[0].noise_seed);
    }

    TEST_CASE("noise entries are standard normal")
    {
        const auto e = perturbation(123, 100000);
        double ss = 0, s = 0;
        for (double v : e) {
            s += v;
            ss += v * v;
        }
        const double sd = std::sqrt(ss / e.size() - (s / e.size()) * (s / e.size()));
        CHECK(std::abs(sd - 1.0) < 0.02);
    }

    TEST_CASE("seed assignment per mode")
    {
        std::vector<PerturbationPair> pairs(50);
        Rng rng = make_rng(1);
        assign_seeds(pairs, SeedMode::super_symmetric, rng);
        std::set<std::uint64_t> gen1;
        for (const auto& p : pairs) {
            CHECK(p.eval_seed_plus == p.eval_seed_minus);
            gen1.insert(p.eval_seed_plus);
        }
        CHECK(gen1.size() == 50);

        assign_seeds(pairs, SeedMode::independent, rng);
        std::set<std::uint64_t> all;
        for (const auto& p : pairs) {
            all.insert(p.eval_seed_plus);
            all.insert(p.eval_seed_minus);
        }
        CHECK(all.size() == 100);
        for (std::uint64_t s : gen1)
            CHECK(all.count(s) == 0);
    }

    TEST_CASE("centered-rank shaping")
    {
        CHECK(shape_fitness(std::vector<double>{5, 9}) == std::vector<double>{-0.5, 0.5});
        const auto u = shape_fitness(std::vector<double>{3, 1, 2, 10});
        CHECK(u[0] == doctest::Approx(1.0 / 6));
        CHECK(u[1] == doctest::Approx(-0.5));
        CHECK(u[2] == doctest::Approx(-1.0 / 6));
        CHECK(u[3] == doctest::Approx(0.5));
        CHECK(shape_fitness(std::vector<double>{4, 4, 4, 4}) == std::vector<double>(4, 0.0));
        CHECK_THROWS_AS(shape_fitness(std::vector<double>{1, NAN}), std::invalid_argument);
    }

    TEST_CASE("shaping is rank-invariant and sums to zero")
    {
        Rng rng = make_rng(8);
        const auto raw = oracle::uniform_vector(rng, 40, -3, 3);
        std::vector<double> ex(raw.size());
        std::transform(raw.begin(), raw.end(), ex.begin(), [](double v) { return std::exp(v); });
        const auto u = shape_fitness(raw);
        CHECK(u == shape_fitness(ex));
        double s = 0;
        for (double v : u)
            s += v;
        CHECK(std::abs(s) < 1e-12);
        std::vector<std::size_t> a(raw.size()), b(raw.size());
        std::iota(a.begin(), a.end(), 0);
        std::iota(b.begin(), b.end(), 0);
        std::sort(a.begin(), a.end(), [&](auto i, auto j) { return raw[i] < raw[j]; });
        std::sort(b.begin(), b.end(), [&](auto i, auto j) { return u[i] < u[j]; });
        CHECK(a == b);
    }

    TEST_CASE("gradient estimator hand case and pair-order independence")
    {
        // N = 1, sigma = 0.1, u = (0.5, -0.5): g = 5 eps, i.e. (5, 0) for eps = (1, 0).
        PerturbationPair p;
        p.pair_index = 0;
        p.noise_seed = 99;
        const auto eps = perturbation(99, 2);
        const std::vector<PerturbationPair> one{p};
        const auto g = estimate_gradient(one, std::vector<double>{0.5, -0.5}, 0.1, 2);
        CHECK(g[0] == doctest::Approx(5.0 * eps[0]));
        CHECK(g[1] == doctest::Approx(5.0 * eps[1]));

        const auto zero = estimate_gradient(one, std::vector<double>{0.3, 0.3}, 0.1, 2);
        CHECK(zero == std::vector<double>{0.0, 0.0});

        std::vector<PerturbationPair> pairs(6);
        std::vector<double> util;
        for (std::size_t i = 0; i < 6; ++i) {
            pairs[i].pair_index = i;
            pairs[i].noise_seed = 1000 + i;
            util.push_back(0.1 * i);
            util.push_back(-0.07 * i * i);
        }
        const auto ref = estimate_gradient(pairs, util, 0.02, 7);
        std::vector<PerturbationPair> shuffled{pairs[3], pairs[0], pairs[5], pairs[1], pairs[4], pairs[2]};
        std::vector<double> su;
        for (const auto& q : shuffled) {
            su.push_back(util[2 * q.pair_index]);
            su.push_back(util[2 * q.pair_index + 1]);
        }
        CHECK(estimate_gradient(shuffled, su, 0.02, 7) == ref);
        CHECK_THROWS_AS(estimate_gradient(pairs, std::vector<double>(3), 0.02, 7), std::invalid_argument);
    }

    TEST_CASE("es_step: Adam first step, weight decay, errors")
    {
        EsConfig c;
        c.weight_decay = 0.0;
        EsState s = make_es_state({1.0, -2.0, 0.5}, 1);
        es_step(s, std::vector<double>{0, 0, 0}, c);
        CHECK(s.center == std::vector<double>{1.0, -2.0, 0.5});
        CHECK(s.generation == 1);

        EsState t = make_es_state({0.0, 0.0}, 1);
        es_step(t, std::vector<double>{3.0, -0.001}, c);
        CHECK(t.center[0] == doctest::Approx(0.01).epsilon(1e-6));
        CHECK(t.center[1] == doctest::Approx(-0.01).epsilon(1e-4));

        c.weight_decay = 0.005;
        EsState d = make_es_state({2.0, -4.0}, 1);
        es_step(d, std::vector<double>{0, 0}, c);
        CHECK(d.center[0] == doctest::Approx(2.0 * 0.995));
        CHECK(d.center[1] == doctest::Approx(-4.0 * 0.995));

        CHECK_THROWS(es_step(d, std::vector<double>{NAN, 0}, c));
        CHECK_THROWS(es_step(d, std::vector<double>{0}, c));
    }

    TEST_CASE("evolve accounting and determinism")
    {
        SphereObjective sphere(std::vector<double>(4, 1.0));
        EsConfig c;
        EsRunOptions o;
        o.max_generations = 100;
        const auto a = evolve(make_es_state(std::vector<double>(4, 0.0), 5), c, sphere, 1u << 30, o);
        CHECK(a.state.evaluations == 40u * 100u);
        CHECK(a.reports.size() == 100);
        o.workers = 3;
        const auto b = evolve(make_es_state(std::vector<double>(4, 0.0), 5), c, sphere, 1u << 30, o);
        CHECK(a.state.center == b.state.center);
        for (std::size_t i = 0; i < a.reports.size(); ++i) {
            CHECK(a.reports[i].center_fitness == b.reports[i].center_fitness);
            if (i > 0)
                CHECK(a.reports[i].eval_steps > a.reports[i - 1].eval_steps);
        }
    }

    TEST_CASE("budget counts offspring steps")
    {
        SphereObjective sphere(std::vector<double>(3, 0.0));
        EsConfig c;
        c.pop_pairs = 5;
        const auto run = evolve(make_es_state(std::vector<double>(3, 1.0), 2), c, sphere, 95);
        CHECK(run.reports.size() == 10);
        CHECK(run.state.eval_steps == 100);
    }

    TEST_CASE("serial and OpenMP kernels agree bit for bit")
    {
        NoisySphereObjective obj(std::vector<double>(6, 0.3), 2.0);
        EsState s = make_es_state(std::vector<double>(6, 0.0), 17);
        EsConfig c;
        auto pairs = sample_perturbations(s, c);
        Rng rng = make_rng(3);
        assign_seeds(pairs, SeedMode::independent, rng);
        const auto ser = evaluate_population_serial(obj, s.center, c.sigma, pairs, 2, {});
        for (int w : {1, 2, 4}) {
            const auto par = evaluate_population_omp(obj, s.center, c.sigma, pairs, 2, {}, w);
            REQUIRE(par.size() == ser.size());
            for (std::size_t j = 0; j < ser.size(); ++j) {
                CHECK(par[j].fitness == ser[j].fitness);
                CHECK(par[j].steps == ser[j].steps);
            }
        }
    }

    TEST_CASE("common random numbers cancel exactly")
    {
        const std::vector<double> opt{0.5, -1.0, 2.0, 0.0, 1.5};
        SphereObjective clean(opt);
        NoisySphereObjective noisy(opt, 50.0);
        EsConfig c;
        c.seed_mode = SeedMode::super_symmetric;
        c.fitness_mode = FitnessMode::raw_paired_difference;
        EsState a = make_es_state(std::vector<double>(5, 0.1), 9);
        EsState b = a;
        std::vector<double> ga, gb;
        es_generation(a, c, clean, 1, &ga);
        es_generation(b, c, noisy, 1, &gb);
        CHECK(oracle::rel_error(ga, gb) <= 1e-12);
    }

    TEST_CASE("config validation")
    {
        EsConfig c;
        c.sigma = 0;
        CHECK_THROWS(c.validate());
        c = {};
        c.pop_pairs = 0;
        CHECK_THROWS(c.validate());
        c = {};
        c.weight_decay = 1.0;
        CHECK_THROWS(c.validate());
    }
}
