// Command-line front end: train, posteval, compare, heatmap.

#include "evorl/envs/registry.hpp"
#include "evorl/harness/checkpoint.hpp"
#include "evorl/harness/experiment.hpp"
#include "evorl/harness/settings.hpp"
#include "evorl/harness/stats.hpp"
#include "evorl/harness/svg.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <iostream>

using namespace evorl;

namespace {

struct TrainArgs
{
    std::string algo, env, incentive, config, out;
    std::uint64_t seed = 0, budget = 0;
    std::size_t replications = 0;
    int workers = -1;
    bool posteval_stochastic = false;
    std::vector<std::string> overrides;
    std::string svg;
};

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

int cmd_train(const TrainArgs& a, CLI::App& sub)
{
    TrainSettings s;
    if (!a.config.empty())
        apply_config_file(s, a.config);
    if (sub.count("--algo"))
        s.algo = parse_algo(a.algo);
    if (sub.count("--env"))
        s.env = a.env;
    if (sub.count("--incentive"))
        set_config_value(s, "incentive", a.incentive);
    if (sub.count("--seed"))
        s.seed = a.seed;
    if (sub.count("--budget"))
        s.budget = a.budget;
    if (sub.count("--replications"))
        s.replications = a.replications;
    if (sub.count("--workers"))
        s.workers = a.workers;
    if (sub.count("--posteval-stochastic"))
        s.posteval_stochastic = true;
    for (const std::string& kv : a.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        set_config_value(s, kv.substr(0, eq), kv.substr(eq + 1));
    }
    s.validate();

    ExperimentSpec spec;
    spec.settings = s;
    spec.out_dir = a.out;
    spec.on_replication = [](const ReplicationResult& r) {
        if (r.ok)
            fmt::print("rep {:2} seed {:<6} best {:>10.4g}  post-eval return {:>10.4g}  displacement {:>8.3g}  "
                       "({:.1f}s)\n",
                       r.index, r.seed, r.best.score, r.post.mean_return, r.post.mean_displacement, r.seconds);
        else
            fmt::print("rep {:2} seed {:<6} FAILED: {}\n", r.index, r.seed, r.error);
        std::fflush(stdout);
    };
    const auto results = run_experiment(spec);
    if (!a.svg.empty()) {
        std::vector<std::pair<std::string, std::vector<CurveRow>>> curves;
        for (const auto& r : results)
            if (r.ok)
                curves.emplace_back(fmt::format("seed {}", r.seed), r.curve);
        write_file(a.svg, curve_plot_svg(curves, fmt::format("{} on {}", to_string(s.algo), s.env)));
    }
    std::size_t failed = 0;
    for (const auto& r : results)
        failed += r.ok ? 0 : 1;
    fmt::print("{} of {} replications completed; results in {}\n", results.size() - failed, results.size(),
               a.out.empty() ? "(not written)" : a.out);
    return failed == results.size() ? 1 : 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Evolution strategies and reinforcement learning on small control tasks"};
    app.require_subcommand(1);

    TrainArgs ta;
    CLI::App* train = app.add_subcommand("train", "Train agents and post-evaluate the best ones");
    train->add_option("--algo", ta.algo, "es | es-supersym | ppo | td3 | sac")
        ->check(CLI::IsMember({"es", "es-supersym", "ppo", "td3", "sac"}));
    train->add_option("--env", ta.env, "slime | slime-sym | paddle | hopper | sparsegoal")->check(CLI::IsMember(env_names()));
    train->add_option("--incentive", ta.incentive, "hopper upright incentive")->check(CLI::IsMember({"on", "off"}));
    train->add_option("--seed", ta.seed, "master seed (replication i uses seed + i)");
    train->add_option("--budget", ta.budget, "environment steps per replication");
    train->add_option("--config", ta.config, "key = value settings file")->check(CLI::ExistingFile);
    train->add_option("--out", ta.out, "output directory")->required();
    train->add_option("--replications", ta.replications, "independent runs");
    train->add_option("--workers", ta.workers, "threads (0 = serial reference kernel)");
    train->add_flag("--posteval-stochastic", ta.posteval_stochastic, "post-evaluate with the policies' sampling");
    train->add_option("--set", ta.overrides, "extra key=value settings (repeatable)");
    train->add_option("--svg", ta.svg, "write learning curves as SVG");

    std::string ckpt;
    std::size_t episodes = 5;
    std::uint64_t pe_seed = 0;
    bool stochastic = false;
    CLI::App* posteval = app.add_subcommand("posteval", "Evaluate a checkpoint on fresh episodes");
    posteval->add_option("--checkpoint", ckpt)->required()->check(CLI::ExistingFile);
    posteval->add_option("--episodes", episodes)->check(CLI::PositiveNumber);
    posteval->add_option("--seed", pe_seed, "evaluation seed (default: derived from the checkpoint seed)");
    posteval->add_flag("--stochastic", stochastic);

    std::string dir_a, dir_b, metric = "return", summary, svg;
    CLI::App* cmp = app.add_subcommand("compare", "Box statistics and rank-sum test between two train outputs");
    cmp->add_option("--a", dir_a)->required()->check(CLI::ExistingDirectory);
    cmp->add_option("--b", dir_b)->required()->check(CLI::ExistingDirectory);
    cmp->add_option("--metric", metric)->check(CLI::IsMember({"return", "displacement", "entropy"}));
    cmp->add_option("--summary", summary, "write key = value summary here");
    cmp->add_option("--svg", svg, "write box plots as SVG");

    std::string hm_svg;
    std::size_t hm_episodes = 5, nx = 0, ny = 0;
    CLI::App* hm = app.add_subcommand("heatmap", "Positional occupancy and entropy of a checkpoint");
    hm->add_option("--checkpoint", ckpt)->required()->check(CLI::ExistingFile);
    hm->add_option("--episodes", hm_episodes)->check(CLI::PositiveNumber);
    hm->add_option("--nx", nx, "grid columns");
    hm->add_option("--ny", ny, "grid rows");
    hm->add_option("--seed", pe_seed);
    hm->add_flag("--stochastic", stochastic);
    hm->add_option("--svg", hm_svg);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train)
            return cmd_train(ta, *train);
        if (*posteval || *hm) {
            const PolicyCheckpoint c = load_checkpoint(ckpt);
            const std::uint64_t key = posteval->count("--seed") || hm->count("--seed") ? pe_seed : posteval_key(c.seed);
            if (*posteval) {
                const PostEvalReport r = post_evaluate(c, episodes, key, stochastic);
                fmt::print("{} on {} (seed {}, selection score {:.6g})\n", c.algo, c.env, c.seed, c.score);
                fmt::print("{:>8}{:>14}{:>14}\n", "episode", "return", "displacement");
                for (std::size_t i = 0; i < r.returns.size(); ++i)
                    fmt::print("{:>8}{:>14.6g}{:>14.6g}\n", i, r.returns[i], r.displacements[i]);
                fmt::print("mean return {:.6g}, median {:.6g}; mean displacement {:.6g}, median {:.6g}\n",
                           r.mean_return, r.median_return, r.mean_displacement, r.median_displacement);
                return 0;
            }
            GridSpec grid = default_grid(c.env);
            if (nx)
                grid.nx = nx;
            if (ny)
                grid.ny = ny;
            auto env = make_env(c.env, c.reward);
            const PostEvalReport r = post_evaluate(c.policy, *env, hm_episodes, key, stochastic, &grid);
            fmt::print("positional entropy {:.6f} over {} samples ({}x{} cells, max {:.6f})\n", r.heatmap.entropy,
                       r.heatmap.samples, grid.nx, grid.ny,
                       std::log(static_cast<double>(grid.nx * grid.ny)));
            for (std::size_t iy = grid.ny; iy-- > 0;) {
                for (std::size_t ix = 0; ix < grid.nx; ++ix)
                    fmt::print("{:7.4f}", r.heatmap.at(ix, iy));
                fmt::print("\n");
            }
            if (!hm_svg.empty())
                write_file(hm_svg, heatmap_svg(r.heatmap, fmt::format("{} on {}", c.algo, c.env)));
            return 0;
        }
        if (*cmp) {
            const auto a = load_metric(dir_a, metric);
            const auto b = load_metric(dir_b, metric);
            const Comparison c = compare(a, b, metric, dir_a, dir_b);
            std::cout << format_table(c);
            if (!summary.empty())
                write_file(summary, format_summary(c));
            if (!svg.empty())
                write_file(svg, box_plot_svg(c));
            return 0;
        }
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
