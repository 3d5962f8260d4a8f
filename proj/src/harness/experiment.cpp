#include "evorl/harness/experiment.hpp"

#include "evorl/envs/registry.hpp"
#include "evorl/harness/stats.hpp"
#include "evorl/objectives.hpp"
#include "evorl/offpolicy.hpp"
#include "evorl/ppo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <omp.h>

namespace evorl {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t tag_init = 0x696e6974ULL;
constexpr std::uint64_t tag_posteval = 0x706f7374ULL;

std::string real(double v)
{
    return fmt::format("{:.17g}", v);
}

/// Keeps the `capacity` highest-scoring candidates.
class TopK
{
public:
    explicit TopK(std::size_t capacity) : capacity_(capacity) {}
    bool wants(double score) const
    {
        return capacity_ > 0 && (items_.size() < capacity_ || score > items_.back().score);
    }
    void offer(Candidate c)
    {
        if (!wants(c.score))
            return;
        auto pos = std::find_if(items_.begin(), items_.end(), [&](const Candidate& x) { return c.score > x.score; });
        items_.insert(pos, std::move(c));
        if (items_.size() > capacity_)
            items_.pop_back();
    }
    std::vector<Candidate> take() { return std::move(items_); }

private:
    std::size_t capacity_;
    std::vector<Candidate> items_;
};

PolicyCheckpoint make_checkpoint(const TrainSettings& s, std::uint64_t seed, double score, Policy p)
{
    PolicyCheckpoint c;
    c.algo = to_string(s.algo);
    c.env = s.env;
    c.reward = s.reward;
    c.seed = seed;
    c.score = score;
    c.policy = std::move(p);
    return c;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

std::string list(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? " " : "") + real(v[i]);
    return out;
}

void train_es(const TrainSettings& s, std::uint64_t seed, int inner_workers, const Env& proto, ReplicationResult& r,
              TopK& top, const fs::path& dir)
{
    const MlpSpec spec = es_policy_spec(proto, s.es_hidden, s.action_mode);
    PolicyObjective objective(proto, spec, s.action_mode);
    const double log_std0 = s.action_mode.kind == ActionMode::Kind::parametric_gaussian
                                ? std::log(s.action_mode.initial_sigma)
                                : 0.0;
    EsConfig cfg = s.es;
    cfg.seed_mode = s.algo == Algo::es_supersym ? SeedMode::super_symmetric : SeedMode::independent;
    EsState state = make_es_state(init_mlp(spec, derive_key({seed, tag_init}), log_std0).values, seed,
                                  proto.observation_dim(), cfg.adam);

    std::vector<double> last_center = state.center;
    ObsNormalizer last_norm = state.normalizer;
    EsRunOptions opts;
    opts.workers = inner_workers;
    opts.on_generation = [&](const GenerationReport& g, const EsState& st) {
        r.curve.push_back({st.eval_steps, st.generation, g.mean_fitness, g.best_fitness, g.center_fitness});
        // center_fitness scores the center the generation started from.
        if (top.wants(g.center_fitness))
            top.offer({g.center_fitness,
                       make_checkpoint(s, seed, g.center_fitness, objective.make_policy(last_center, last_norm))});
        last_center = st.center;
        last_norm = st.normalizer;
    };
    EsRun run = evolve(std::move(state), cfg, objective, s.budget, opts);
    const double score = run.reports.empty() ? std::numeric_limits<double>::quiet_NaN() : run.best_center_fitness;
    r.best = make_checkpoint(s, seed, score, objective.make_policy(run.best_center, run.best_normalizer));
    if (!dir.empty())
        save_es_state((dir / "es_state.ckpt").string(), run.state);
}

void train_ppo_rep(const TrainSettings& s, std::uint64_t seed, const Env& proto, ReplicationResult& r, TopK& top,
                   const fs::path& dir)
{
    std::string losses = "update,policy_loss,value_loss,entropy,clip_fraction\n";
    PpoRunOptions opts;
    opts.on_update = [&](const PpoUpdateReport& u, const Policy& evaluated) {
        r.curve.push_back({u.steps, u.update, u.mean_return, u.best_return, u.eval_return});
        losses += fmt::format("{},{},{},{},{}\n", u.update, real(u.stats.policy_loss), real(u.stats.value_loss),
                              real(u.stats.entropy), real(u.stats.clip_fraction));
        if (top.wants(u.eval_return))
            top.offer({u.eval_return, make_checkpoint(s, seed, u.eval_return, evaluated)});
    };
    PpoRun run = train_ppo(s.ppo, proto, s.budget, seed, opts);
    const double score = run.reports.empty() ? std::numeric_limits<double>::quiet_NaN() : run.best_eval;
    r.best = make_checkpoint(s, seed, score, run.best_policy);
    if (!dir.empty()) {
        write_text(dir / "ppo_losses.csv", losses);
        std::ofstream out(dir / "ppo_state.ckpt");
        write_ppo_state(out, run.state);
    }
}

void train_offpolicy(const TrainSettings& s, std::uint64_t seed, const Env& proto, ReplicationResult& r, TopK& top)
{
    OffPolicyOptions opts;
    opts.on_report = [&](const OffPolicyReport& u, const Policy& evaluated) {
        r.curve.push_back({u.steps, u.updates, u.mean_return, u.best_return, u.eval_return});
        if (top.wants(u.eval_return))
            top.offer({u.eval_return, make_checkpoint(s, seed, u.eval_return, evaluated)});
    };
    OffPolicyRun run = s.algo == Algo::td3 ? train_td3(s.rl, proto, s.budget, seed, opts)
                                           : train_sac(s.rl, proto, s.budget, seed, opts);
    const double score = run.reports.empty() ? std::numeric_limits<double>::quiet_NaN() : run.best_eval;
    r.best = make_checkpoint(s, seed, score, run.best_policy);
}

void check_compatible(const Policy& p, const Env& env)
{
    if (p.spec.input_dim() != env.observation_dim() || p.action_dim() != env.action_dim())
        throw CheckpointError(fmt::format("checkpoint network ({} -> {}) does not fit environment '{}' ({} -> {})",
                                          p.spec.input_dim(), p.action_dim(), env.name(), env.observation_dim(),
                                          env.action_dim()));
}

} // namespace

void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows)
{
    out << curve_header << '\n';
    for (const CurveRow& r : rows)
        out << r.eval_steps << ',' << r.generation_or_update << ',' << real(r.mean_return) << ','
            << real(r.best_return) << ',' << real(r.center_or_eval_return) << '\n';
}

GridSpec default_grid(const std::string& env)
{
    GridSpec g;
    if (env == "paddle") {
        g.nx = 20;
        g.x_min = 0.0;
        g.x_max = 1.0;
    }
    else if (env == "slime" || env == "slime-sym") {
        g.nx = 20;
        g.x_min = -2.0;
        g.x_max = 2.0;
    }
    else if (env == "sparsegoal") {
        g.nx = g.ny = 10;
        g.x_min = g.y_min = -0.5;
        g.x_max = g.y_max = 0.5;
    }
    else {
        g.nx = 40;
        g.x_min = -20.0;
        g.x_max = 60.0;
    }
    return g;
}

std::unique_ptr<Env> make_env_for(const TrainSettings& s)
{
    return make_env(s.env, s.reward);
}

std::uint64_t posteval_key(std::uint64_t replication_seed)
{
    return derive_key({replication_seed, tag_posteval});
}

PostEvalReport post_evaluate(const Policy& policy, const Env& prototype, std::size_t episodes, std::uint64_t seed_key,
                             bool stochastic, const GridSpec* grid)
{
    if (episodes == 0)
        throw std::invalid_argument("post_evaluate: need at least one episode");
    std::unique_ptr<Env> env = prototype.clone();
    check_compatible(policy, *env);
    PostEvalReport rep;
    std::vector<std::vector<std::pair<double, double>>> trajectories(episodes);
    for (std::size_t k = 0; k < episodes; ++k) {
        EpisodeOptions opts;
        opts.stochastic = stochastic;
        opts.action_key = derive_key({seed_key, static_cast<std::uint64_t>(k), 0x616374ULL});
        opts.positions = &trajectories[k];
        const EpisodeOutcome o = run_episode(policy, *env, env->episode_seed(seed_key, k), opts);
        rep.returns.push_back(o.ret);
        rep.displacements.push_back(o.displacement);
    }
    rep.mean_return = mean(rep.returns);
    rep.median_return = median(rep.returns);
    rep.mean_displacement = mean(rep.displacements);
    rep.median_displacement = median(rep.displacements);
    rep.heatmap = position_heatmap(trajectories, grid ? *grid : default_grid(prototype.name()));
    return rep;
}

PostEvalReport post_evaluate(const PolicyCheckpoint& checkpoint, std::size_t episodes, std::uint64_t seed_key,
                             bool stochastic)
{
    std::unique_ptr<Env> env = make_env(checkpoint.env, checkpoint.reward);
    const GridSpec grid = default_grid(checkpoint.env);
    return post_evaluate(checkpoint.policy, *env, episodes, seed_key, stochastic, &grid);
}

void write_posteval(std::ostream& out, const PostEvalReport& r)
{
    out << "episodes = " << r.returns.size() << '\n'
        << "returns = " << list(r.returns) << '\n'
        << "displacements = " << list(r.displacements) << '\n'
        << "mean_return = " << real(r.mean_return) << '\n'
        << "median_return = " << real(r.median_return) << '\n'
        << "mean_displacement = " << real(r.mean_displacement) << '\n'
        << "median_displacement = " << real(r.median_displacement) << '\n'
        << "entropy = " << real(r.heatmap.entropy) << '\n'
        << "heatmap_cells = " << r.heatmap.grid.nx << 'x' << r.heatmap.grid.ny << '\n'
        << "heatmap = " << list(r.heatmap.occupancy) << '\n';
}

PostEvalReport read_posteval(std::istream& in)
{
    PostEvalReport r;
    std::string line;
    auto values = [](const std::string& text) {
        std::istringstream ss(text);
        std::vector<double> v;
        std::string tok;
        while (ss >> tok)
            v.push_back(std::stod(tok));
        return v;
    };
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq == std::string::npos)
            continue;
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 3);
        if (key == "returns")
            r.returns = values(val);
        else if (key == "displacements")
            r.displacements = values(val);
        else if (key == "mean_return")
            r.mean_return = std::stod(val);
        else if (key == "median_return")
            r.median_return = std::stod(val);
        else if (key == "mean_displacement")
            r.mean_displacement = std::stod(val);
        else if (key == "median_displacement")
            r.median_displacement = std::stod(val);
        else if (key == "entropy")
            r.heatmap.entropy = std::stod(val);
        else if (key == "heatmap")
            r.heatmap.occupancy = values(val);
    }
    if (r.returns.empty())
        throw std::runtime_error("post-evaluation file has no returns");
    return r;
}

ReplicationResult run_replication(const TrainSettings& s, std::size_t index, std::uint64_t seed, int inner_workers,
                                  const fs::path& dir)
{
    const auto t0 = std::chrono::steady_clock::now();
    ReplicationResult r;
    r.index = index;
    r.seed = seed;
    try {
        s.validate();
        if (!dir.empty())
            fs::create_directories(dir);
        std::unique_ptr<Env> proto = make_env_for(s);
        TopK top(s.selection == Selection::global_top ? s.replications : 0);
        if (is_es(s.algo))
            train_es(s, seed, inner_workers, *proto, r, top, dir);
        else if (s.algo == Algo::ppo)
            train_ppo_rep(s, seed, *proto, r, top, dir);
        else
            train_offpolicy(s, seed, *proto, r, top);
        r.candidates = top.take();
        r.post = post_evaluate(r.best.policy, *proto, s.posteval_episodes, posteval_key(seed), s.posteval_stochastic);
        if (!dir.empty()) {
            std::ofstream curve(dir / "curve.csv");
            write_curve_csv(curve, r.curve);
            save_checkpoint((dir / "best.ckpt").string(), r.best);
            std::ofstream post(dir / "posteval.txt");
            write_posteval(post, r.post);
        }
        r.ok = true;
    }
    catch (const std::exception& e) {
        r.ok = false;
        r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

std::vector<std::uint64_t> replication_seeds(const TrainSettings& s)
{
    std::vector<std::uint64_t> seeds(s.replications);
    for (std::size_t i = 0; i < seeds.size(); ++i)
        seeds[i] = s.seed + i;
    return seeds;
}

std::vector<PolicyCheckpoint> select_agents(const std::vector<ReplicationResult>& results, Selection rule,
                                            std::size_t count)
{
    std::vector<PolicyCheckpoint> out;
    if (rule == Selection::best_per_replication) {
        for (const auto& r : results)
            if (r.ok)
                out.push_back(r.best);
        return out;
    }
    std::vector<const Candidate*> pool;
    for (const auto& r : results)
        if (r.ok)
            for (const auto& c : r.candidates)
                pool.push_back(&c);
    std::stable_sort(pool.begin(), pool.end(), [](const Candidate* a, const Candidate* b) { return a->score > b->score; });
    for (std::size_t i = 0; i < pool.size() && i < count; ++i)
        out.push_back(pool[i]->checkpoint);
    return out;
}

std::vector<ReplicationResult> run_experiment(const ExperimentSpec& spec)
{
    const TrainSettings& s = spec.settings;
    s.validate();
    const std::vector<std::uint64_t> seeds = spec.seeds.empty() ? replication_seeds(s) : spec.seeds;
    if (seeds.empty())
        throw std::invalid_argument("run_experiment: no replications");
    {
        std::vector<std::uint64_t> sorted = seeds;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("run_experiment: replication seeds must be distinct");
    }
    if (!spec.out_dir.empty()) {
        fs::create_directories(spec.out_dir);
        write_text(spec.out_dir / "config.txt", dump_config(s));
    }
    auto rep_dir = [&](std::size_t i) {
        return spec.out_dir.empty() ? fs::path{} : spec.out_dir / fmt::format("rep_{:02}", i);
    };

    const auto n = static_cast<std::ptrdiff_t>(seeds.size());
    std::vector<ReplicationResult> results(seeds.size());
    if (n > 1 && s.workers > 1) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(s.workers)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            results[k] = run_replication(s, k, seeds[k], 0, rep_dir(k));
        }
        if (spec.on_replication)
            for (const auto& r : results)
                spec.on_replication(r);
    }
    else {
        for (std::size_t k = 0; k < seeds.size(); ++k) {
            results[k] = run_replication(s, k, seeds[k], s.workers, rep_dir(k));
            if (spec.on_replication)
                spec.on_replication(results[k]);
        }
    }

    if (!spec.out_dir.empty()) {
        const std::vector<PolicyCheckpoint> agents = select_agents(results, s.selection, seeds.size());
        std::string csv = "agent,seed,score,mean_return,median_return,mean_displacement,median_displacement,entropy\n";
        const fs::path sel = spec.out_dir / "selected";
        if (s.selection == Selection::global_top)
            fs::create_directories(sel);
        for (std::size_t i = 0; i < agents.size(); ++i) {
            const auto& a = agents[i];
            const PostEvalReport p = s.selection == Selection::best_per_replication
                                         ? std::find_if(results.begin(), results.end(),
                                                        [&](const ReplicationResult& r) { return r.ok && r.seed == a.seed; })
                                               ->post
                                         : post_evaluate(a, s.posteval_episodes, posteval_key(a.seed),
                                                         s.posteval_stochastic);
            if (s.selection == Selection::global_top)
                save_checkpoint((sel / fmt::format("agent_{:02}.ckpt", i)).string(), a);
            csv += fmt::format("{},{},{},{},{},{},{},{}\n", i, a.seed, real(a.score), real(p.mean_return),
                               real(p.median_return), real(p.mean_displacement), real(p.median_displacement),
                               real(p.heatmap.entropy));
        }
        write_text(spec.out_dir / "posteval_summary.csv", csv);
        std::string failures;
        for (const auto& r : results)
            if (!r.ok)
                failures += fmt::format("rep_{:02} seed {}: {}\n", r.index, r.seed, r.error);
        if (!failures.empty())
            write_text(spec.out_dir / "failures.txt", failures);
    }
    return results;
}

std::vector<double> load_metric(const fs::path& dir, const std::string& metric)
{
    std::size_t column = 0;
    if (metric == "return")
        column = 3;
    else if (metric == "displacement")
        column = 5;
    else if (metric == "entropy")
        column = 7;
    else
        throw std::invalid_argument("unknown metric '" + metric + "' (return, displacement, entropy)");
    std::ifstream in(dir / "posteval_summary.csv");
    if (!in)
        throw std::runtime_error("no posteval_summary.csv in '" + dir.string() + "'");
    std::string line;
    std::getline(in, line);
    std::vector<double> out;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string cell;
        for (std::size_t c = 0; c <= column && std::getline(ss, cell, ','); ++c) {
        }
        out.push_back(std::stod(cell));
    }
    if (out.empty())
        throw std::runtime_error("metric '" + metric + "' missing: no agents in '" + dir.string() + "'");
    return out;
}

} // namespace evorl
