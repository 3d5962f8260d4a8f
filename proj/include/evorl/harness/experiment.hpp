#pragma once

#include "evorl/env.hpp"
#include "evorl/harness/checkpoint.hpp"
#include "evorl/harness/heatmap.hpp"
#include "evorl/harness/settings.hpp"
#include "evorl/policy.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace evorl {

/// One learning-curve row: per ES generation or per RL update/report.
struct CurveRow
{
    std::uint64_t eval_steps = 0;
    std::uint64_t generation_or_update = 0;
    double mean_return = 0.0;
    double best_return = 0.0;
    double center_or_eval_return = 0.0;
};

constexpr const char* curve_header = "eval_steps,generation_or_update,mean_return,best_return,center_or_eval_return";
void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows);

struct PostEvalReport
{
    std::vector<double> returns;
    std::vector<double> displacements;
    double mean_return = 0.0;
    double median_return = 0.0;
    double mean_displacement = 0.0;
    double median_displacement = 0.0;
    Heatmap heatmap; // positions visited over all episodes
};

/// Occupancy grid used for positional entropy on each environment.
GridSpec default_grid(const std::string& env);

std::unique_ptr<Env> make_env_for(const TrainSettings& s);

/// Runs `episodes` fresh episodes keyed by `seed_key` with deterministic
/// actions (or the policy's own sampling when `stochastic`).
PostEvalReport post_evaluate(const Policy& policy, const Env& prototype, std::size_t episodes,
                             std::uint64_t seed_key, bool stochastic = false, const GridSpec* grid = nullptr);
PostEvalReport post_evaluate(const PolicyCheckpoint& checkpoint, std::size_t episodes, std::uint64_t seed_key,
                             bool stochastic = false);

/// Seed key for the post-evaluation episodes of a replication.
std::uint64_t posteval_key(std::uint64_t replication_seed);

void write_posteval(std::ostream& out, const PostEvalReport& r);
PostEvalReport read_posteval(std::istream& in);

struct Candidate
{
    double score = 0.0;
    PolicyCheckpoint checkpoint;
};

struct ReplicationResult
{
    std::size_t index = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    std::vector<CurveRow> curve;
    PolicyCheckpoint best;
    PostEvalReport post;
    std::vector<Candidate> candidates; // top-R evaluations, kept for global selection
    double seconds = 0.0;
};

/// Trains one replication. `inner_workers` drives the ES population kernel.
/// When `dir` is non-empty the curve, best checkpoint and post-evaluation
/// are written there.
ReplicationResult run_replication(const TrainSettings& s, std::size_t index, std::uint64_t seed, int inner_workers,
                                  const std::filesystem::path& dir = {});

struct ExperimentSpec
{
    TrainSettings settings;
    std::vector<std::uint64_t> seeds; // empty: seed, seed + 1, ...
    std::filesystem::path out_dir;    // empty: nothing written
    std::function<void(const ReplicationResult&)> on_replication;
};

std::vector<std::uint64_t> replication_seeds(const TrainSettings& s);

/// Runs every replication; a failing replication is recorded and the rest
/// continue. With several replications and workers > 1 replications run
/// concurrently, each with a serial population kernel.
std::vector<ReplicationResult> run_experiment(const ExperimentSpec& spec);

/// The agents that enter post-evaluation under the configured selection rule.
std::vector<PolicyCheckpoint> select_agents(const std::vector<ReplicationResult>& results, Selection rule,
                                            std::size_t count);

/// Per-replication values of `metric` (return, displacement, entropy) read
/// from the post-evaluation files below `dir`.
std::vector<double> load_metric(const std::filesystem::path& dir, const std::string& metric);

} // namespace evorl
