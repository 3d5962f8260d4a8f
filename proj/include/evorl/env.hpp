#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evorl {

/// 64-bit value that drives all randomness of one episode.
using EpisodeSeed = std::uint64_t;

/// Named reward terms of one transition; the step reward is their sum.
class RewardComponents
{
public:
    struct Term
    {
        std::string_view name;
        double value = 0.0;
    };

    void add(std::string_view name, double value);
    double get(std::string_view name) const;
    double total() const;
    std::span<const Term> terms() const { return {terms_.data(), size_}; }

private:
    std::array<Term, 6> terms_{};
    std::size_t size_ = 0;
};

struct StepResult
{
    std::vector<double> observation;
    double reward = 0.0;
    RewardComponents components;
    bool done = false;
    // Agent position, for displacement and occupancy analysis.
    double pos_x = 0.0;
    double pos_y = 0.0;
};

/// Deterministic, seed-controlled environment. Actions live in [-1, 1]^n and
/// are clamped on entry.
class Env
{
public:
    virtual ~Env() = default;

    virtual std::string name() const = 0;
    virtual std::size_t observation_dim() const = 0;
    virtual std::size_t action_dim() const = 0;
    virtual int max_steps() const = 0;

    std::vector<double> reset(EpisodeSeed seed);
    StepResult step(std::span<const double> action);
    virtual std::unique_ptr<Env> clone() const = 0;

    /// Seed of the k-th episode of an evaluation keyed by `eval_seed`.
    virtual EpisodeSeed episode_seed(std::uint64_t eval_seed, std::size_t episode) const;

    bool done() const { return done_; }
    int steps() const { return steps_; }
    /// Starting position of the current episode (for displacement).
    double start_x() const { return start_x_; }

protected:
    virtual std::vector<double> do_reset(EpisodeSeed seed) = 0;
    virtual StepResult do_step(std::span<const double> action) = 0;
    virtual double position_x() const = 0;

private:
    bool done_ = true;
    int steps_ = 0;
    double start_x_ = 0.0;
};

} // namespace evorl
