#pragma once

#include "evorl/env.hpp"

namespace evorl {

struct SparseGoalConfig
{
    int episode_steps = 200;
    double goal_distance = 0.7;
    double goal_radius = 0.1;
    double speed = 0.05;
};

/// Point agent in the unit square centred on the origin. Reward is 0 on
/// every step until the agent enters the goal disc, then 1 and the episode
/// ends.
class SparseGoalEnv final : public Env
{
public:
    explicit SparseGoalEnv(SparseGoalConfig config = {});

    std::string name() const override { return "sparsegoal"; }
    std::size_t observation_dim() const override { return 4; }
    std::size_t action_dim() const override { return 2; }
    int max_steps() const override { return config_.episode_steps; }
    std::unique_ptr<Env> clone() const override { return std::make_unique<SparseGoalEnv>(*this); }

    double goal_x() const { return gx_; }
    double goal_y() const { return gy_; }

protected:
    std::vector<double> do_reset(EpisodeSeed seed) override;
    StepResult do_step(std::span<const double> action) override;
    double position_x() const override { return x_; }

private:
    SparseGoalConfig config_;
    double x_ = 0, y_ = 0, gx_ = 0, gy_ = 0;
};

} // namespace evorl
