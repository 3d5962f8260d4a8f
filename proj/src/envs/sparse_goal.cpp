#include "evorl/envs/sparse_goal.hpp"

#include "evorl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace evorl {

SparseGoalEnv::SparseGoalEnv(SparseGoalConfig config) : config_(config) {}

std::vector<double> SparseGoalEnv::do_reset(EpisodeSeed seed)
{
    Rng rng = make_rng(derive_key({seed, 0x676f616cULL}));
    const double theta = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    x_ = y_ = 0.0;
    gx_ = config_.goal_distance * std::cos(theta);
    gy_ = config_.goal_distance * std::sin(theta);
    return {x_, y_, gx_, gy_};
}

StepResult SparseGoalEnv::do_step(std::span<const double> action)
{
    x_ = std::clamp(x_ + config_.speed * action[0], -1.0, 1.0);
    y_ = std::clamp(y_ + config_.speed * action[1], -1.0, 1.0);
    StepResult r;
    const bool reached = std::hypot(x_ - gx_, y_ - gy_) <= config_.goal_radius;
    r.components.add("goal", reached ? 1.0 : 0.0);
    r.done = reached;
    r.observation = {x_, y_, gx_, gy_};
    r.pos_x = x_;
    r.pos_y = y_;
    return r;
}

} // namespace evorl
