#pragma once

#include "evorl/env.hpp"

namespace evorl {

struct RewardConfig
{
    bool incentive_enabled = true;
    double incentive_per_step = 0.1; // full upright bonus per step
    double progress_weight = 1.0;    // reward per unit of forward displacement

    void validate() const;
};

struct HopperParams
{
    double dt = 0.05;
    double gravity = 9.8;
    double rest_height = 1.0;
    double start_band = 0.1; // initial height in [rest, rest + band]
    double thrust_threshold = 0.25;
    double jump_speed = 3.5;
    double forward_gain = 1.0; // takeoff vx = gain * vz * sin(lean)
    double stance_stiffness = 20.0;
    double stance_damping = 4.0;
    double lean_gain = 8.0;
    double thrust_pitch = 2.0; // leg thrust also pitches the body
    double flight_instability = 3.0;
    double flight_lean_gain = 6.0;
    double landing_lean_limit = 0.45;
    double fall_lean = 0.8;
    double fall_reach = 5.0; // body topples this far in the lean direction on a fall
    double landing_friction = 0.3;
    double stance_friction = 0.5;
    int episode_steps = 500;
};

/// Planar one-legged hopper: body height, lean and forward position. Action
/// 0 is leg thrust (hops above a threshold), action 1 is lean torque. The
/// hopper falls when it lands with too much lean or tips past `fall_lean`.
class HopperEnv final : public Env
{
public:
    explicit HopperEnv(RewardConfig reward = {}, HopperParams params = {});

    std::string name() const override { return "hopper"; }
    std::size_t observation_dim() const override { return 6; }
    std::size_t action_dim() const override { return 2; }
    int max_steps() const override { return params_.episode_steps; }
    std::unique_ptr<Env> clone() const override { return std::make_unique<HopperEnv>(*this); }

    const RewardConfig& reward_config() const { return reward_; }
    const HopperParams& params() const { return params_; }

    double height() const { return z_; }
    double lean() const { return lean_; }
    bool grounded() const { return grounded_; }
    bool fallen() const { return fallen_; }

    /// Reward terms for a transition that moved the body by `dx` and ended
    /// with `lean`, `fallen` describing the resulting state.
    RewardComponents reward(double dx, double lean, bool fallen) const;

protected:
    std::vector<double> do_reset(EpisodeSeed seed) override;
    StepResult do_step(std::span<const double> action) override;
    double position_x() const override { return x_; }

private:
    std::vector<double> observe() const;

    RewardConfig reward_;
    HopperParams params_;
    double x_ = 0, z_ = 1, vx_ = 0, vz_ = 0, lean_ = 0, omega_ = 0;
    bool grounded_ = true;
    bool fallen_ = false;
};

} // namespace evorl
