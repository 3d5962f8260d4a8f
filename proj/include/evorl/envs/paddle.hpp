#pragma once

#include "evorl/env.hpp"

namespace evorl {

struct PaddleConfig
{
    int episode_steps = 1000;
    double paddle_half_width = 0.07;
    double paddle_speed = 0.025; // per step at |action| = 1
    double ball_fall_speed = 0.025;
    double hot_spot = 0.7;     // where most balls drop
    double hot_fraction = 0.9;
    double hot_jitter = 0.02;
    double max_angle_deg = 45.0;
};

/// Paddle-intercept game. Balls fall from the top; most drop straight down
/// near a fixed spot, the rest fall at an angle from anywhere and bounce off
/// the side walls. Catching a ball scores +1; a miss scores 0. One action:
/// paddle velocity.
class PaddleEnv final : public Env
{
public:
    explicit PaddleEnv(PaddleConfig config = {});

    std::string name() const override { return "paddle"; }
    std::size_t observation_dim() const override { return 5; }
    std::size_t action_dim() const override { return 1; }
    int max_steps() const override { return config_.episode_steps; }
    std::unique_ptr<Env> clone() const override { return std::make_unique<PaddleEnv>(*this); }

    const PaddleConfig& config() const { return config_; }
    double paddle_x() const { return px_; }
    double ball_x() const { return bx_; }
    double ball_y() const { return by_; }
    double ball_vx() const { return bvx_; }
    double ball_vy() const { return bvy_; }
    int balls_dropped() const { return balls_; }

    static constexpr double paddle_y = 0.05;
    static constexpr double ball_radius = 0.015;

    /// Advance a free ball by one step with specular wall reflection. Exposed
    /// for the reflection test.
    static void advance_ball(double& x, double& y, double& vx, double& vy);

protected:
    std::vector<double> do_reset(EpisodeSeed seed) override;
    StepResult do_step(std::span<const double> action) override;
    double position_x() const override { return px_; }

private:
    void spawn_ball();
    std::vector<double> observe() const;

    PaddleConfig config_;
    EpisodeSeed seed_ = 0;
    int balls_ = 0;
    double px_ = 0.5;
    double bx_ = 0, by_ = 0, bvx_ = 0, bvy_ = 0;
};

} // namespace evorl
