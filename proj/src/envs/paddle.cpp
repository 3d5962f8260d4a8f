#include "evorl/envs/paddle.hpp"

#include "evorl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace evorl {

PaddleEnv::PaddleEnv(PaddleConfig config) : config_(config) {}

void PaddleEnv::advance_ball(double& x, double& y, double& vx, double& vy)
{
    x += vx;
    y += vy;
    if (x < ball_radius) {
        x = 2.0 * ball_radius - x;
        vx = -vx;
    }
    else if (x > 1.0 - ball_radius) {
        x = 2.0 * (1.0 - ball_radius) - x;
        vx = -vx;
    }
}

std::vector<double> PaddleEnv::do_reset(EpisodeSeed seed)
{
    seed_ = seed;
    balls_ = 0;
    px_ = 0.5;
    spawn_ball();
    return observe();
}

void PaddleEnv::spawn_ball()
{
    Rng rng = make_rng(derive_key({seed_, static_cast<std::uint64_t>(balls_), 0x7061646cULL}));
    by_ = 1.0;
    bvy_ = -config_.ball_fall_speed;
    if (uniform(rng, 0.0, 1.0) < config_.hot_fraction) {
        bx_ = config_.hot_spot + uniform(rng, -config_.hot_jitter, config_.hot_jitter);
        bvx_ = 0.0;
    }
    else {
        bx_ = uniform(rng, 0.1, 0.9);
        const double angle = uniform(rng, -config_.max_angle_deg, config_.max_angle_deg) * std::numbers::pi / 180.0;
        bvx_ = std::tan(angle) * config_.ball_fall_speed;
    }
    ++balls_;
}

StepResult PaddleEnv::do_step(std::span<const double> action)
{
    px_ = std::clamp(px_ + action[0] * config_.paddle_speed, config_.paddle_half_width,
                     1.0 - config_.paddle_half_width);
    advance_ball(bx_, by_, bvx_, bvy_);

    StepResult r;
    double score = 0.0;
    if (by_ <= paddle_y) {
        if (std::abs(bx_ - px_) <= config_.paddle_half_width + ball_radius)
            score = 1.0;
        spawn_ball();
    }
    r.components.add("score", score);
    r.observation = observe();
    r.pos_x = px_;
    r.pos_y = paddle_y;
    return r;
}

std::vector<double> PaddleEnv::observe() const
{
    constexpr double vs = 40.0;
    return {px_ - 0.5, bx_ - 0.5, by_ - 0.5, bvx_ * vs, bvy_ * vs};
}

} // namespace evorl
