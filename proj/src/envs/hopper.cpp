#include "evorl/envs/hopper.hpp"

#include "evorl/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace evorl {

void RewardConfig::validate() const
{
    if (incentive_per_step < 0.0)
        throw std::invalid_argument("incentive_per_step must be >= 0");
}

HopperEnv::HopperEnv(RewardConfig reward, HopperParams params) : reward_(reward), params_(params)
{
    reward_.validate();
}

std::vector<double> HopperEnv::do_reset(EpisodeSeed seed)
{
    Rng rng = make_rng(derive_key({seed, 0x686f70ULL}));
    x_ = 0.0;
    z_ = params_.rest_height + uniform(rng, 0.0, params_.start_band);
    vx_ = vz_ = 0.0;
    lean_ = omega_ = 0.0;
    grounded_ = z_ <= params_.rest_height;
    fallen_ = false;
    return observe();
}

std::vector<double> HopperEnv::observe() const
{
    return {z_ - params_.rest_height, vx_, vz_, lean_, omega_, grounded_ ? 1.0 : 0.0};
}

RewardComponents HopperEnv::reward(double dx, double lean, bool fallen) const
{
    RewardComponents rc;
    rc.add("progress", reward_.progress_weight * dx);
    double bonus = 0.0;
    if (reward_.incentive_enabled && !fallen) {
        const double r = lean / params_.fall_lean;
        bonus = reward_.incentive_per_step * std::max(0.0, 1.0 - r * r);
    }
    rc.add("incentive", bonus);
    return rc;
}

StepResult HopperEnv::do_step(std::span<const double> action)
{
    const HopperParams& p = params_;
    const double thrust = action[0];
    const double torque = action[1];
    const double x0 = x_;

    if (grounded_) {
        if (thrust > p.thrust_threshold) {
            const double s = (thrust - p.thrust_threshold) / (1.0 - p.thrust_threshold);
            vz_ = p.jump_speed * s;
            vx_ = p.forward_gain * vz_ * std::sin(lean_);
            grounded_ = false;
        }
        else {
            omega_ += p.dt * (-p.stance_stiffness * lean_ - p.stance_damping * omega_ + p.lean_gain * torque +
                              p.thrust_pitch * thrust);
            lean_ += p.dt * omega_;
            x_ += p.dt * vx_;
            vx_ *= p.stance_friction;
        }
    }
    if (!grounded_) {
        omega_ += p.dt * (p.flight_instability * lean_ + p.flight_lean_gain * torque);
        lean_ += p.dt * omega_;
        x_ += p.dt * vx_;
        z_ += p.dt * vz_;
        vz_ -= p.dt * p.gravity;
        if (z_ <= p.rest_height) {
            z_ = p.rest_height;
            vz_ = 0.0;
            vx_ *= p.landing_friction;
            omega_ = 0.0;
            grounded_ = true;
            if (std::abs(lean_) > p.landing_lean_limit)
                fallen_ = true;
        }
    }
    if (std::abs(lean_) > p.fall_lean)
        fallen_ = true;
    if (fallen_)
        x_ += std::copysign(p.fall_reach, lean_);

    StepResult r;
    r.components = reward(x_ - x0, lean_, fallen_);
    r.done = fallen_;
    r.observation = observe();
    r.pos_x = x_;
    r.pos_y = z_;
    return r;
}

} // namespace evorl
