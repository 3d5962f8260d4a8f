#include "evorl/envs/volley.hpp"

#include "evorl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace evorl {

namespace {

constexpr std::uint64_t mirror_bit = 1ULL << 63;
constexpr double home_x = 1.0;
constexpr double jump_speed = 3.5;
constexpr double max_ball_speed = 6.0;
constexpr double ceiling = 4.0;

double wrap_degrees(double a)
{
    a = std::fmod(a, 360.0);
    return a < 0.0 ? a + 360.0 : a;
}

} // namespace

Serve Serve::mirrored() const
{
    return {wrap_degrees(angle_deg + 180.0), speed};
}

bool Serve::toward_agent() const
{
    return std::cos(angle_deg * std::numbers::pi / 180.0) < 0.0;
}

EpisodeSeed mirror_seed(EpisodeSeed seed)
{
    return seed ^ mirror_bit;
}

Serve VolleyEnv::serve_for(EpisodeSeed seed, int k)
{
    const std::uint64_t base = seed & ~mirror_bit;
    const bool mirrored = (seed & mirror_bit) != 0;
    Rng rng = make_rng(derive_key({base, static_cast<std::uint64_t>(k), 0x736572766555ULL}));
    const double tilt = uniform(rng, -20.0, 20.0);
    const bool left = uniform(rng, 0.0, 1.0) < 0.5;
    const double speed = uniform(rng, 2.5, 3.0);
    Serve s{wrap_degrees(tilt + (left ? 180.0 : 0.0)), speed};
    return mirrored ? s.mirrored() : s;
}

VolleyEnv::VolleyEnv(VolleyConfig config) : config_(config) {}

EpisodeSeed VolleyEnv::episode_seed(std::uint64_t eval_seed, std::size_t episode) const
{
    if (config_.serve_mode == ServeMode::mirrored_pairs && episode % 2 == 1)
        return mirror_seed(episode_seed(eval_seed, episode - 1));
    // Keep the mirror bit clear so every random-mode seed is a canonical serve.
    return Env::episode_seed(eval_seed, episode) & ~mirror_bit;
}

std::vector<double> VolleyEnv::do_reset(EpisodeSeed seed)
{
    seed_ = seed;
    points_ = 0;
    start_serve();
    return observe();
}

void VolleyEnv::start_serve()
{
    const Serve s = serve_for(seed_, points_);
    const double rad = s.angle_deg * std::numbers::pi / 180.0;
    bx_ = 0.0;
    by_ = serve_height;
    bvx_ = s.speed * std::cos(rad);
    bvy_ = s.speed * std::sin(rad);
    agent_ = {-home_x, 0.0, 0.0, 0.0};
    opp_ = {home_x, 0.0, 0.0, 0.0};
    rally_live_ = false;
    point_steps_ = 0;
    ball_history_.assign(static_cast<std::size_t>(std::max(1, config_.opponent_lag)), {bx_, by_, bvx_, bvy_});
}

void VolleyEnv::move_player(Player& p, double vx_cmd, bool jump, double xmin, double xmax) const
{
    p.vx = vx_cmd;
    p.x = std::clamp(p.x + dt * p.vx, xmin, xmax);
    if (jump && p.y <= 0.0)
        p.vy = jump_speed;
    p.vy -= dt * gravity;
    p.y += dt * p.vy;
    if (p.y <= 0.0) {
        p.y = 0.0;
        p.vy = 0.0;
    }
}

bool VolleyEnv::collide(const Player& p)
{
    const double dx = bx_ - p.x;
    const double dy = by_ - p.y;
    const double reach = player_radius + ball_radius;
    const double d = std::hypot(dx, dy);
    if (d >= reach || dy < 0.0 || d == 0.0)
        return false;
    const double nx = dx / d;
    const double ny = dy / d;
    double rvx = bvx_ - p.vx;
    double rvy = bvy_ - p.vy;
    const double vn = rvx * nx + rvy * ny;
    if (vn < 0.0) {
        rvx -= 2.0 * vn * nx;
        rvy -= 2.0 * vn * ny;
        bvx_ = rvx + p.vx;
        bvy_ = rvy + p.vy;
    }
    bx_ = p.x + nx * reach;
    by_ = p.y + ny * reach;
    return true;
}

StepResult VolleyEnv::do_step(std::span<const double> action)
{
    const double wall = half_width;
    move_player(agent_, action[0] * config_.agent_speed, action[1] > 0.0, -wall + player_radius,
                -net_half_thickness - player_radius);

    // Scripted opponent: tracks the delayed ball slightly on its far side so
    // returns go back over the net.
    const auto& seen = ball_history_.front();
    const bool awake = rally_live_ || point_steps_ >= config_.opponent_serve_delay;
    ++point_steps_;
    const double target = awake && seen[0] > 0.0 ? seen[0] + 0.12 : home_x;
    const double opp_v = std::clamp((target - opp_.x) / dt, -config_.opponent_speed, config_.opponent_speed);
    const bool opp_jump = awake && std::abs(seen[0] - opp_.x) < 0.3 && seen[1] < 1.0 && seen[3] < 0.0 && seen[0] > 0.0;
    move_player(opp_, opp_v, opp_jump, net_half_thickness + player_radius, wall - player_radius);

    const double prev_x = bx_;
    const double prev_y = by_;
    bvy_ -= dt * gravity;
    bx_ += dt * bvx_;
    by_ += dt * bvy_;

    if (bx_ < -wall + ball_radius) {
        bx_ = -wall + ball_radius;
        bvx_ = std::abs(bvx_);
    }
    else if (bx_ > wall - ball_radius) {
        bx_ = wall - ball_radius;
        bvx_ = -std::abs(bvx_);
    }
    if (by_ > ceiling - ball_radius) {
        by_ = ceiling - ball_radius;
        bvy_ = -std::abs(bvy_);
    }
    if (std::abs(bx_) < net_half_thickness + ball_radius && by_ < net_height + ball_radius) {
        if (prev_y >= net_height + ball_radius) {
            by_ = net_height + ball_radius;
            bvy_ = std::abs(bvy_);
        }
        else {
            const double side = prev_x < 0.0 ? -1.0 : 1.0;
            bx_ = side * (net_half_thickness + ball_radius);
            bvx_ = side * std::abs(bvx_);
        }
    }
    if (collide(agent_))
        rally_live_ = true;
    collide(opp_);
    const double speed = std::hypot(bvx_, bvy_);
    if (speed > max_ball_speed) {
        bvx_ *= max_ball_speed / speed;
        bvy_ *= max_ball_speed / speed;
    }

    StepResult r;
    double score = 0.0;
    if (by_ <= ball_radius) {
        score = bx_ < 0.0 ? -1.0 : 1.0;
        ++points_;
        if (points_ >= config_.points_per_episode)
            r.done = true;
        else
            start_serve();
    }
    else {
        ball_history_.pop_front();
        ball_history_.push_back({bx_, by_, bvx_, bvy_});
    }
    r.components.add("score", score);
    r.observation = observe();
    r.pos_x = agent_.x;
    r.pos_y = agent_.y;
    return r;
}

std::vector<double> VolleyEnv::observe() const
{
    constexpr double ps = 0.5;  // position scale
    constexpr double vs = 0.25; // velocity scale
    return {agent_.x * ps, agent_.y * ps, agent_.vx * vs, agent_.vy * vs, bx_ * ps, by_ * ps,
            bvx_ * vs,     bvy_ * vs,     opp_.x * ps,    opp_.y * ps,    opp_.vx * vs, opp_.vy * vs};
}

} // namespace evorl
