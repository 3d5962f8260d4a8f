#pragma once

#include "evorl/env.hpp"

#include <array>
#include <deque>

namespace evorl {

enum class ServeMode { random, mirrored_pairs };

struct VolleyConfig
{
    ServeMode serve_mode = ServeMode::random;
    int episode_steps = 3000;
    int points_per_episode = 5;
    int opponent_lag = 2; // steps of delay in the opponent's view of the ball
    double opponent_speed = 2.5;
    double agent_speed = 2.0;
    int opponent_serve_delay = 8; // steps the opponent holds home after a serve unless the agent touches the ball
};

/// Launch state of one serve. Angles are degrees in [0, 360), measured from
/// the +x axis (toward the opponent).
struct Serve
{
    double angle_deg = 0.0;
    double speed = 0.0;

    Serve mirrored() const;
    /// True when the ball starts moving toward the trained (left) player.
    bool toward_agent() const;
};

/// Seed whose serves are the 180-degree rotations of `seed`'s serves at the
/// same speed. An involution.
EpisodeSeed mirror_seed(EpisodeSeed seed);

/// Two-player ballistic volley game. The trained agent plays the left half,
/// a scripted tracking opponent with reaction lag plays the right half; it
/// holds its home position briefly after each serve. A
/// point is +1 when the ball lands on the opponent's ground, -1 on the
/// agent's. Actions: horizontal velocity and jump (> 0).
class VolleyEnv final : public Env
{
public:
    explicit VolleyEnv(VolleyConfig config = {});

    std::string name() const override
    {
        return config_.serve_mode == ServeMode::mirrored_pairs ? "slime-sym" : "slime";
    }
    std::size_t observation_dim() const override { return 12; }
    std::size_t action_dim() const override { return 2; }
    int max_steps() const override { return config_.episode_steps; }
    std::unique_ptr<Env> clone() const override { return std::make_unique<VolleyEnv>(*this); }

    /// In mirrored_pairs mode odd episodes replay the preceding even episode
    /// with every serve rotated by 180 degrees.
    EpisodeSeed episode_seed(std::uint64_t eval_seed, std::size_t episode) const override;

    /// The k-th serve of an episode started with `seed`.
    static Serve serve_for(EpisodeSeed seed, int k);

    const VolleyConfig& config() const { return config_; }
    int points_played() const { return points_; }
    double ball_x() const { return bx_; }
    double ball_y() const { return by_; }
    double ball_vx() const { return bvx_; }
    double ball_vy() const { return bvy_; }

    static constexpr double half_width = 2.0;
    static constexpr double net_height = 0.6;
    static constexpr double net_half_thickness = 0.03;
    static constexpr double ball_radius = 0.1;
    static constexpr double player_radius = 0.3;
    static constexpr double serve_height = 1.6;
    static constexpr double dt = 0.04;
    static constexpr double gravity = 6.0;

protected:
    std::vector<double> do_reset(EpisodeSeed seed) override;
    StepResult do_step(std::span<const double> action) override;
    double position_x() const override { return agent_.x; }

private:
    struct Player
    {
        double x, y, vx, vy;
    };
    void start_serve();
    void move_player(Player& p, double vx_cmd, bool jump, double xmin, double xmax) const;
    bool collide(const Player& p);
    std::vector<double> observe() const;

    VolleyConfig config_;
    EpisodeSeed seed_ = 0;
    int points_ = 0;
    double bx_ = 0, by_ = 0, bvx_ = 0, bvy_ = 0;
    Player agent_{}, opp_{};
    bool rally_live_ = false; // the agent has touched the ball during this point
    int point_steps_ = 0;
    std::deque<std::array<double, 4>> ball_history_;
};

} // namespace evorl
