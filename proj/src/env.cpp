#include "evorl/env.hpp"

#include "evorl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evorl {

void RewardComponents::add(std::string_view name, double value)
{
    for (std::size_t i = 0; i < size_; ++i)
        if (terms_[i].name == name) {
            terms_[i].value += value;
            return;
        }
    if (size_ == terms_.size())
        throw std::length_error("RewardComponents: too many terms");
    terms_[size_++] = {name, value};
}

double RewardComponents::get(std::string_view name) const
{
    for (std::size_t i = 0; i < size_; ++i)
        if (terms_[i].name == name)
            return terms_[i].value;
    return 0.0;
}

double RewardComponents::total() const
{
    double s = 0.0;
    for (std::size_t i = 0; i < size_; ++i)
        s += terms_[i].value;
    return s;
}

std::vector<double> Env::reset(EpisodeSeed seed)
{
    auto obs = do_reset(seed);
    done_ = false;
    steps_ = 0;
    start_x_ = position_x();
    return obs;
}

StepResult Env::step(std::span<const double> action)
{
    if (done_)
        throw std::logic_error(name() + ": step() called on a finished episode; reset() first");
    if (action.size() != action_dim())
        throw std::invalid_argument(name() + ": action dimension mismatch");
    std::vector<double> a(action.begin(), action.end());
    for (double& v : a)
        v = std::isfinite(v) ? std::clamp(v, -1.0, 1.0) : 0.0;
    StepResult r = do_step(a);
    r.reward = r.components.total();
    ++steps_;
    if (steps_ >= max_steps())
        r.done = true;
    done_ = r.done;
    return r;
}

EpisodeSeed Env::episode_seed(std::uint64_t eval_seed, std::size_t episode) const
{
    return derive_key({eval_seed, static_cast<std::uint64_t>(episode)});
}

} // namespace evorl
