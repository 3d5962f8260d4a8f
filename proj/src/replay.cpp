#include "evorl/replay.hpp"

#include <algorithm>

namespace evorl {

ReplayBuffer::ReplayBuffer(std::size_t obs_dim, std::size_t act_dim, std::size_t capacity)
    : obs_dim_(obs_dim), act_dim_(act_dim), capacity_(capacity)
{
    if (capacity == 0)
        throw std::invalid_argument("ReplayBuffer: capacity must be >= 1");
    obs_.resize(capacity * obs_dim);
    next_obs_.resize(capacity * obs_dim);
    act_.resize(capacity * act_dim);
    rew_.resize(capacity);
    done_.resize(capacity);
    ids_.resize(capacity);
}

void ReplayBuffer::add(std::span<const double> obs, std::span<const double> action, double reward,
                       std::span<const double> next_obs, bool done)
{
    if (obs.size() != obs_dim_ || next_obs.size() != obs_dim_ || action.size() != act_dim_)
        throw std::invalid_argument("ReplayBuffer::add: transition shape mismatch");
    std::copy(obs.begin(), obs.end(), obs_.begin() + static_cast<std::ptrdiff_t>(next_ * obs_dim_));
    std::copy(next_obs.begin(), next_obs.end(), next_obs_.begin() + static_cast<std::ptrdiff_t>(next_ * obs_dim_));
    std::copy(action.begin(), action.end(), act_.begin() + static_cast<std::ptrdiff_t>(next_ * act_dim_));
    rew_[next_] = reward;
    done_[next_] = done ? 1.0 : 0.0;
    ids_[next_] = added_++;
    next_ = (next_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
}

TransitionBatch ReplayBuffer::sample(std::size_t n, Rng& rng) const
{
    if (size_ == 0)
        throw std::logic_error("ReplayBuffer::sample: buffer is empty");
    std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
    TransitionBatch b;
    b.count = n;
    b.obs.reserve(n * obs_dim_);
    b.next_obs.reserve(n * obs_dim_);
    b.actions.reserve(n * act_dim_);
    b.rewards.reserve(n);
    b.dones.reserve(n);
    b.ids.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = pick(rng);
        const auto o = obs_.begin() + static_cast<std::ptrdiff_t>(i * obs_dim_);
        const auto no = next_obs_.begin() + static_cast<std::ptrdiff_t>(i * obs_dim_);
        const auto a = act_.begin() + static_cast<std::ptrdiff_t>(i * act_dim_);
        b.obs.insert(b.obs.end(), o, o + static_cast<std::ptrdiff_t>(obs_dim_));
        b.next_obs.insert(b.next_obs.end(), no, no + static_cast<std::ptrdiff_t>(obs_dim_));
        b.actions.insert(b.actions.end(), a, a + static_cast<std::ptrdiff_t>(act_dim_));
        b.rewards.push_back(rew_[i]);
        b.dones.push_back(done_[i]);
        b.ids.push_back(ids_[i]);
    }
    return b;
}

} // namespace evorl
