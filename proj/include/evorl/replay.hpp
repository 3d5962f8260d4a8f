#pragma once

#include "evorl/rng.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace evorl {

/// Minibatch of transitions, all row-major.
struct TransitionBatch
{
    std::size_t count = 0;
    std::vector<double> obs;
    std::vector<double> actions;
    std::vector<double> rewards;
    std::vector<double> next_obs;
    std::vector<double> dones;
    std::vector<std::uint64_t> ids; // insertion serial of each sampled transition
};

/// Fixed-capacity FIFO ring of (s, a, r, s', d) with uniform sampling.
class ReplayBuffer
{
public:
    ReplayBuffer(std::size_t obs_dim, std::size_t act_dim, std::size_t capacity);

    void add(std::span<const double> obs, std::span<const double> action, double reward,
             std::span<const double> next_obs, bool done);

    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    std::size_t obs_dim() const { return obs_dim_; }
    std::size_t act_dim() const { return act_dim_; }
    /// Number of transitions ever added.
    std::uint64_t total_added() const { return added_; }

    /// `n` transitions drawn uniformly with replacement from stored entries.
    TransitionBatch sample(std::size_t n, Rng& rng) const;

    /// Serial of the transition held in `slot` (for inspection).
    std::uint64_t id_at(std::size_t slot) const { return ids_.at(slot); }

private:
    std::size_t obs_dim_;
    std::size_t act_dim_;
    std::size_t capacity_;
    std::size_t size_ = 0;
    std::size_t next_ = 0;
    std::uint64_t added_ = 0;
    std::vector<double> obs_, act_, rew_, next_obs_, done_;
    std::vector<std::uint64_t> ids_;
};

} // namespace evorl
