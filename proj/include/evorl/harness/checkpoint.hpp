#pragma once

#include "evorl/envs/hopper.hpp"
#include "evorl/es.hpp"
#include "evorl/policy.hpp"
#include "evorl/ppo.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace evorl {

class CheckpointError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A trained agent plus what is needed to rebuild its environment.
struct PolicyCheckpoint
{
    std::string algo;
    std::string env;
    RewardConfig reward;
    std::uint64_t seed = 0;
    double score = 0.0; // evaluation that selected this agent
    Policy policy;
};

// Text files, one `key value...` record per line, reals in hexadecimal
// floating point so that a round trip is exact.
void write_checkpoint(std::ostream& out, const PolicyCheckpoint& c);
PolicyCheckpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const PolicyCheckpoint& c);
PolicyCheckpoint load_checkpoint(const std::string& path);

/// Complete ES search state; resuming from it reproduces an uninterrupted run.
void write_es_state(std::ostream& out, const EsState& s);
EsState read_es_state(std::istream& in);
void save_es_state(const std::string& path, const EsState& s);
EsState load_es_state(const std::string& path);

/// Actor, critic, optimizer moments, normalizer and counters.
void write_ppo_state(std::ostream& out, const PpoState& s);
PpoState read_ppo_state(std::istream& in);

} // namespace evorl
