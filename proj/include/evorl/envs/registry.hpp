#pragma once

#include "evorl/env.hpp"
#include "evorl/envs/hopper.hpp"

#include <memory>
#include <string>
#include <vector>

namespace evorl {

/// Registered names: slime, slime-sym, paddle, hopper, sparsegoal.
std::unique_ptr<Env> make_env(const std::string& name, const RewardConfig& reward = {});
std::vector<std::string> env_names();

} // namespace evorl
