#include "evorl/envs/registry.hpp"

#include "evorl/envs/paddle.hpp"
#include "evorl/envs/sparse_goal.hpp"
#include "evorl/envs/volley.hpp"

#include <stdexcept>

namespace evorl {

std::unique_ptr<Env> make_env(const std::string& name, const RewardConfig& reward)
{
    if (name == "hopper")
        return std::make_unique<HopperEnv>(reward);
    if (name == "slime" || name == "slime-sym") {
        VolleyConfig vc;
        vc.serve_mode = name == "slime" ? ServeMode::random : ServeMode::mirrored_pairs;
        return std::make_unique<VolleyEnv>(vc);
    }
    if (name == "paddle")
        return std::make_unique<PaddleEnv>();
    if (name == "sparsegoal")
        return std::make_unique<SparseGoalEnv>();
    throw std::invalid_argument("unknown environment '" + name + "'");
}

std::vector<std::string> env_names()
{
    return {"slime", "slime-sym", "paddle", "hopper", "sparsegoal"};
}

} // namespace evorl
