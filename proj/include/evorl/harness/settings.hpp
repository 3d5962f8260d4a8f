#pragma once

#include "evorl/action.hpp"
#include "evorl/envs/hopper.hpp"
#include "evorl/es.hpp"
#include "evorl/offpolicy.hpp"
#include "evorl/ppo.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace evorl {

enum class Algo { es, es_supersym, ppo, td3, sac };

std::string to_string(Algo a);
Algo parse_algo(const std::string& s);
bool is_es(Algo a);

/// How the per-replication agents entering post-evaluation are chosen.
enum class Selection {
    best_per_replication, // each replication contributes its best checkpoint
    global_top            // the R best checkpoints over all recorded candidates
};

/// Everything a `train` invocation needs. Loaded from `key = value` files
/// and overridden from the command line.
struct TrainSettings
{
    Algo algo = Algo::es;
    std::string env = "hopper";
    RewardConfig reward;
    std::uint64_t seed = 1;
    std::uint64_t budget = 1000000;
    std::size_t replications = 1;
    int workers = 1;
    std::size_t posteval_episodes = 5;
    bool posteval_stochastic = false;
    Selection selection = Selection::best_per_replication;

    EsConfig es;
    std::vector<std::size_t> es_hidden{64};
    ActionMode action_mode;

    PpoConfig ppo;
    RlCommonConfig rl;

    void validate() const;
};

class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Applies `key = value` lines. Blank lines and `#` comments are skipped;
/// unknown keys and malformed values throw ConfigError naming the line.
void apply_config(TrainSettings& s, std::string_view text, const std::string& source = "<config>");
void apply_config_file(TrainSettings& s, const std::string& path);
/// Sets one key; throws ConfigError for unknown keys.
void set_config_value(TrainSettings& s, const std::string& key, const std::string& value);
/// Every key with its current value, in a form apply_config accepts.
std::string dump_config(const TrainSettings& s);
std::vector<std::string> config_keys();

} // namespace evorl
