#include "evorl/harness/settings.hpp"

#include "evorl/envs/registry.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>

namespace evorl {

std::string to_string(Algo a)
{
    switch (a) {
    case Algo::es: return "es";
    case Algo::es_supersym: return "es-supersym";
    case Algo::ppo: return "ppo";
    case Algo::td3: return "td3";
    case Algo::sac: return "sac";
    }
    return "es";
}

Algo parse_algo(const std::string& s)
{
    for (Algo a : {Algo::es, Algo::es_supersym, Algo::ppo, Algo::td3, Algo::sac})
        if (to_string(a) == s)
            return a;
    throw std::invalid_argument("unknown algorithm '" + s + "'");
}

bool is_es(Algo a)
{
    return a == Algo::es || a == Algo::es_supersym;
}

void TrainSettings::validate() const
{
    const auto names = env_names();
    if (std::find(names.begin(), names.end(), env) == names.end())
        throw std::invalid_argument("unknown environment '" + env + "'");
    if (replications < 1)
        throw std::invalid_argument("replications must be >= 1");
    if (posteval_episodes < 1)
        throw std::invalid_argument("posteval_episodes must be >= 1");
    if (workers < 0)
        throw std::invalid_argument("workers must be >= 0");
    reward.validate();
    if (is_es(algo)) {
        es.validate();
        action_mode.validate();
    }
    if (algo == Algo::ppo)
        ppo.validate();
    if (algo == Algo::td3 || algo == Algo::sac)
        rl.validate();
}

namespace {

struct Field
{
    std::string key;
    std::function<void(TrainSettings&, const std::string&)> set;
    std::function<std::string(const TrainSettings&)> get;
};

template <class T>
T parse_number(const std::string& v)
{
    T out{};
    const char* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end)
        throw std::invalid_argument("expected a number, got '" + v + "'");
    return out;
}

bool parse_bool(const std::string& v)
{
    if (v == "true" || v == "on" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "off" || v == "0" || v == "no")
        return false;
    throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

std::vector<std::size_t> parse_sizes(const std::string& v)
{
    std::vector<std::size_t> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        out.push_back(parse_number<std::size_t>(item));
    }
    if (out.empty() || std::find(out.begin(), out.end(), 0u) != out.end())
        throw std::invalid_argument("expected a comma-separated list of positive sizes, got '" + v + "'");
    return out;
}

std::string join(const std::vector<std::size_t>& v)
{
    return fmt::format("{}", fmt::join(v, ","));
}

#define EVORL_NUM(name, member, type)                                                                      \
    Field                                                                                                 \
    {                                                                                                     \
        name, [](TrainSettings& s, const std::string& v) { s.member = parse_number<type>(v); },          \
            [](const TrainSettings& s) { return fmt::format("{}", s.member); }                           \
    }
#define EVORL_BOOL(name, member)                                                                           \
    Field                                                                                                 \
    {                                                                                                     \
        name, [](TrainSettings& s, const std::string& v) { s.member = parse_bool(v); },                   \
            [](const TrainSettings& s) { return std::string(s.member ? "true" : "false"); }              \
    }
#define EVORL_SIZES(name, member)                                                                          \
    Field                                                                                                 \
    {                                                                                                     \
        name, [](TrainSettings& s, const std::string& v) { s.member = parse_sizes(v); },                  \
            [](const TrainSettings& s) { return join(s.member); }                                         \
    }

const std::vector<Field>& fields()
{
    static const std::vector<Field> table = {
        {"algo", [](TrainSettings& s, const std::string& v) { s.algo = parse_algo(v); },
         [](const TrainSettings& s) { return to_string(s.algo); }},
        {"env", [](TrainSettings& s, const std::string& v) { s.env = v; },
         [](const TrainSettings& s) { return s.env; }},
        {"incentive", [](TrainSettings& s, const std::string& v) { s.reward.incentive_enabled = parse_bool(v); },
         [](const TrainSettings& s) { return std::string(s.reward.incentive_enabled ? "on" : "off"); }},
        EVORL_NUM("incentive_per_step", reward.incentive_per_step, double),
        EVORL_NUM("progress_weight", reward.progress_weight, double),
        EVORL_NUM("seed", seed, std::uint64_t),
        EVORL_NUM("budget", budget, std::uint64_t),
        EVORL_NUM("replications", replications, std::size_t),
        EVORL_NUM("workers", workers, int),
        EVORL_NUM("posteval_episodes", posteval_episodes, std::size_t),
        EVORL_BOOL("posteval_stochastic", posteval_stochastic),
        {"selection",
         [](TrainSettings& s, const std::string& v) {
             if (v == "best_per_replication")
                 s.selection = Selection::best_per_replication;
             else if (v == "global_top")
                 s.selection = Selection::global_top;
             else
                 throw std::invalid_argument("expected best_per_replication or global_top, got '" + v + "'");
         },
         [](const TrainSettings& s) {
             return std::string(s.selection == Selection::global_top ? "global_top" : "best_per_replication");
         }},

        EVORL_NUM("es.sigma", es.sigma, double),
        EVORL_NUM("es.step_size", es.step_size, double),
        EVORL_NUM("es.pop_pairs", es.pop_pairs, std::size_t),
        EVORL_NUM("es.episodes_per_eval", es.episodes_per_eval, std::size_t),
        EVORL_NUM("es.center_eval_episodes", es.center_eval_episodes, std::size_t),
        EVORL_NUM("es.weight_decay", es.weight_decay, double),
        EVORL_NUM("es.obs_sample_rate", es.obs_sample_rate, double),
        {"es.fitness_mode", [](TrainSettings& s, const std::string& v) { s.es.fitness_mode = parse_fitness_mode(v); },
         [](const TrainSettings& s) { return to_string(s.es.fitness_mode); }},
        EVORL_SIZES("es.hidden", es_hidden),
        {"es.action_mode", [](TrainSettings& s, const std::string& v) { s.action_mode = ActionMode::parse(v); },
         [](const TrainSettings& s) { return s.action_mode.to_string(); }},

        EVORL_NUM("ppo.clip", ppo.clip, double),
        EVORL_NUM("ppo.value_clip", ppo.value_clip, double),
        EVORL_NUM("ppo.entropy_coef", ppo.entropy_coef, double),
        EVORL_NUM("ppo.rollout_steps", ppo.rollout_steps, std::size_t),
        EVORL_NUM("ppo.minibatch", ppo.minibatch, std::size_t),
        EVORL_NUM("ppo.epochs", ppo.epochs, std::size_t),
        EVORL_NUM("ppo.gamma", ppo.gamma, double),
        EVORL_NUM("ppo.lambda", ppo.lambda, double),
        {"ppo.lr_schedule",
         [](TrainSettings& s, const std::string& v) {
             if (v == "constant")
                 s.ppo.lr.kind = LrSchedule::Kind::constant;
             else if (v == "linear")
                 s.ppo.lr.kind = LrSchedule::Kind::linear;
             else
                 throw std::invalid_argument("expected constant or linear, got '" + v + "'");
         },
         [](const TrainSettings& s) {
             return std::string(s.ppo.lr.kind == LrSchedule::Kind::linear ? "linear" : "constant");
         }},
        EVORL_NUM("ppo.lr", ppo.lr.start, double),
        EVORL_NUM("ppo.lr_end", ppo.lr.end, double),
        EVORL_BOOL("ppo.normalize_advantages", ppo.normalize_advantages),
        EVORL_NUM("ppo.max_grad_norm", ppo.max_grad_norm, double),
        EVORL_SIZES("ppo.hidden", ppo.hidden),
        EVORL_NUM("ppo.initial_log_std", ppo.initial_log_std, double),
        EVORL_NUM("ppo.eval_episodes", ppo.eval_episodes, std::size_t),

        EVORL_NUM("rl.gamma", rl.gamma, double),
        EVORL_NUM("rl.tau", rl.tau, double),
        EVORL_NUM("rl.batch_size", rl.batch_size, std::size_t),
        EVORL_NUM("rl.target_noise", rl.target_noise, double),
        EVORL_NUM("rl.noise_clip", rl.noise_clip, double),
        EVORL_NUM("rl.policy_delay", rl.policy_delay, std::size_t),
        EVORL_NUM("rl.warmup_steps", rl.warmup_steps, std::size_t),
        EVORL_NUM("rl.buffer_capacity", rl.buffer_capacity, std::size_t),
        EVORL_NUM("rl.actor_lr", rl.actor_lr, double),
        EVORL_NUM("rl.critic_lr", rl.critic_lr, double),
        EVORL_SIZES("rl.hidden", rl.hidden),
        EVORL_NUM("rl.exploration_noise", rl.exploration_noise, double),
        EVORL_NUM("rl.alpha", rl.alpha, double),
        EVORL_NUM("rl.eval_interval", rl.eval_interval, std::size_t),
        EVORL_NUM("rl.eval_episodes", rl.eval_episodes, std::size_t),
    };
    return table;
}

#undef EVORL_NUM
#undef EVORL_BOOL
#undef EVORL_SIZES

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

} // namespace

void set_config_value(TrainSettings& s, const std::string& key, const std::string& value)
{
    for (const Field& f : fields())
        if (f.key == key) {
            f.set(s, value);
            return;
        }
    throw ConfigError("unknown configuration key '" + key + "'");
}

void apply_config(TrainSettings& s, std::string_view text, const std::string& source)
{
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(fmt::format("{}:{}: expected 'key = value'", source, line_no));
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        try {
            set_config_value(s, key, value);
        }
        catch (const std::exception& e) {
            throw ConfigError(fmt::format("{}:{}: {}", source, line_no, e.what()));
        }
    }
}

void apply_config_file(TrainSettings& s, const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    apply_config(s, buf.str(), path);
}

std::string dump_config(const TrainSettings& s)
{
    std::string out;
    for (const Field& f : fields())
        out += f.key + " = " + f.get(s) + "\n";
    return out;
}

std::vector<std::string> config_keys()
{
    std::vector<std::string> keys;
    for (const Field& f : fields())
        keys.push_back(f.key);
    return keys;
}

} // namespace evorl
