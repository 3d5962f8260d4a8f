#include "evorl/harness/checkpoint.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace evorl {

namespace {

constexpr const char* magic = "evorl-checkpoint";
constexpr int version = 1;

class Writer
{
public:
    Writer(std::ostream& out, const std::string& kind) : out_(out)
    {
        out_ << magic << ' ' << version << '\n';
        put("kind", kind);
    }
    void put(const std::string& key, const std::string& v) { out_ << key << ' ' << v << '\n'; }
    void put_u64(const std::string& key, std::uint64_t v) { put(key, std::to_string(v)); }
    void put_real(const std::string& key, double v) { put(key, fmt::format("{:a}", v)); }
    void put_reals(const std::string& key, std::span<const double> v)
    {
        out_ << key << ' ' << v.size();
        for (double x : v)
            out_ << ' ' << fmt::format("{:a}", x);
        out_ << '\n';
    }

private:
    std::ostream& out_;
};

double parse_real(const std::string& tok)
{
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size())
        throw CheckpointError("malformed real '" + tok + "'");
    return v;
}

class Reader
{
public:
    Reader(std::istream& in, const std::string& kind)
    {
        std::string m;
        int v = 0;
        if (!(in >> m >> v) || m != magic)
            throw CheckpointError("not a checkpoint file");
        if (v != version)
            throw CheckpointError(fmt::format("unsupported checkpoint version {}", v));
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            if (line.empty())
                continue;
            const auto sp = line.find(' ');
            fields_[line.substr(0, sp)] = sp == std::string::npos ? "" : line.substr(sp + 1);
        }
        if (get("kind") != kind)
            throw CheckpointError("expected a '" + kind + "' checkpoint, found '" + get("kind") + "'");
    }
    bool has(const std::string& key) const { return fields_.count(key) != 0; }
    const std::string& get(const std::string& key) const
    {
        auto it = fields_.find(key);
        if (it == fields_.end())
            throw CheckpointError("checkpoint lacks '" + key + "'");
        return it->second;
    }
    std::uint64_t get_u64(const std::string& key) const
    {
        try {
            return std::stoull(get(key));
        }
        catch (const std::logic_error&) {
            throw CheckpointError("malformed integer for '" + key + "'");
        }
    }
    double get_real(const std::string& key) const { return parse_real(get(key)); }
    std::vector<double> get_reals(const std::string& key) const
    {
        std::istringstream ss(get(key));
        std::size_t n = 0;
        if (!(ss >> n))
            throw CheckpointError("malformed array '" + key + "'");
        std::vector<double> v(n);
        std::string tok;
        for (double& x : v) {
            if (!(ss >> tok))
                throw CheckpointError("truncated array '" + key + "'");
            x = parse_real(tok);
        }
        return v;
    }

private:
    std::map<std::string, std::string> fields_;
};

void put_spec(Writer& w, const std::string& p, const MlpSpec& spec)
{
    w.put(p + "layers", fmt::format("{}", fmt::join(spec.layer_sizes, " ")));
    w.put(p + "output_activation", spec.output_activation == Activation::tanh ? "tanh" : "identity");
    w.put(p + "log_std_head", spec.log_std_head ? "1" : "0");
}

MlpSpec get_spec(const Reader& r, const std::string& p)
{
    MlpSpec spec;
    std::istringstream ss(r.get(p + "layers"));
    std::size_t n = 0;
    while (ss >> n)
        spec.layer_sizes.push_back(n);
    const std::string act = r.get(p + "output_activation");
    if (act != "tanh" && act != "identity")
        throw CheckpointError("unknown output activation '" + act + "'");
    spec.output_activation = act == "tanh" ? Activation::tanh : Activation::identity;
    spec.log_std_head = r.get(p + "log_std_head") == "1";
    try {
        spec.validate();
    }
    catch (const std::exception& e) {
        throw CheckpointError(std::string("invalid network: ") + e.what());
    }
    return spec;
}

void put_params(Writer& w, const std::string& p, const ParamVector& v)
{
    put_spec(w, p, v.spec);
    w.put_reals(p + "params", v.values);
}

ParamVector get_params(const Reader& r, const std::string& p)
{
    ParamVector v;
    v.spec = get_spec(r, p);
    v.values = r.get_reals(p + "params");
    if (v.values.size() != v.spec.param_count())
        throw CheckpointError("parameter count does not match the network shape");
    return v;
}

void put_normalizer(Writer& w, const std::string& p, const ObsNormalizer& n)
{
    w.put_u64(p + "normalizer_count", n.count);
    w.put_real(p + "normalizer_clip", n.clip);
    w.put_reals(p + "normalizer_mean", n.mean);
    w.put_reals(p + "normalizer_var", n.var);
}

ObsNormalizer get_normalizer(const Reader& r, const std::string& p)
{
    ObsNormalizer n;
    n.count = r.get_u64(p + "normalizer_count");
    n.clip = r.get_real(p + "normalizer_clip");
    n.mean = r.get_reals(p + "normalizer_mean");
    n.var = r.get_reals(p + "normalizer_var");
    if (n.mean.size() != n.var.size())
        throw CheckpointError("normalizer mean/var size mismatch");
    return n;
}

void put_adam(Writer& w, const std::string& p, const Adam& a)
{
    w.put_real(p + "adam_beta1", a.hp.beta1);
    w.put_real(p + "adam_beta2", a.hp.beta2);
    w.put_real(p + "adam_epsilon", a.hp.epsilon);
    w.put_u64(p + "adam_t", a.t);
    w.put_reals(p + "adam_m", a.m);
    w.put_reals(p + "adam_v", a.v);
}

Adam get_adam(const Reader& r, const std::string& p)
{
    Adam a;
    a.hp.beta1 = r.get_real(p + "adam_beta1");
    a.hp.beta2 = r.get_real(p + "adam_beta2");
    a.hp.epsilon = r.get_real(p + "adam_epsilon");
    a.t = r.get_u64(p + "adam_t");
    a.m = r.get_reals(p + "adam_m");
    a.v = r.get_reals(p + "adam_v");
    if (a.m.size() != a.v.size())
        throw CheckpointError("Adam moment size mismatch");
    return a;
}

template <class F>
void save_file(const std::string& path, F&& write)
{
    std::ofstream out(path);
    if (!out)
        throw CheckpointError("cannot write '" + path + "'");
    write(out);
    if (!out)
        throw CheckpointError("write to '" + path + "' failed");
}

std::ifstream open_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw CheckpointError("cannot open '" + path + "'");
    return in;
}

} // namespace

void write_checkpoint(std::ostream& out, const PolicyCheckpoint& c)
{
    Writer w(out, "policy");
    w.put("algo", c.algo);
    w.put("env", c.env);
    w.put("incentive", c.reward.incentive_enabled ? "on" : "off");
    w.put_real("incentive_per_step", c.reward.incentive_per_step);
    w.put_real("progress_weight", c.reward.progress_weight);
    w.put_u64("seed", c.seed);
    w.put_real("score", c.score);
    w.put("head", c.policy.head == PolicyHead::squashed_gaussian ? "squashed_gaussian" : "mean");
    w.put("mode", c.policy.mode.to_string());
    w.put_real("mode_sigma", c.policy.mode.sigma);
    w.put_real("mode_initial_sigma", c.policy.mode.initial_sigma);
    put_params(w, "", ParamVector{c.policy.spec, c.policy.params});
    put_normalizer(w, "", c.policy.normalizer);
}

PolicyCheckpoint read_checkpoint(std::istream& in)
{
    Reader r(in, "policy");
    PolicyCheckpoint c;
    c.algo = r.get("algo");
    c.env = r.get("env");
    c.reward.incentive_enabled = r.get("incentive") == "on";
    c.reward.incentive_per_step = r.get_real("incentive_per_step");
    c.reward.progress_weight = r.get_real("progress_weight");
    c.seed = r.get_u64("seed");
    c.score = r.get_real("score");
    c.policy.head = r.get("head") == "squashed_gaussian" ? PolicyHead::squashed_gaussian : PolicyHead::mean;
    try {
        c.policy.mode = ActionMode::parse(r.get("mode"));
    }
    catch (const std::exception& e) {
        throw CheckpointError(e.what());
    }
    c.policy.mode.sigma = r.get_real("mode_sigma");
    c.policy.mode.initial_sigma = r.get_real("mode_initial_sigma");
    ParamVector pv = get_params(r, "");
    c.policy.spec = pv.spec;
    c.policy.params = std::move(pv.values);
    c.policy.normalizer = get_normalizer(r, "");
    if (c.policy.normalizer.dim() != 0 && c.policy.normalizer.dim() != c.policy.spec.input_dim())
        throw CheckpointError("normalizer dimension does not match the network input");
    return c;
}

void save_checkpoint(const std::string& path, const PolicyCheckpoint& c)
{
    save_file(path, [&](std::ostream& out) { write_checkpoint(out, c); });
}

PolicyCheckpoint load_checkpoint(const std::string& path)
{
    auto in = open_file(path);
    return read_checkpoint(in);
}

void write_es_state(std::ostream& out, const EsState& s)
{
    Writer w(out, "es_state");
    w.put_u64("master_seed", s.master_seed);
    w.put_u64("generation", s.generation);
    w.put_u64("eval_steps", s.eval_steps);
    w.put_u64("evaluations", s.evaluations);
    w.put_reals("center", s.center);
    put_adam(w, "", s.adam);
    put_normalizer(w, "", s.normalizer);
}

EsState read_es_state(std::istream& in)
{
    Reader r(in, "es_state");
    EsState s;
    s.master_seed = r.get_u64("master_seed");
    s.generation = r.get_u64("generation");
    s.eval_steps = r.get_u64("eval_steps");
    s.evaluations = r.get_u64("evaluations");
    s.center = r.get_reals("center");
    s.adam = get_adam(r, "");
    if (s.adam.m.size() != s.center.size())
        throw CheckpointError("Adam moments do not match the center");
    s.normalizer = get_normalizer(r, "");
    return s;
}

void save_es_state(const std::string& path, const EsState& s)
{
    save_file(path, [&](std::ostream& out) { write_es_state(out, s); });
}

EsState load_es_state(const std::string& path)
{
    auto in = open_file(path);
    return read_es_state(in);
}

void write_ppo_state(std::ostream& out, const PpoState& s)
{
    Writer w(out, "ppo_state");
    w.put_u64("steps", s.steps);
    w.put_u64("updates", s.updates);
    put_params(w, "actor_", s.actor);
    put_adam(w, "actor_", s.actor_opt);
    put_params(w, "critic_", s.critic);
    put_adam(w, "critic_", s.critic_opt);
    put_normalizer(w, "", s.normalizer);
}

PpoState read_ppo_state(std::istream& in)
{
    Reader r(in, "ppo_state");
    PpoState s;
    s.steps = r.get_u64("steps");
    s.updates = r.get_u64("updates");
    s.actor = get_params(r, "actor_");
    s.actor_opt = get_adam(r, "actor_");
    s.critic = get_params(r, "critic_");
    s.critic_opt = get_adam(r, "critic_");
    s.normalizer = get_normalizer(r, "");
    if (s.actor_opt.m.size() != s.actor.values.size() || s.critic_opt.m.size() != s.critic.values.size())
        throw CheckpointError("Adam moments do not match the networks");
    return s;
}

} // namespace evorl
