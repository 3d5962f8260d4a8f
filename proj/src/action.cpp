#include "evorl/action.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace evorl {

ActionMode ActionMode::fixed_noise(double sigma_a)
{
    ActionMode m;
    m.kind = Kind::fixed_noise;
    m.sigma = sigma_a;
    m.validate();
    return m;
}

ActionMode ActionMode::parametric_gaussian(double initial)
{
    ActionMode m;
    m.kind = Kind::parametric_gaussian;
    m.initial_sigma = initial;
    m.validate();
    return m;
}

void ActionMode::validate() const
{
    if (kind == Kind::fixed_noise && !(sigma > 0.0))
        throw std::invalid_argument("fixed_noise action mode needs sigma > 0");
    if (kind == Kind::parametric_gaussian && !(initial_sigma > 0.0))
        throw std::invalid_argument("parametric_gaussian action mode needs initial sigma > 0");
}

std::string ActionMode::to_string() const
{
    switch (kind) {
    case Kind::deterministic:
        return "deterministic";
    case Kind::fixed_noise:
        return fmt::format("fixed_noise:{}", sigma);
    case Kind::parametric_gaussian:
        return fmt::format("parametric_gaussian:{}", initial_sigma);
    }
    return "deterministic";
}

ActionMode ActionMode::parse(const std::string& text)
{
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    const bool has_arg = colon != std::string::npos;
    if (head == "deterministic")
        return deterministic();
    if (head == "fixed_noise")
        return fixed_noise(has_arg ? std::stod(text.substr(colon + 1)) : 0.01);
    if (head == "parametric_gaussian")
        return parametric_gaussian(has_arg ? std::stod(text.substr(colon + 1)) : 1.0);
    throw std::invalid_argument("unknown action mode '" + text + "'");
}

void clamp_action(std::span<double> action, ActionBounds bounds)
{
    for (double& a : action)
        a = std::clamp(a, bounds.low, bounds.high);
}

std::vector<double> sample_gaussian(std::span<const double> mean, std::span<const double> log_std, Rng& rng)
{
    if (mean.size() != log_std.size())
        throw std::invalid_argument("sample_gaussian: mean/log_std size mismatch");
    std::vector<double> a(mean.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        a[i] = mean[i] + std::exp(log_std[i]) * standard_normal(rng);
    return a;
}

std::vector<double> sample_action(const Distribution& dist, const ActionMode& mode, Rng& rng, ActionBounds bounds)
{
    std::vector<double> a = dist.mean;
    switch (mode.kind) {
    case ActionMode::Kind::deterministic:
        break;
    case ActionMode::Kind::fixed_noise:
        for (double& v : a)
            v += mode.sigma * standard_normal(rng);
        break;
    case ActionMode::Kind::parametric_gaussian:
        if (dist.log_std.size() != a.size())
            throw std::invalid_argument("parametric_gaussian mode needs a log-sigma head");
        a = sample_gaussian(dist.mean, dist.log_std, rng);
        break;
    }
    clamp_action(a, bounds);
    return a;
}

double gaussian_log_prob(std::span<const double> mean, std::span<const double> log_std,
                         std::span<const double> action)
{
    constexpr double half_log_2pi = 0.91893853320467274178;
    double lp = 0.0;
    for (std::size_t i = 0; i < mean.size(); ++i) {
        const double z = (action[i] - mean[i]) * std::exp(-log_std[i]);
        lp += -0.5 * z * z - log_std[i] - half_log_2pi;
    }
    return lp;
}

double gaussian_entropy(std::span<const double> log_std)
{
    const double per_dim = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
    double h = 0.0;
    for (double ls : log_std)
        h += ls + per_dim;
    return h;
}

} // namespace evorl
