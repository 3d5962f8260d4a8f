#pragma once

#include "evorl/mlp.hpp"
#include "evorl/rng.hpp"

#include <span>
#include <string>
#include <vector>

namespace evorl {

/// How a policy's network output becomes an action.
struct ActionMode
{
    enum class Kind { deterministic, fixed_noise, parametric_gaussian };

    Kind kind = Kind::deterministic;
    double sigma = 0.01;        // fixed_noise std
    double initial_sigma = 1.0; // parametric_gaussian starting std

    static ActionMode deterministic() { return {}; }
    static ActionMode fixed_noise(double sigma_a);
    static ActionMode parametric_gaussian(double initial = 1.0);

    void validate() const;
    std::string to_string() const;
    static ActionMode parse(const std::string& text);
};

struct ActionBounds
{
    double low = -1.0;
    double high = 1.0;
};

/// Draws an action from `dist` under `mode` and clamps it into `bounds`.
std::vector<double> sample_action(const Distribution& dist, const ActionMode& mode, Rng& rng,
                                  ActionBounds bounds = {});

/// Unclamped diagonal Gaussian sample: mean + exp(log_std) * N(0, 1).
std::vector<double> sample_gaussian(std::span<const double> mean, std::span<const double> log_std, Rng& rng);

double gaussian_log_prob(std::span<const double> mean, std::span<const double> log_std,
                         std::span<const double> action);

/// Differential entropy of a diagonal Gaussian: sum(log_std) + d/2 * ln(2 pi e).
double gaussian_entropy(std::span<const double> log_std);

void clamp_action(std::span<double> action, ActionBounds bounds = {});

} // namespace evorl
