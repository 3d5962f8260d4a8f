#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace evorl {

struct AdamParams
{
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Bias-corrected Adam moments for one parameter vector.
struct Adam
{
    AdamParams hp;
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t t = 0;

    Adam() = default;
    explicit Adam(std::size_t n, AdamParams p = {}) : hp(p), m(n, 0.0), v(n, 0.0) {}

    /// Descent step: params -= lr * m_hat / (sqrt(v_hat) + eps).
    void descend(std::span<double> params, std::span<const double> grad, double lr) { apply(params, grad, -lr); }
    /// Ascent step: params += lr * m_hat / (sqrt(v_hat) + eps).
    void ascend(std::span<double> params, std::span<const double> grad, double lr) { apply(params, grad, lr); }

private:
    void apply(std::span<double> params, std::span<const double> grad, double signed_lr)
    {
        if (params.size() != m.size() || grad.size() != m.size())
            throw std::invalid_argument("Adam: size mismatch");
        ++t;
        const double c1 = 1.0 - std::pow(hp.beta1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(hp.beta2, static_cast<double>(t));
        for (std::size_t i = 0; i < m.size(); ++i) {
            m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * grad[i];
            v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * grad[i] * grad[i];
            params[i] += signed_lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + hp.epsilon);
        }
    }
};

/// Scales `grad` in place so that its L2 norm is at most `max_norm`.
inline double clip_grad_norm(std::span<double> grad, double max_norm)
{
    double sq = 0.0;
    for (double g : grad)
        sq += g * g;
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm)
        for (double& g : grad)
            g *= max_norm / norm;
    return norm;
}

} // namespace evorl
