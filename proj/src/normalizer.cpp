#include "evorl/normalizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evorl {

void ObsNormalizer::normalize(std::span<const double> obs, std::span<double> out) const
{
    if (count == 0 && dim() == 0 && out.size() == obs.size()) {
        std::copy(obs.begin(), obs.end(), out.begin());
        return;
    }
    if (obs.size() != dim() || out.size() != dim())
        throw std::invalid_argument("ObsNormalizer: dimension mismatch");
    if (count == 0) {
        std::copy(obs.begin(), obs.end(), out.begin());
        return;
    }
    for (std::size_t i = 0; i < dim(); ++i)
        out[i] = std::clamp((obs[i] - mean[i]) / std::sqrt(var[i] + 1e-8), -clip, clip);
}

std::vector<double> ObsNormalizer::normalize(std::span<const double> obs) const
{
    std::vector<double> out(obs.size());
    normalize(obs, out);
    return out;
}

void ObsNormalizer::update(std::span<const double> batch, std::size_t n)
{
    if (n == 0)
        return;
    const std::size_t d = dim();
    if (batch.size() != n * d)
        throw std::invalid_argument("ObsNormalizer::update: batch size mismatch");

    // Two-pass batch moments, then pairwise merge with the running moments.
    std::vector<double> bmean(d, 0.0), bm2(d, 0.0);
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t i = 0; i < d; ++i)
            bmean[i] += batch[s * d + i];
    for (double& m : bmean)
        m /= static_cast<double>(n);
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t i = 0; i < d; ++i) {
            const double dv = batch[s * d + i] - bmean[i];
            bm2[i] += dv * dv;
        }

    const double na = static_cast<double>(count);
    const double nb = static_cast<double>(n);
    const double nt = na + nb;
    for (std::size_t i = 0; i < d; ++i) {
        const double delta = bmean[i] - mean[i];
        const double m2 = var[i] * na + bm2[i] + delta * delta * na * nb / nt;
        mean[i] += delta * nb / nt;
        var[i] = std::max(0.0, m2 / nt);
    }
    count += n;
}

} // namespace evorl
