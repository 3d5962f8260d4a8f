#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace evorl {

/// Running per-dimension observation statistics. Normalization with a zero
/// count is the identity; an empty (dimension 0) normalizer accepts any width.
struct ObsNormalizer
{
    std::uint64_t count = 0;
    std::vector<double> mean;
    std::vector<double> var; // population variance
    double clip = 5.0;

    ObsNormalizer() = default;
    explicit ObsNormalizer(std::size_t dim, double clip_value = 5.0)
        : mean(dim, 0.0), var(dim, 0.0), clip(clip_value)
    {
    }

    std::size_t dim() const { return mean.size(); }

    void normalize(std::span<const double> obs, std::span<double> out) const;
    std::vector<double> normalize(std::span<const double> obs) const;

    /// Merge a batch of `n` row-major observations (Chan et al. parallel update).
    void update(std::span<const double> batch, std::size_t n);
};

} // namespace evorl
