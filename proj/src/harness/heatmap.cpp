#include "evorl/harness/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evorl {

namespace {

std::size_t bin(double v, double lo, double hi, std::size_t n)
{
    if (n == 1 || hi <= lo)
        return 0;
    const double f = (v - lo) / (hi - lo) * static_cast<double>(n);
    if (!(f > 0.0))
        return 0;
    return std::min(static_cast<std::size_t>(f), n - 1);
}

void finish(Heatmap& h, const std::vector<std::size_t>& counts)
{
    h.occupancy.assign(counts.size(), 0.0);
    if (h.samples == 0)
        return;
    for (std::size_t i = 0; i < counts.size(); ++i)
        h.occupancy[i] = static_cast<double>(counts[i]) / static_cast<double>(h.samples);
    h.entropy = entropy(h.occupancy);
}

} // namespace

double entropy(std::span<const double> probabilities)
{
    double e = 0.0;
    for (double p : probabilities)
        if (p > 0.0)
            e -= p * std::log(p);
    return std::max(0.0, e);
}

Heatmap position_heatmap(std::span<const std::pair<double, double>> positions, const GridSpec& grid)
{
    const std::vector<std::pair<double, double>> one(positions.begin(), positions.end());
    return position_heatmap(std::span(&one, 1), grid);
}

Heatmap position_heatmap(std::span<const std::vector<std::pair<double, double>>> trajectories, const GridSpec& grid)
{
    if (grid.nx == 0 || grid.ny == 0)
        throw std::invalid_argument("position_heatmap: grid needs at least one cell");
    Heatmap h;
    h.grid = grid;
    std::vector<std::size_t> counts(grid.nx * grid.ny, 0);
    for (const auto& traj : trajectories)
        for (const auto& [x, y] : traj) {
            ++counts[bin(y, grid.y_min, grid.y_max, grid.ny) * grid.nx + bin(x, grid.x_min, grid.x_max, grid.nx)];
            ++h.samples;
        }
    finish(h, counts);
    return h;
}

} // namespace evorl
