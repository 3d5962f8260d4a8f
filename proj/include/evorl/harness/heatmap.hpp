#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace evorl {

struct GridSpec
{
    std::size_t nx = 20;
    std::size_t ny = 1;
    double x_min = 0.0, x_max = 1.0;
    double y_min = 0.0, y_max = 1.0;
};

/// Normalized occupancy of a grid, row-major (y outer, x inner).
struct Heatmap
{
    GridSpec grid;
    std::vector<double> occupancy; // sums to 1 when samples > 0
    std::size_t samples = 0;
    double entropy = 0.0; // -sum p ln p over occupied cells

    double at(std::size_t ix, std::size_t iy) const { return occupancy[iy * grid.nx + ix]; }
};

/// Bins every (x, y) position; points outside the grid land in the nearest
/// edge cell.
Heatmap position_heatmap(std::span<const std::pair<double, double>> positions, const GridSpec& grid);
Heatmap position_heatmap(std::span<const std::vector<std::pair<double, double>>> trajectories,
                         const GridSpec& grid);

double entropy(std::span<const double> probabilities);

} // namespace evorl
