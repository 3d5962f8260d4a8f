#pragma once

#include "evorl/harness/experiment.hpp"
#include "evorl/harness/heatmap.hpp"
#include "evorl/harness/stats.hpp"

#include <string>
#include <utility>
#include <vector>

namespace evorl {

// Self-contained SVG documents (inline styles, no external assets).

/// Side-by-side box plots of a comparison.
std::string box_plot_svg(const Comparison& c);

/// center_or_eval_return against eval_steps, one line per curve.
std::string curve_plot_svg(const std::vector<std::pair<std::string, std::vector<CurveRow>>>& curves,
                           const std::string& title);

/// Occupancy grid shaded by cell mass.
std::string heatmap_svg(const Heatmap& h, const std::string& title);

} // namespace evorl
