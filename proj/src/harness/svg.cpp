#include "evorl/harness/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace evorl {

namespace {

constexpr double width = 640, height = 400, margin = 50;
constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string open_svg(const std::string& title)
{
    return fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
                       "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n"
                       "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
                       "<text x=\"{2}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{3}</text>\n",
                       width, height, width / 2, title);
}

struct Scale
{
    double lo, hi, px_lo, px_hi;
    double operator()(double v) const
    {
        return hi > lo ? px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo) : (px_lo + px_hi) / 2;
    }
};

Scale padded(double lo, double hi, double px_lo, double px_hi)
{
    const double pad = hi > lo ? 0.05 * (hi - lo) : 1.0;
    return {lo - pad, hi + pad, px_lo, px_hi};
}

std::string y_axis(const Scale& y)
{
    std::string out = fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", margin,
                                  margin, height - margin);
    for (int k = 0; k <= 4; ++k) {
        const double v = y.lo + (y.hi - y.lo) * k / 4.0;
        out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3g}</text>\n", margin - 4, y(v) + 4, v);
    }
    return out;
}

} // namespace

std::string box_plot_svg(const Comparison& c)
{
    const BoxStats* sets[] = {&c.a, &c.b};
    const std::string labels[] = {c.label_a, c.label_b};
    double lo = std::min(c.a.min, c.b.min), hi = std::max(c.a.max, c.b.max);
    const Scale y = padded(lo, hi, height - margin, margin);
    std::string out = open_svg(fmt::format("{} (p = {:.4g})", c.metric, c.test.p));
    out += y_axis(y);
    for (int i = 0; i < 2; ++i) {
        const BoxStats& s = *sets[i];
        const double cx = margin + (width - 2 * margin) * (i + 0.5) / 2.0;
        const double bw = 60;
        const char* col = palette[i];
        out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", cx,
                           y(s.whisker_low), y(s.whisker_high));
        out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" fill-opacity=\"0.4\" "
                           "stroke=\"black\"/>\n",
                           cx - bw / 2, y(s.q3), bw, std::max(0.5, y(s.q1) - y(s.q3)), col);
        out += fmt::format("<line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"black\" stroke-width=\"2\"/>\n",
                           cx - bw / 2, cx + bw / 2, y(s.median));
        for (double w : {s.whisker_low, s.whisker_high})
            out += fmt::format("<line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"black\"/>\n", cx - bw / 4,
                               cx + bw / 4, y(w));
        for (double o : s.outliers)
            out += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"none\" stroke=\"black\"/>\n", cx, y(o));
        out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{} (n={})</text>\n", cx,
                           height - margin + 18, labels[i], s.n);
    }
    return out + "</svg>\n";
}

std::string curve_plot_svg(const std::vector<std::pair<std::string, std::vector<CurveRow>>>& curves,
                           const std::string& title)
{
    double x_hi = 1, y_lo = std::numeric_limits<double>::infinity(), y_hi = -y_lo;
    for (const auto& [label, rows] : curves)
        for (const CurveRow& r : rows) {
            x_hi = std::max(x_hi, static_cast<double>(r.eval_steps));
            if (std::isfinite(r.center_or_eval_return)) {
                y_lo = std::min(y_lo, r.center_or_eval_return);
                y_hi = std::max(y_hi, r.center_or_eval_return);
            }
        }
    if (!std::isfinite(y_lo))
        y_lo = y_hi = 0;
    const Scale x{0, x_hi, margin, width - margin};
    const Scale y = padded(y_lo, y_hi, height - margin, margin);
    std::string out = open_svg(title);
    out += y_axis(y);
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", margin,
                       height - margin, width - margin);
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3g} steps</text>\n", width - margin,
                       height - margin + 18, x_hi);
    for (std::size_t i = 0; i < curves.size(); ++i) {
        const char* col = palette[i % std::size(palette)];
        std::string pts;
        for (const CurveRow& r : curves[i].second)
            if (std::isfinite(r.center_or_eval_return))
                pts += fmt::format("{:.1f},{:.1f} ", x(static_cast<double>(r.eval_steps)), y(r.center_or_eval_return));
        out += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n", pts, col);
        out += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", width - margin - 120, margin + 14 * (i + 1),
                           col, curves[i].first);
    }
    return out + "</svg>\n";
}

std::string heatmap_svg(const Heatmap& h, const std::string& title)
{
    std::string out = open_svg(fmt::format("{} (entropy {:.4f})", title, h.entropy));
    const double cw = (width - 2 * margin) / static_cast<double>(h.grid.nx);
    const double ch = (height - 2 * margin) / static_cast<double>(h.grid.ny);
    const double peak = h.occupancy.empty() ? 0.0 : *std::max_element(h.occupancy.begin(), h.occupancy.end());
    for (std::size_t iy = 0; iy < h.grid.ny; ++iy)
        for (std::size_t ix = 0; ix < h.grid.nx; ++ix) {
            const double p = h.occupancy.empty() ? 0.0 : h.at(ix, iy);
            const double shade = peak > 0 ? p / peak : 0.0;
            // Row 0 (lowest y) is drawn at the bottom.
            out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"#b2182b\" "
                               "fill-opacity=\"{:.3f}\" stroke=\"#ddd\"/>\n",
                               margin + ix * cw, height - margin - (iy + 1) * ch, cw, ch, shade);
        }
    return out + "</svg>\n";
}

} // namespace evorl
