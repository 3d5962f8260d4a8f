#include "evorl/harness/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace evorl {

namespace {

constexpr std::size_t exact_limit = 12;
constexpr std::size_t exact_hard_limit = 20;

double u_from_rank_sum(double rank_sum, std::size_t na)
{
    return rank_sum - static_cast<double>(na) * static_cast<double>(na + 1) / 2.0;
}

double normal_cdf(double z)
{
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double exact_p(const std::vector<double>& ranks, std::size_t na, double u_obs, Alternative alt)
{
    const std::size_t n = ranks.size();
    const double mu = static_cast<double>(na) * static_cast<double>(n - na) / 2.0;
    const double dev_obs = std::abs(u_obs - mu);
    const double eps = 1e-9;
    std::uint64_t hits = 0, total = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) != na)
            continue;
        double rs = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i))
                rs += ranks[i];
        const double u = u_from_rank_sum(rs, na);
        ++total;
        bool extreme = false;
        switch (alt) {
        case Alternative::two_sided: extreme = std::abs(u - mu) >= dev_obs - eps; break;
        case Alternative::less: extreme = u <= u_obs + eps; break;
        case Alternative::greater: extreme = u >= u_obs - eps; break;
        }
        hits += extreme ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(total);
}

double normal_p(const std::vector<double>& ranks, std::size_t na, double u_obs, Alternative alt)
{
    const double n = static_cast<double>(ranks.size());
    const double a = static_cast<double>(na);
    const double b = n - a;
    std::vector<double> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i])
            ++j;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    const double mu = a * b / 2.0;
    const double var = n > 1.0 ? a * b / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0))) : 0.0;
    if (var <= 0.0)
        return 1.0;
    const double sd = std::sqrt(var);
    switch (alt) {
    case Alternative::two_sided: {
        const double z = std::max(0.0, std::abs(u_obs - mu) - 0.5) / sd;
        return std::min(1.0, 2.0 * (1.0 - normal_cdf(z)));
    }
    case Alternative::less: return normal_cdf((u_obs - mu + 0.5) / sd);
    case Alternative::greater: return 1.0 - normal_cdf((u_obs - mu - 0.5) / sd);
    }
    return 1.0;
}

} // namespace

std::vector<double> midranks(std::span<const double> values)
{
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && values[order[j]] == values[order[i]])
            ++j;
        const double r = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k)
            ranks[order[k]] = r;
        i = j;
    }
    return ranks;
}

WilcoxonResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b, Alternative alt,
                                 WilcoxonMethod method)
{
    if (a.empty() || b.empty())
        throw std::invalid_argument("wilcoxon_rank_sum: both samples must be nonempty");
    for (double v : a)
        if (std::isnan(v))
            throw std::invalid_argument("wilcoxon_rank_sum: NaN in sample a");
    for (double v : b)
        if (std::isnan(v))
            throw std::invalid_argument("wilcoxon_rank_sum: NaN in sample b");
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const std::vector<double> ranks = midranks(pooled);
    const double rank_sum = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(a.size()), 0.0);

    WilcoxonResult r;
    r.u = u_from_rank_sum(rank_sum, a.size());
    const std::size_t n = pooled.size();
    r.exact = method == WilcoxonMethod::exact || (method == WilcoxonMethod::automatic && n <= exact_limit);
    if (r.exact && n > exact_hard_limit)
        throw std::invalid_argument("wilcoxon_rank_sum: exact enumeration limited to 20 observations");
    r.p = r.exact ? exact_p(ranks, a.size(), r.u, alt) : normal_p(ranks, a.size(), r.u, alt);
    return r;
}

double mean(std::span<const double> values)
{
    if (values.empty())
        throw std::invalid_argument("mean: empty sample");
    // Offsetting by the first element keeps constant samples exact.
    const double base = values[0];
    double s = 0.0;
    for (double v : values)
        s += v - base;
    return base + s / static_cast<double>(values.size());
}

double quantile(std::vector<double> values, double q)
{
    if (values.empty())
        throw std::invalid_argument("quantile: empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return frac == 0.0 ? values[lo] : values[lo] + frac * (values[hi] - values[lo]);
}

double median(std::span<const double> values)
{
    return quantile(std::vector<double>(values.begin(), values.end()), 0.5);
}

std::pair<double, double> bootstrap_ci(std::span<const double> samples, double level, std::size_t resamples, Rng& rng)
{
    if (samples.empty())
        throw std::invalid_argument("bootstrap_ci: empty sample");
    if (!(level > 0.0 && level < 1.0) || resamples == 0)
        throw std::invalid_argument("bootstrap_ci: level must lie in (0, 1) and resamples >= 1");
    std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
    std::vector<double> means(resamples);
    std::vector<double> draw(samples.size());
    for (double& m : means) {
        for (double& d : draw)
            d = samples[pick(rng)];
        m = mean(draw);
    }
    const double tail = (1.0 - level) / 2.0;
    return {quantile(means, tail), quantile(means, 1.0 - tail)};
}

BoxStats box_stats(std::span<const double> samples)
{
    if (samples.empty())
        throw std::invalid_argument("box_stats: empty sample");
    std::vector<double> v(samples.begin(), samples.end());
    std::sort(v.begin(), v.end());
    BoxStats s;
    s.n = v.size();
    s.min = v.front();
    s.max = v.back();
    s.q1 = quantile(v, 0.25);
    s.median = quantile(v, 0.5);
    s.q3 = quantile(v, 0.75);
    s.mean = mean(v);
    const double lo_fence = s.q1 - 1.5 * s.iqr();
    const double hi_fence = s.q3 + 1.5 * s.iqr();
    s.whisker_low = *std::find_if(v.begin(), v.end(), [&](double x) { return x >= lo_fence; });
    s.whisker_high = *std::find_if(v.rbegin(), v.rend(), [&](double x) { return x <= hi_fence; });
    for (double x : v)
        if (x < lo_fence || x > hi_fence)
            s.outliers.push_back(x);
    return s;
}

Comparison compare(std::span<const double> a, std::span<const double> b, std::string metric, std::string label_a,
                   std::string label_b)
{
    Comparison c;
    c.metric = std::move(metric);
    c.label_a = std::move(label_a);
    c.label_b = std::move(label_b);
    c.a = box_stats(a);
    c.b = box_stats(b);
    c.test = wilcoxon_rank_sum(a, b);
    return c;
}

std::string format_table(const Comparison& c)
{
    std::string out = fmt::format("metric: {}  (quartiles by linear interpolation, whiskers at 1.5 IQR)\n", c.metric);
    out += fmt::format("{:<12}{:>5}{:>12}{:>12}{:>12}{:>12}{:>12}{:>12}{:>12}\n", "set", "n", "w_low", "q1", "median",
                       "q3", "w_high", "mean", "outliers");
    for (const auto& [label, s] : {std::pair{c.label_a, c.a}, std::pair{c.label_b, c.b}})
        out += fmt::format("{:<12}{:>5}{:>12.4g}{:>12.4g}{:>12.4g}{:>12.4g}{:>12.4g}{:>12.4g}{:>12}\n", label, s.n,
                           s.whisker_low, s.q1, s.median, s.q3, s.whisker_high, s.mean, s.outliers.size());
    out += fmt::format("wilcoxon rank-sum ({}): U = {}, p = {:.6g}\n", c.test.exact ? "exact" : "normal approx.",
                       c.test.u, c.test.p);
    return out;
}

std::string format_summary(const Comparison& c)
{
    std::ostringstream out;
    out << "metric = " << c.metric << '\n' << "quartile_rule = linear_interpolation\n";
    const std::pair<const char*, const BoxStats*> sets[] = {{"a", &c.a}, {"b", &c.b}};
    for (const auto& [k, s] : sets) {
        out << fmt::format("{}.label = {}\n", k, s == &c.a ? c.label_a : c.label_b);
        out << fmt::format("{0}.n = {1}\n{0}.min = {2:.17g}\n{0}.q1 = {3:.17g}\n{0}.median = {4:.17g}\n"
                           "{0}.q3 = {5:.17g}\n{0}.max = {6:.17g}\n{0}.mean = {7:.17g}\n"
                           "{0}.whisker_low = {8:.17g}\n{0}.whisker_high = {9:.17g}\n",
                           k, s->n, s->min, s->q1, s->median, s->q3, s->max, s->mean, s->whisker_low, s->whisker_high);
    }
    out << fmt::format("u = {:.17g}\np = {:.17g}\nexact = {}\n", c.test.u, c.test.p, c.test.exact);
    return out.str();
}

} // namespace evorl
