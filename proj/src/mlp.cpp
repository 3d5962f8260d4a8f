#include "evorl/mlp.hpp"

#include "evorl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace evorl {

void MlpSpec::validate() const
{
    if (layer_sizes.size() < 2)
        throw std::invalid_argument("MlpSpec: need at least an input and an output layer");
    for (std::size_t n : layer_sizes)
        if (n == 0)
            throw std::invalid_argument("MlpSpec: layer sizes must be positive");
}

std::size_t MlpSpec::weight_count() const
{
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
        total += (layer_sizes[l] + 1) * layer_sizes[l + 1];
    return total;
}

std::size_t MlpSpec::param_count() const
{
    return weight_count() + (log_std_head ? output_dim() : 0);
}

ParamVector init_mlp(const MlpSpec& spec, std::uint64_t seed, double initial_log_std)
{
    spec.validate();
    ParamVector p{spec, std::vector<double>(spec.param_count(), 0.0)};
    Rng rng = make_rng(derive_key({seed, 0x6d6c70ULL}));
    std::size_t off = 0;
    for (std::size_t l = 0; l < spec.num_layers(); ++l) {
        const std::size_t n_in = spec.layer_sizes[l];
        const std::size_t n_out = spec.layer_sizes[l + 1];
        const double scale = 1.0 / std::sqrt(static_cast<double>(n_in));
        for (std::size_t k = 0; k < n_in * n_out; ++k)
            p.values[off + k] = scale * standard_normal(rng);
        off += (n_in + 1) * n_out; // biases stay zero
    }
    if (spec.log_std_head)
        std::fill(p.values.begin() + static_cast<std::ptrdiff_t>(off), p.values.end(), initial_log_std);
    return p;
}

namespace {

void check_params(const MlpSpec& spec, std::span<const double> params)
{
    if (params.size() != spec.param_count())
        throw std::invalid_argument("parameter vector length " + std::to_string(params.size()) +
                                    " does not match architecture (" + std::to_string(spec.param_count()) + ")");
}

void check_obs(const MlpSpec& spec, std::size_t n)
{
    if (n != spec.input_dim())
        throw std::invalid_argument("observation dimension " + std::to_string(n) + " != network input " +
                                    std::to_string(spec.input_dim()));
}

std::size_t widest(const MlpSpec& spec)
{
    return *std::max_element(spec.layer_sizes.begin(), spec.layer_sizes.end());
}

// y = W x + b for one layer; W is row-major n_out x n_in, followed by b.
inline void affine(const double* layer, std::size_t n_in, std::size_t n_out, const double* x, double* y)
{
    const double* bias = layer + n_in * n_out;
    for (std::size_t o = 0; o < n_out; ++o) {
        const double* row = layer + o * n_in;
        double acc = bias[o];
        for (std::size_t i = 0; i < n_in; ++i)
            acc += row[i] * x[i];
        y[o] = acc;
    }
}

} // namespace

MlpWorkspace::MlpWorkspace(const MlpSpec& spec)
    : a_(widest(spec)), b_(widest(spec)), out_dim_(spec.output_dim())
{
}

std::span<const double> forward_into(const MlpSpec& spec, std::span<const double> params,
                                     std::span<const double> obs, MlpWorkspace& ws)
{
    check_params(spec, params);
    check_obs(spec, obs.size());
    std::copy(obs.begin(), obs.end(), ws.b_.begin());
    const double* layer = params.data();
    const std::size_t L = spec.num_layers();
    for (std::size_t l = 0; l < L; ++l) {
        const std::size_t n_in = spec.layer_sizes[l];
        const std::size_t n_out = spec.layer_sizes[l + 1];
        affine(layer, n_in, n_out, ws.b_.data(), ws.a_.data());
        const bool last = l + 1 == L;
        if (!last || spec.output_activation == Activation::tanh)
            for (std::size_t o = 0; o < n_out; ++o)
                ws.a_[o] = std::tanh(ws.a_[o]);
        if (!last)
            std::swap(ws.a_, ws.b_);
        layer += (n_in + 1) * n_out;
    }
    return ws.output();
}

std::span<const double> forward_record(const MlpSpec& spec, std::span<const double> params,
                                       std::span<const double> obs, MlpWorkspace& ws, std::vector<double>& trace)
{
    check_params(spec, params);
    check_obs(spec, obs.size());
    std::copy(obs.begin(), obs.end(), ws.b_.begin());
    const double* layer = params.data();
    const std::size_t L = spec.num_layers();
    for (std::size_t l = 0; l < L; ++l) {
        const std::size_t n_in = spec.layer_sizes[l];
        const std::size_t n_out = spec.layer_sizes[l + 1];
        affine(layer, n_in, n_out, ws.b_.data(), ws.a_.data());
        const bool last = l + 1 == L;
        if (!last || spec.output_activation == Activation::tanh)
            for (std::size_t o = 0; o < n_out; ++o)
                ws.a_[o] = std::tanh(ws.a_[o]);
        trace.insert(trace.end(), ws.a_.begin(), ws.a_.begin() + static_cast<std::ptrdiff_t>(n_out));
        if (!last)
            std::swap(ws.a_, ws.b_);
        layer += (n_in + 1) * n_out;
    }
    return ws.output();
}

Distribution forward(const MlpSpec& spec, std::span<const double> params, std::span<const double> obs)
{
    MlpWorkspace ws(spec);
    auto out = forward_into(spec, params, obs, ws);
    Distribution d;
    d.mean.assign(out.begin(), out.end());
    if (spec.log_std_head) {
        auto ls = params.subspan(spec.log_std_offset(), spec.output_dim());
        d.log_std.assign(ls.begin(), ls.end());
    }
    return d;
}

Distribution forward(const ParamVector& params, std::span<const double> obs)
{
    return forward(params.spec, params.values, obs);
}

std::vector<double> forward_batch(const MlpSpec& spec, std::span<const double> params,
                                  std::span<const double> inputs, std::size_t count)
{
    check_params(spec, params);
    if (inputs.size() != count * spec.input_dim())
        throw std::invalid_argument("forward_batch: input size mismatch");
    MlpWorkspace ws(spec);
    const std::size_t out_dim = spec.output_dim();
    std::vector<double> out(count * out_dim);
    for (std::size_t s = 0; s < count; ++s) {
        auto y = forward_into(spec, params, inputs.subspan(s * spec.input_dim(), spec.input_dim()), ws);
        std::copy(y.begin(), y.end(), out.begin() + static_cast<std::ptrdiff_t>(s * out_dim));
    }
    return out;
}

namespace {

BackwardResult backward_impl(const MlpSpec& spec, std::span<const double> params, const GradBatch& batch,
                             bool want_inputs)
{
    check_params(spec, params);
    const std::size_t in_dim = spec.input_dim();
    const std::size_t out_dim = spec.output_dim();
    if (batch.inputs.size() != batch.count * in_dim)
        throw std::invalid_argument("backward: inputs do not match batch count x input dimension");
    if (batch.upstream.size() != batch.count * out_dim)
        throw std::invalid_argument("backward: upstream gradients do not match batch count x output dimension");
    if (!batch.log_std_upstream.empty() &&
        (!spec.log_std_head || batch.log_std_upstream.size() != batch.count * out_dim))
        throw std::invalid_argument("backward: log-sigma upstream given without a matching log-sigma head");

    const std::size_t L = spec.num_layers();
    std::size_t trace_width = 0;
    for (std::size_t l = 1; l <= L; ++l)
        trace_width += spec.layer_sizes[l];
    const bool cached = !batch.activations.empty();
    if (cached && batch.activations.size() != batch.count * trace_width)
        throw std::invalid_argument("backward: activation trace does not match batch count x layer widths");

    std::vector<std::size_t> offsets(L);
    for (std::size_t l = 0, off = 0; l < L; ++l) {
        offsets[l] = off;
        off += (spec.layer_sizes[l] + 1) * spec.layer_sizes[l + 1];
    }

    BackwardResult res;
    res.param_grad.assign(spec.param_count(), 0.0);
    if (want_inputs)
        res.input_grad.assign(batch.count * in_dim, 0.0);

    // acts[l] holds the input to layer l (post-activation of layer l-1).
    std::vector<std::vector<double>> acts(L + 1);
    for (std::size_t l = 0; l <= L; ++l)
        acts[l].resize(spec.layer_sizes[l]);
    std::vector<double> delta(widest(spec));
    std::vector<double> delta_prev(widest(spec));

    for (std::size_t s = 0; s < batch.count; ++s) {
        if (!want_inputs) {
            // A sample with no upstream gradient contributes exactly nothing.
            bool silent = true;
            for (std::size_t o = 0; o < out_dim && silent; ++o)
                silent = batch.upstream[s * out_dim + o] == 0.0 &&
                         (batch.log_std_upstream.empty() || batch.log_std_upstream[s * out_dim + o] == 0.0);
            if (silent)
                continue;
        }
        std::copy_n(batch.inputs.begin() + static_cast<std::ptrdiff_t>(s * in_dim), in_dim, acts[0].begin());
        if (cached) {
            auto src = batch.activations.begin() + static_cast<std::ptrdiff_t>(s * trace_width);
            for (std::size_t l = 1; l <= L; ++l) {
                std::copy_n(src, spec.layer_sizes[l], acts[l].begin());
                src += static_cast<std::ptrdiff_t>(spec.layer_sizes[l]);
            }
        }
        else {
            for (std::size_t l = 0; l < L; ++l) {
                const std::size_t n_in = spec.layer_sizes[l];
                const std::size_t n_out = spec.layer_sizes[l + 1];
                affine(params.data() + offsets[l], n_in, n_out, acts[l].data(), acts[l + 1].data());
                if (l + 1 < L || spec.output_activation == Activation::tanh)
                    for (double& v : acts[l + 1])
                        v = std::tanh(v);
            }
        }

        // delta = d(loss)/d(pre-activation) of the current layer
        for (std::size_t o = 0; o < out_dim; ++o) {
            double g = batch.upstream[s * out_dim + o];
            if (spec.output_activation == Activation::tanh)
                g *= 1.0 - acts[L][o] * acts[L][o];
            delta[o] = g;
        }
        for (std::size_t l = L; l-- > 0;) {
            const std::size_t n_in = spec.layer_sizes[l];
            const std::size_t n_out = spec.layer_sizes[l + 1];
            const double* W = params.data() + offsets[l];
            double* gW = res.param_grad.data() + offsets[l];
            double* gb = gW + n_in * n_out;
            const std::vector<double>& x = acts[l];
            for (std::size_t o = 0; o < n_out; ++o) {
                const double d = delta[o];
                if (d == 0.0)
                    continue;
                double* grow = gW + o * n_in;
                for (std::size_t i = 0; i < n_in; ++i)
                    grow[i] += d * x[i];
                gb[o] += d;
            }
            if (l == 0 && !want_inputs)
                break;
            std::fill_n(delta_prev.begin(), n_in, 0.0);
            for (std::size_t o = 0; o < n_out; ++o) {
                const double d = delta[o];
                if (d == 0.0)
                    continue;
                const double* row = W + o * n_in;
                for (std::size_t i = 0; i < n_in; ++i)
                    delta_prev[i] += d * row[i];
            }
            if (l > 0)
                for (std::size_t i = 0; i < n_in; ++i)
                    delta_prev[i] *= 1.0 - x[i] * x[i];
            std::swap(delta, delta_prev);
        }
        if (want_inputs)
            std::copy_n(delta.begin(), in_dim, res.input_grad.begin() + static_cast<std::ptrdiff_t>(s * in_dim));

        if (!batch.log_std_upstream.empty())
            for (std::size_t o = 0; o < out_dim; ++o)
                res.param_grad[spec.log_std_offset() + o] += batch.log_std_upstream[s * out_dim + o];
    }
    return res;
}

} // namespace

BackwardResult backward_with_inputs(const MlpSpec& spec, std::span<const double> params, const GradBatch& batch)
{
    return backward_impl(spec, params, batch, true);
}

std::vector<double> backward(const MlpSpec& spec, std::span<const double> params, const GradBatch& batch)
{
    return backward_impl(spec, params, batch, false).param_grad;
}

std::vector<double> backward(const ParamVector& params, const GradBatch& batch)
{
    return backward(params.spec, params.values, batch);
}

} // namespace evorl
