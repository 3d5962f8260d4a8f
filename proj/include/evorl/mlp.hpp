#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace evorl {

enum class Activation { identity, tanh };

/// Fully connected feedforward architecture. Hidden layers always use tanh;
/// the output layer is identity or tanh. With `log_std_head` the parameter
/// vector carries one state-independent log-sigma entry per output.
struct MlpSpec
{
    std::vector<std::size_t> layer_sizes;
    Activation output_activation = Activation::identity;
    bool log_std_head = false;

    void validate() const;
    std::size_t input_dim() const { return layer_sizes.front(); }
    std::size_t output_dim() const { return layer_sizes.back(); }
    std::size_t num_layers() const { return layer_sizes.size() - 1; }
    std::size_t weight_count() const;
    std::size_t param_count() const;
    /// Offset of the log-sigma block inside the parameter vector.
    std::size_t log_std_offset() const { return weight_count(); }

    bool operator==(const MlpSpec&) const = default;
};

struct ParamVector
{
    MlpSpec spec;
    std::vector<double> values;

    std::span<const double> view() const { return values; }
    std::span<double> view() { return values; }
};

struct Distribution
{
    std::vector<double> mean;
    std::vector<double> log_std; // empty without a log-sigma head
};

/// Fan-in scaled Gaussian weights, zero biases, log-sigma set to
/// `initial_log_std`. Deterministic in `seed`.
ParamVector init_mlp(const MlpSpec& spec, std::uint64_t seed, double initial_log_std = 0.0);

/// Scratch space for allocation-free forward passes. Not shareable between
/// threads; the parameters it reads are.
class MlpWorkspace
{
public:
    explicit MlpWorkspace(const MlpSpec& spec);
    std::span<const double> output() const { return {a_.data(), out_dim_}; }

private:
    friend std::span<const double> forward_into(const MlpSpec&, std::span<const double>,
                                                std::span<const double>, MlpWorkspace&);
    friend std::span<const double> forward_record(const MlpSpec&, std::span<const double>,
                                                  std::span<const double>, MlpWorkspace&, std::vector<double>&);
    std::vector<double> a_;
    std::vector<double> b_;
    std::size_t out_dim_;
};

/// Raw network output (means) written into the workspace.
std::span<const double> forward_into(const MlpSpec& spec, std::span<const double> params,
                                     std::span<const double> obs, MlpWorkspace& ws);

/// forward_into() that also appends every layer's post-activation values to
/// `trace`, in the layout GradBatch::activations expects.
std::span<const double> forward_record(const MlpSpec& spec, std::span<const double> params,
                                       std::span<const double> obs, MlpWorkspace& ws, std::vector<double>& trace);

Distribution forward(const MlpSpec& spec, std::span<const double> params, std::span<const double> obs);
Distribution forward(const ParamVector& params, std::span<const double> obs);

/// Upstream gradients for a batch of samples, all row-major.
struct GradBatch
{
    std::size_t count = 0;
    std::vector<double> inputs;           // count x input_dim
    std::vector<double> upstream;         // count x output_dim, d(loss)/d(output)
    std::vector<double> log_std_upstream; // count x output_dim, or empty
    // Optional forward_record() trace for every sample; backward() then skips
    // its own forward pass.
    std::vector<double> activations;
};

struct BackwardResult
{
    std::vector<double> param_grad;
    std::vector<double> input_grad; // count x input_dim
};

/// Gradient of sum(upstream . output) (+ sum(log_std_upstream . log_std))
/// with respect to the parameters.
std::vector<double> backward(const MlpSpec& spec, std::span<const double> params, const GradBatch& batch);
std::vector<double> backward(const ParamVector& params, const GradBatch& batch);

/// Same as backward() but also returns gradients with respect to the inputs.
BackwardResult backward_with_inputs(const MlpSpec& spec, std::span<const double> params, const GradBatch& batch);

/// Batched forward: count x output_dim outputs for count x input_dim inputs.
std::vector<double> forward_batch(const MlpSpec& spec, std::span<const double> params,
                                  std::span<const double> inputs, std::size_t count);

} // namespace evorl
