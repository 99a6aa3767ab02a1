#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "edrl/rng.hpp"

namespace edrl {

// Dense matrix, row-major.
struct Matrix2D {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    static Matrix2D zeros(std::size_t r, std::size_t c) { return {r, c, std::vector<double>(r * c, 0.0)}; }

    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

    bool operator==(const Matrix2D&) const = default;
};

enum class Activation { relu, tanh, identity };

struct MLPSpec {
    std::vector<std::size_t> layer_sizes; // input -> hidden... -> output
    Activation hidden_activation = Activation::relu;
    Activation output_activation = Activation::tanh;

    std::size_t layer_count() const { return layer_sizes.empty() ? 0 : layer_sizes.size() - 1; }
    std::size_t input_size() const { return layer_sizes.front(); }
    std::size_t output_size() const { return layer_sizes.back(); }
    std::size_t param_count() const;
    void validate() const; // throws std::invalid_argument

    bool operator==(const MLPSpec&) const = default;
};

struct MLPState {
    MLPSpec spec;
    std::vector<Matrix2D> weights;            // per layer, shape out x in
    std::vector<std::vector<double>> biases;  // per layer, length out

    bool operator==(const MLPState&) const = default;
};

enum class ParamKind { weight, bias };

struct LayoutEntry {
    std::size_t layer = 0;
    ParamKind kind = ParamKind::weight;
    std::size_t rows = 0;
    std::size_t cols = 0;  // 1 for bias
    std::size_t offset = 0;

    std::size_t count() const { return rows * cols; }
    bool operator==(const LayoutEntry&) const = default;
};

// Flattened network parameters. Order is fixed: layer-major, weights
// before bias within a layer, weights row-major.
struct FlatParams {
    std::vector<double> values;
    std::vector<LayoutEntry> layout;
};

struct AdamState {
    std::size_t step = 0;
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState for_size(std::size_t n) {
        AdamState s;
        s.first_moment.assign(n, 0.0);
        s.second_moment.assign(n, 0.0);
        return s;
    }
};

// Per-layer pre/post activations from a forward pass, enough to run backward.
struct ForwardCache {
    std::vector<double> input;
    std::vector<std::vector<double>> pre;   // z_l = W_l a_{l-1} + b_l
    std::vector<std::vector<double>> post;  // a_l = act(z_l)
};

struct BackwardResult {
    FlatParams param_grad;
    std::vector<double> input_grad;
};

// Uniform fan-in initialization per layer; if final_layer_limit is set the
// last layer is drawn uniform within that bound instead (small outputs at
// init, the usual choice for policy heads).
MLPState mlp_init(const MLPSpec& spec, std::uint64_t seed,
                  std::optional<double> final_layer_limit = std::nullopt);

std::vector<double> mlp_forward(const MLPState& state, std::span<const double> input,
                                ForwardCache* cache = nullptr);

BackwardResult mlp_backward(const MLPState& state, const ForwardCache& cache,
                            std::span<const double> output_grad);

// In-place Adam update (bias-corrected); increments opt.step.
void adam_step(FlatParams& params, const FlatParams& grads, AdamState& opt, double lr);

FlatParams flatten_params(const MLPState& state);
MLPState unflatten_params(const FlatParams& flat, const MLPSpec& spec);

// Layout metadata alone (no values), as produced by flatten_params.
std::vector<LayoutEntry> param_layout(const MLPSpec& spec);

} // namespace edrl
