#include "edrl/tensor_net.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace edrl {

namespace {

double activate(Activation act, double z) {
    switch (act) {
        case Activation::relu: return z > 0.0 ? z : 0.0;
        case Activation::tanh: return std::tanh(z);
        case Activation::identity: return z;
    }
    return z;
}

// Derivative from the cached pre/post activation pair.
double activate_grad(Activation act, double z, double a) {
    switch (act) {
        case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::tanh: return 1.0 - a * a;
        case Activation::identity: return 1.0;
    }
    return 1.0;
}

} // namespace

std::size_t MLPSpec::param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
        n += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
    return n;
}

void MLPSpec::validate() const {
    if (layer_sizes.size() < 2)
        throw std::invalid_argument("MLPSpec: need at least input and output layer");
    for (std::size_t s : layer_sizes)
        if (s == 0) throw std::invalid_argument("MLPSpec: zero-size layer");
}

MLPState mlp_init(const MLPSpec& spec, std::uint64_t seed, std::optional<double> final_layer_limit) {
    spec.validate();
    MLPState state;
    state.spec = spec;
    Rng rng = make_rng(seed, {0x6E65u}); // "ne"
    const std::size_t n_layers = spec.layer_count();
    state.weights.reserve(n_layers);
    state.biases.reserve(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        const std::size_t in = spec.layer_sizes[l];
        const std::size_t out = spec.layer_sizes[l + 1];
        double bound = 1.0 / std::sqrt(static_cast<double>(in));
        if (final_layer_limit && l + 1 == n_layers) bound = *final_layer_limit;
        std::uniform_real_distribution<double> dist(-bound, bound);
        Matrix2D w = Matrix2D::zeros(out, in);
        for (double& v : w.values) v = dist(rng);
        std::vector<double> b(out);
        for (double& v : b) v = dist(rng);
        state.weights.push_back(std::move(w));
        state.biases.push_back(std::move(b));
    }
    return state;
}

std::vector<double> mlp_forward(const MLPState& state, std::span<const double> input, ForwardCache* cache) {
    const MLPSpec& spec = state.spec;
    if (input.size() != spec.input_size())
        throw std::invalid_argument("mlp_forward: input length " + std::to_string(input.size()) +
                                    " != " + std::to_string(spec.input_size()));
    std::vector<double> a(input.begin(), input.end());
    if (cache) {
        cache->input = a;
        cache->pre.clear();
        cache->post.clear();
    }
    const std::size_t n_layers = spec.layer_count();
    for (std::size_t l = 0; l < n_layers; ++l) {
        const Matrix2D& w = state.weights[l];
        const std::vector<double>& b = state.biases[l];
        std::vector<double> z(w.rows);
        for (std::size_t i = 0; i < w.rows; ++i) {
            double acc = b[i];
            const double* row = &w.values[i * w.cols];
            for (std::size_t j = 0; j < w.cols; ++j) acc += row[j] * a[j];
            z[i] = acc;
        }
        const Activation act = (l + 1 == n_layers) ? spec.output_activation : spec.hidden_activation;
        std::vector<double> out(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) out[i] = activate(act, z[i]);
        if (cache) {
            cache->pre.push_back(z);
            cache->post.push_back(out);
        }
        a = std::move(out);
    }
    return a;
}

BackwardResult mlp_backward(const MLPState& state, const ForwardCache& cache,
                            std::span<const double> output_grad) {
    const MLPSpec& spec = state.spec;
    const std::size_t n_layers = spec.layer_count();
    if (cache.pre.size() != n_layers || cache.post.size() != n_layers ||
        cache.input.size() != spec.input_size())
        throw std::invalid_argument("mlp_backward: cache does not match network spec");
    for (std::size_t l = 0; l < n_layers; ++l)
        if (cache.pre[l].size() != spec.layer_sizes[l + 1])
            throw std::invalid_argument("mlp_backward: cache layer size mismatch");
    if (output_grad.size() != spec.output_size())
        throw std::invalid_argument("mlp_backward: output_grad length mismatch");

    BackwardResult res;
    res.param_grad.layout = param_layout(spec);
    res.param_grad.values.assign(spec.param_count(), 0.0);

    std::vector<double> delta(output_grad.begin(), output_grad.end());
    for (std::size_t l = n_layers; l-- > 0;) {
        const Activation act = (l + 1 == n_layers) ? spec.output_activation : spec.hidden_activation;
        const std::vector<double>& z = cache.pre[l];
        const std::vector<double>& post = cache.post[l];
        for (std::size_t i = 0; i < delta.size(); ++i)
            delta[i] *= activate_grad(act, z[i], post[i]);

        const std::vector<double>& a_prev = (l == 0) ? cache.input : cache.post[l - 1];
        const Matrix2D& w = state.weights[l];

        // grad entries for this layer: weight block then bias block
        const LayoutEntry& went = res.param_grad.layout[2 * l];
        const LayoutEntry& bent = res.param_grad.layout[2 * l + 1];
        double* gw = &res.param_grad.values[went.offset];
        double* gb = &res.param_grad.values[bent.offset];
        for (std::size_t i = 0; i < w.rows; ++i) {
            const double d = delta[i];
            double* grow = &gw[i * w.cols];
            for (std::size_t j = 0; j < w.cols; ++j) grow[j] = d * a_prev[j];
            gb[i] = d;
        }

        std::vector<double> prev(w.cols, 0.0);
        for (std::size_t i = 0; i < w.rows; ++i) {
            const double d = delta[i];
            const double* row = &w.values[i * w.cols];
            for (std::size_t j = 0; j < w.cols; ++j) prev[j] += row[j] * d;
        }
        delta = std::move(prev);
    }
    res.input_grad = std::move(delta);
    return res;
}

void adam_step(FlatParams& params, const FlatParams& grads, AdamState& opt, double lr) {
    const std::size_t n = params.values.size();
    if (grads.values.size() != n || opt.first_moment.size() != n || opt.second_moment.size() != n)
        throw std::invalid_argument("adam_step: length mismatch");
    opt.step += 1;
    const double b1 = opt.beta1, b2 = opt.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(opt.step));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(opt.step));
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grads.values[i];
        opt.first_moment[i] = b1 * opt.first_moment[i] + (1.0 - b1) * g;
        opt.second_moment[i] = b2 * opt.second_moment[i] + (1.0 - b2) * g * g;
        const double mhat = opt.first_moment[i] / bc1;
        const double vhat = opt.second_moment[i] / bc2;
        params.values[i] -= lr * mhat / (std::sqrt(vhat) + opt.epsilon);
    }
}

std::vector<LayoutEntry> param_layout(const MLPSpec& spec) {
    std::vector<LayoutEntry> layout;
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
        const std::size_t in = spec.layer_sizes[l];
        const std::size_t out = spec.layer_sizes[l + 1];
        layout.push_back({l, ParamKind::weight, out, in, offset});
        offset += out * in;
        layout.push_back({l, ParamKind::bias, out, 1, offset});
        offset += out;
    }
    return layout;
}

FlatParams flatten_params(const MLPState& state) {
    FlatParams flat;
    flat.layout = param_layout(state.spec);
    flat.values.reserve(state.spec.param_count());
    for (std::size_t l = 0; l < state.weights.size(); ++l) {
        flat.values.insert(flat.values.end(), state.weights[l].values.begin(), state.weights[l].values.end());
        flat.values.insert(flat.values.end(), state.biases[l].begin(), state.biases[l].end());
    }
    return flat;
}

MLPState unflatten_params(const FlatParams& flat, const MLPSpec& spec) {
    spec.validate();
    if (flat.values.size() != spec.param_count())
        throw std::invalid_argument("unflatten_params: value count does not match spec");
    MLPState state;
    state.spec = spec;
    std::size_t pos = 0;
    for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
        const std::size_t in = spec.layer_sizes[l];
        const std::size_t out = spec.layer_sizes[l + 1];
        Matrix2D w{out, in, std::vector<double>(flat.values.begin() + pos, flat.values.begin() + pos + out * in)};
        pos += out * in;
        std::vector<double> b(flat.values.begin() + pos, flat.values.begin() + pos + out);
        pos += out;
        state.weights.push_back(std::move(w));
        state.biases.push_back(std::move(b));
    }
    return state;
}

} // namespace edrl
