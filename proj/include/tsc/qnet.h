#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tsc/rng.h"

namespace tsc {

// Fully connected network with ReLU between layers and a linear output.
// Parameters are one flat array: per layer, weights (out x in, row-major) then biases.
class Mlp {
public:
    Mlp() = default;
    explicit Mlp(std::vector<int> layer_sizes);

    // He-uniform weights, zero biases.
    void init_random(Rng& rng);
    void init_zero();

    const std::vector<int>& layer_sizes() const { return sizes_; }
    int input_size() const { return sizes_.front(); }
    int output_size() const { return sizes_.back(); }
    std::size_t param_count() const { return params_.size(); }
    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }

    // Per-layer activations kept for backprop; activations[0] is the input.
    struct Tape {
        std::vector<std::vector<double>> activations;
        std::vector<std::vector<double>> pre;
    };

    std::vector<double> forward(std::span<const double> input) const;
    std::vector<double> forward(std::span<const double> input, Tape& tape) const;

    // Adds d(loss)/d(params) into `grad` given d(loss)/d(output).
    void backward(const Tape& tape, std::span<const double> grad_output, std::span<double> grad) const;

    bool operator==(const Mlp&) const = default;

private:
    std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
    std::size_t bias_offset(std::size_t layer) const {
        return offsets_[layer] + static_cast<std::size_t>(sizes_[layer]) * sizes_[layer + 1];
    }

    std::vector<int> sizes_;
    std::vector<std::size_t> offsets_;
    std::vector<double> params_;
};

// Per-parameter adaptive step sizes (Adam).
class AdamOptimizer {
public:
    AdamOptimizer() = default;
    AdamOptimizer(std::size_t params, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                  double epsilon = 1e-8);

    void apply(std::span<double> params, std::span<const double> grad);
    std::uint64_t steps() const { return t_; }

private:
    double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    std::uint64_t t_ = 0;
    std::vector<double> m_, v_;
};

}  // namespace tsc
