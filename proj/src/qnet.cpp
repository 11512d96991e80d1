#include "tsc/qnet.h"

#include <cmath>

#include "tsc/errors.h"

namespace tsc {

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) throw ArgumentError("network needs at least an input and an output layer");
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        if (sizes_[l] <= 0 || sizes_[l + 1] <= 0) throw ArgumentError("layer sizes must be positive");
        offsets_.push_back(total);
        total += static_cast<std::size_t>(sizes_[l]) * sizes_[l + 1] + sizes_[l + 1];
    }
    params_.assign(total, 0.0);
}

void Mlp::init_random(Rng& rng) {
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        const double bound = std::sqrt(6.0 / sizes_[l]);
        const std::size_t w = weight_offset(l);
        const std::size_t count = static_cast<std::size_t>(sizes_[l]) * sizes_[l + 1];
        for (std::size_t k = 0; k < count; ++k) params_[w + k] = (2.0 * rng.uniform() - 1.0) * bound;
        for (int k = 0; k < sizes_[l + 1]; ++k) params_[bias_offset(l) + k] = 0.0;
    }
}

void Mlp::init_zero() { std::fill(params_.begin(), params_.end(), 0.0); }

std::vector<double> Mlp::forward(std::span<const double> input) const {
    Tape tape;
    return forward(input, tape);
}

std::vector<double> Mlp::forward(std::span<const double> input, Tape& tape) const {
    if (static_cast<int>(input.size()) != sizes_.front())
        throw ArgumentError("input has " + std::to_string(input.size()) + " features, network expects " +
                            std::to_string(sizes_.front()));
    const std::size_t layers = sizes_.size() - 1;
    tape.activations.assign(1, std::vector<double>(input.begin(), input.end()));
    tape.pre.clear();
    for (std::size_t l = 0; l < layers; ++l) {
        const int in = sizes_[l];
        const int out = sizes_[l + 1];
        const double* w = &params_[weight_offset(l)];
        const double* b = &params_[bias_offset(l)];
        const auto& x = tape.activations.back();
        std::vector<double> z(out);
        for (int o = 0; o < out; ++o) {
            double acc = b[o];
            const double* row = w + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) acc += row[i] * x[i];
            z[o] = acc;
        }
        std::vector<double> a = z;
        if (l + 1 < layers) {
            for (auto& v : a) v = v > 0.0 ? v : 0.0;
        }
        tape.pre.push_back(std::move(z));
        tape.activations.push_back(std::move(a));
    }
    return tape.activations.back();
}

void Mlp::backward(const Tape& tape, std::span<const double> grad_output, std::span<double> grad) const {
    const std::size_t layers = sizes_.size() - 1;
    std::vector<double> delta(grad_output.begin(), grad_output.end());
    for (std::size_t l = layers; l-- > 0;) {
        const int in = sizes_[l];
        const int out = sizes_[l + 1];
        if (l + 1 < layers) {
            for (int o = 0; o < out; ++o) {
                if (!(tape.pre[l][o] > 0.0)) delta[o] = 0.0;
            }
        }
        const auto& x = tape.activations[l];
        double* gw = &grad[weight_offset(l)];
        double* gb = &grad[bias_offset(l)];
        for (int o = 0; o < out; ++o) {
            gb[o] += delta[o];
            double* row = gw + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) row[i] += delta[o] * x[i];
        }
        if (l == 0) break;
        const double* w = &params_[weight_offset(l)];
        std::vector<double> prev(in, 0.0);
        for (int o = 0; o < out; ++o) {
            const double* row = w + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) prev[i] += row[i] * delta[o];
        }
        delta = std::move(prev);
    }
}

AdamOptimizer::AdamOptimizer(std::size_t params, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon), m_(params, 0.0), v_(params, 0.0) {
    if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
}

void AdamOptimizer::apply(std::span<double> params, std::span<const double> grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * grad[k];
        v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * grad[k] * grad[k];
        params[k] -= lr_ * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + eps_);
    }
}

}  // namespace tsc
