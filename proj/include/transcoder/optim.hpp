#pragma once

// Named parameter storage plus the Adam optimizer (beta1=0.9, beta2=0.999,
// eps=1e-8, bias-corrected) and the linear learning-rate decay.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "transcoder/autodiff.hpp"

namespace transcoder {

template <typename T>
struct Param {
    std::string name;
    ad::Shape shape;
    std::vector<T> data;

    std::size_t size() const { return data.size(); }
};

template <typename T>
class ParamSet {
  public:
    std::size_t add(std::string name, ad::Shape shape, std::vector<T> data) {
        if (ad::numel(shape) != data.size())
            throw std::invalid_argument("param " + name + ": shape/value mismatch");
        params_.push_back(Param<T>{std::move(name), std::move(shape), std::move(data)});
        return params_.size() - 1;
    }

    std::size_t count() const { return params_.size(); }
    Param<T>& operator[](std::size_t i) { return params_[i]; }
    const Param<T>& operator[](std::size_t i) const { return params_[i]; }

    const Param<T>* find(const std::string& name) const {
        for (const auto& p : params_)
            if (p.name == name) return &p;
        return nullptr;
    }
    Param<T>* find(const std::string& name) {
        for (auto& p : params_)
            if (p.name == name) return &p;
        return nullptr;
    }

    std::size_t total_values() const {
        std::size_t n = 0;
        for (const auto& p : params_) n += p.size();
        return n;
    }

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

  private:
    std::vector<Param<T>> params_;
};

template <typename T>
struct AdamState {
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::uint64_t step = 0;
    std::vector<std::vector<T>> m, v;

    template <typename U>
    static AdamState for_params(const ParamSet<U>& params) {
        AdamState s;
        s.m.resize(params.count());
        s.v.resize(params.count());
        for (std::size_t i = 0; i < params.count(); ++i) {
            s.m[i].assign(params[i].size(), T(0));
            s.v[i].assign(params[i].size(), T(0));
        }
        return s;
    }
};

template <typename T>
void adam_step(ParamSet<T>& params, const std::vector<std::vector<T>>& grads, AdamState<T>& state,
               double lr) {
    if (grads.size() != params.count())
        throw std::invalid_argument("adam_step: gradient count mismatch");
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.count(); ++i) {
        auto& p = params[i].data;
        const auto& g = grads[i];
        if (g.size() != p.size())
            throw std::invalid_argument("adam_step: shape mismatch for " + params[i].name);
        auto& m = state.m[i];
        auto& v = state.v[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = static_cast<T>(state.beta1 * m[j] + (1.0 - state.beta1) * g[j]);
            v[j] = static_cast<T>(state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j]);
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            p[j] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + state.eps));
        }
    }
}

// base_lr * (1 - epoch/total), floored at zero
inline double lr_schedule(std::uint64_t epoch, std::uint64_t total, double base_lr) {
    if (total == 0) return base_lr;
    const double f = 1.0 - static_cast<double>(epoch) / static_cast<double>(total);
    return f > 0.0 ? base_lr * f : 0.0;
}

}  // namespace transcoder
