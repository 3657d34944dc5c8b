#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sleepkit/nn/layers.hpp"

namespace sleepkit::nn {

template <typename Real>
class Model {
public:
    std::string arch_id;
    std::vector<std::size_t> input_shape;

    Layer<Real>* add(std::unique_ptr<Layer<Real>> l) {
        layers_.push_back(std::move(l));
        return layers_.back().get();
    }

    Tensor<Real> forward(const Tensor<Real>& x, Mode mode = Mode::Infer,
                         std::uint64_t seed = 0) const {
        Rng rng(seed);
        Tensor<Real> h = x;
        for (auto& l : layers_) h = l->forward(h, mode, rng);
        return h;
    }

    // Forward pass that records the output shape of every layer.
    Tensor<Real> forward_traced(const Tensor<Real>& x,
                                std::vector<std::vector<std::size_t>>& shapes,
                                Mode mode = Mode::Infer, std::uint64_t seed = 0) const {
        Rng rng(seed);
        Tensor<Real> h = x;
        shapes.clear();
        for (auto& l : layers_) {
            h = l->forward(h, mode, rng);
            shapes.push_back(h.shape);
        }
        return h;
    }

    // Requires a preceding forward in Train mode. Accumulates weight grads
    // and returns dL/dinput.
    Tensor<Real> backward(const Tensor<Real>& d_out) const {
        Tensor<Real> g = d_out;
        for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g);
        return g;
    }

    std::vector<ParamRef<Real>> params() const {
        std::vector<ParamRef<Real>> out;
        for (auto& l : layers_) l->collect_params(out);
        return out;
    }

    std::map<std::string, Tensor<Real>> gradients() const {
        std::map<std::string, Tensor<Real>> out;
        for (auto& p : params())
            if (p.grad) out[p.name] = *p.grad;
        return out;
    }

    void zero_grads() const {
        for (auto& l : layers_) l->zero_grads();
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (auto& p : params()) n += p.value->numel();
        return n;
    }

    // Per-record demographic vector feeding every ConcatVec layer.
    void set_demographics(const std::vector<Real>& m) const {
        for (auto& l : layers_)
            if (auto* c = dynamic_cast<ConcatVec<Real>*>(l.get())) c->set_values(m);
    }

    std::size_t demographics_width() const {
        for (auto& l : layers_)
            if (auto* c = dynamic_cast<ConcatVec<Real>*>(l.get())) return c->width();
        return 0;
    }

    const std::vector<std::unique_ptr<Layer<Real>>>& layers() const { return layers_; }

private:
    std::vector<std::unique_ptr<Layer<Real>>> layers_;
};

}  // namespace sleepkit::nn
