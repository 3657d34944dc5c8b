#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "sleepkit/common.hpp"

namespace sleepkit::nn {

template <typename Real>
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<Real> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
        data.assign(numel_of(shape), Real(0));
    }

    static std::size_t numel_of(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (auto d : s) n *= d;
        return n;
    }
    std::size_t numel() const { return data.size(); }
    std::size_t dim(std::size_t i) const { return shape.at(i); }

    // 2-D row-major access
    Real& at(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
    Real at(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }

    Real* row(std::size_t r) { return data.data() + r * shape[1]; }
    const Real* row(std::size_t r) const { return data.data() + r * shape[1]; }

    void fill(Real v) { std::fill(data.begin(), data.end(), v); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    std::string shape_str() const {
        std::string s = "[";
        for (std::size_t i = 0; i < shape.size(); ++i)
            s += (i ? "x" : "") + std::to_string(shape[i]);
        return s + "]";
    }
};

}  // namespace sleepkit::nn
