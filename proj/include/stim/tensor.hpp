#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "stim/errors.hpp"

namespace stim {

// Dense row-major tensor of 64-bit floats. Most of the pipeline works with
// rank-2 shapes {rows, cols}; rank-1 vectors are treated as a single row.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;

    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor full(std::vector<std::size_t> shape, double value);
    static Tensor row(std::vector<double> values);

    std::size_t size() const { return data.size(); }
    std::size_t rows() const {
        if (shape.empty()) return 0;
        return shape.size() == 1 ? 1 : shape.front();
    }
    std::size_t cols() const { return shape.empty() ? 0 : shape.back(); }

    double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
    bool all_finite() const;
    void fill(double value);
};

// Numerically stable softmax along `axis` (0 or 1 for rank-2; rank-1 uses its
// only axis). Rows of the result sum to 1.
Tensor softmax(const Tensor& x, int axis = -1);

// Scales each slice along `axis` to unit L2 norm. Slices with norm below
// 1e-12 are returned unchanged (epsilon guard for zero vectors).
Tensor l2_normalize(const Tensor& x, int axis = -1);

inline constexpr double kL2NormEpsilon = 1e-12;

}  // namespace stim
