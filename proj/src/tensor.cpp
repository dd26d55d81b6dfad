#include "stim/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace stim {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
    std::size_t p = 1;
    for (std::size_t d : shape) p *= d;
    return p;
}

}  // namespace

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
    Tensor t;
    t.data.assign(product(shape), 0.0);
    t.shape = std::move(shape);
    return t;
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
    Tensor t = zeros(std::move(shape));
    t.fill(value);
    return t;
}

Tensor Tensor::row(std::vector<double> values) {
    Tensor t;
    t.shape = {1, values.size()};
    t.data = std::move(values);
    return t;
}

bool Tensor::all_finite() const {
    return std::all_of(data.begin(), data.end(),
                       [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double value) {
    std::fill(data.begin(), data.end(), value);
}

namespace {

int resolve_axis(const Tensor& x, int axis) {
    const int rank = static_cast<int>(x.shape.size() > 1 ? 2 : 1);
    if (axis < 0) axis += rank;
    if (axis < 0 || axis >= rank)
        throw DimensionError("axis " + std::to_string(axis) + " out of range");
    return axis;
}

}  // namespace

Tensor softmax(const Tensor& x, int axis) {
    const int ax = resolve_axis(x, axis);
    Tensor out = x;
    const std::size_t r = x.rows(), c = x.cols();
    if (ax == 1 || x.shape.size() == 1) {
        for (std::size_t i = 0; i < r; ++i) {
            double m = x.at(i, 0);
            for (std::size_t j = 1; j < c; ++j) m = std::max(m, x.at(i, j));
            double sum = 0.0;
            for (std::size_t j = 0; j < c; ++j) {
                out.at(i, j) = std::exp(x.at(i, j) - m);
                sum += out.at(i, j);
            }
            for (std::size_t j = 0; j < c; ++j) out.at(i, j) /= sum;
        }
    } else {
        for (std::size_t j = 0; j < c; ++j) {
            double m = x.at(0, j);
            for (std::size_t i = 1; i < r; ++i) m = std::max(m, x.at(i, j));
            double sum = 0.0;
            for (std::size_t i = 0; i < r; ++i) {
                out.at(i, j) = std::exp(x.at(i, j) - m);
                sum += out.at(i, j);
            }
            for (std::size_t i = 0; i < r; ++i) out.at(i, j) /= sum;
        }
    }
    return out;
}

Tensor l2_normalize(const Tensor& x, int axis) {
    const int ax = resolve_axis(x, axis);
    Tensor out = x;
    const std::size_t r = x.rows(), c = x.cols();
    if (ax == 1 || x.shape.size() == 1) {
        for (std::size_t i = 0; i < r; ++i) {
            double n2 = 0.0;
            for (std::size_t j = 0; j < c; ++j) n2 += x.at(i, j) * x.at(i, j);
            const double n = std::sqrt(n2);
            if (n < kL2NormEpsilon) continue;
            for (std::size_t j = 0; j < c; ++j) out.at(i, j) /= n;
        }
    } else {
        for (std::size_t j = 0; j < c; ++j) {
            double n2 = 0.0;
            for (std::size_t i = 0; i < r; ++i) n2 += x.at(i, j) * x.at(i, j);
            const double n = std::sqrt(n2);
            if (n < kL2NormEpsilon) continue;
            for (std::size_t i = 0; i < r; ++i) out.at(i, j) /= n;
        }
    }
    return out;
}

}  // namespace stim
