#pragma once

#include <string>

#include "budgetseg/tensor.hpp"

namespace budgetseg::detail {

inline void check_forward(const Tensor& input, const Filterbank& f, FilterKind expected,
                          int stride, int pad) {
    f.validate();
    if (f.kind != expected) {
        throw ShapeError("filterbank kind does not match the requested convolution");
    }
    if (f.in_channels != input.channels()) {
        throw ShapeError("input has " + std::to_string(input.channels()) +
                         " channels but filterbank expects " + std::to_string(f.in_channels));
    }
    if (input.height() < 1 || input.width() < 1) {
        throw ShapeError("input tensor is empty");
    }
    if (stride < 1) {
        throw ShapeError("stride must be >= 1, got " + std::to_string(stride));
    }
    if (pad < 0) {
        throw ShapeError("pad must be >= 0, got " + std::to_string(pad));
    }
}

inline void check_transposed(const Tensor& input, const Filterbank& f, int stride, int pad) {
    check_forward(input, f, FilterKind::transposed, stride, pad);
    const int oh = (input.height() - 1) * stride + f.kernel_h - 2 * pad;
    const int ow = (input.width() - 1) * stride + f.kernel_w - 2 * pad;
    if (oh < 1 || ow < 1) {
        throw ShapeError("transposed output size " + std::to_string(oh) + "x" +
                         std::to_string(ow) + " is not positive");
    }
}

} // namespace budgetseg::detail
