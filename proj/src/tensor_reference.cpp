#include <cstdint>

#include "budgetseg/tensor.hpp"
#include "conv_common.hpp"

// Plain single-threaded loop nests; the baseline the parallel kernels are
// tested against.

namespace budgetseg::reference {

Tensor conv_standard(const Tensor& input, const Filterbank& f, int stride, int pad,
                     MacCounter& counter) {
    detail::check_forward(input, f, FilterKind::standard, stride, pad);
    const int oh = conv_out_size(input.height(), f.kernel_h, stride, pad);
    const int ow = conv_out_size(input.width(), f.kernel_w, stride, pad);
    Tensor out(oh, ow, f.out_channels);
    std::uint64_t macs = 0;
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            for (int oc = 0; oc < f.out_channels; ++oc) {
                double acc = 0.0;
                for (int ky = 0; ky < f.kernel_h; ++ky) {
                    const int iy = oy * stride - pad + ky;
                    for (int kx = 0; kx < f.kernel_w; ++kx) {
                        const int ix = ox * stride - pad + kx;
                        const bool inside =
                            iy >= 0 && iy < input.height() && ix >= 0 && ix < input.width();
                        for (int c = 0; c < input.channels(); ++c) {
                            const double v = inside ? input.at(iy, ix, c) : 0.0;
                            acc += v * f.spatial(ky, kx, c, oc);
                            ++macs;
                        }
                    }
                }
                out.at(oy, ox, oc) = acc;
            }
        }
    }
    counter.add(macs);
    return out;
}

Tensor conv_depthwise(const Tensor& input, const Filterbank& f, int stride, int pad,
                      MacCounter& counter) {
    detail::check_forward(input, f, FilterKind::depthwise, stride, pad);
    const int oh = conv_out_size(input.height(), f.kernel_h, stride, pad);
    const int ow = conv_out_size(input.width(), f.kernel_w, stride, pad);
    Tensor out(oh, ow, input.channels());
    std::uint64_t macs = 0;
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            for (int c = 0; c < input.channels(); ++c) {
                double acc = 0.0;
                for (int ky = 0; ky < f.kernel_h; ++ky) {
                    const int iy = oy * stride - pad + ky;
                    for (int kx = 0; kx < f.kernel_w; ++kx) {
                        const int ix = ox * stride - pad + kx;
                        const bool inside =
                            iy >= 0 && iy < input.height() && ix >= 0 && ix < input.width();
                        const double v = inside ? input.at(iy, ix, c) : 0.0;
                        acc += v * f.depth(ky, kx, c);
                        ++macs;
                    }
                }
                out.at(oy, ox, c) = acc;
            }
        }
    }
    counter.add(macs);
    return out;
}

Tensor conv_pointwise(const Tensor& input, const Filterbank& f, MacCounter& counter) {
    detail::check_forward(input, f, FilterKind::pointwise, 1, 0);
    Tensor out(input.height(), input.width(), f.out_channels);
    std::uint64_t macs = 0;
    for (int y = 0; y < input.height(); ++y) {
        for (int x = 0; x < input.width(); ++x) {
            for (int oc = 0; oc < f.out_channels; ++oc) {
                double acc = 0.0;
                for (int c = 0; c < input.channels(); ++c) {
                    acc += input.at(y, x, c) * f.point(c, oc);
                    ++macs;
                }
                out.at(y, x, oc) = acc;
            }
        }
    }
    counter.add(macs);
    return out;
}

// Literal scatter-accumulate: each input pixel multiplies the full kernel
// into a zero-initialized buffer, then pad rows/columns are cropped off.
Tensor conv_transposed(const Tensor& input, const Filterbank& f, int stride, int pad,
                       MacCounter& counter) {
    detail::check_transposed(input, f, stride, pad);
    const int full_h = (input.height() - 1) * stride + f.kernel_h;
    const int full_w = (input.width() - 1) * stride + f.kernel_w;
    Tensor full(full_h, full_w, f.out_channels);
    std::uint64_t macs = 0;
    for (int iy = 0; iy < input.height(); ++iy) {
        for (int ix = 0; ix < input.width(); ++ix) {
            for (int ky = 0; ky < f.kernel_h; ++ky) {
                for (int kx = 0; kx < f.kernel_w; ++kx) {
                    for (int c = 0; c < input.channels(); ++c) {
                        const double v = input.at(iy, ix, c);
                        for (int oc = 0; oc < f.out_channels; ++oc) {
                            full.at(iy * stride + ky, ix * stride + kx, oc) +=
                                v * f.spatial(ky, kx, c, oc);
                            ++macs;
                        }
                    }
                }
            }
        }
    }
    Tensor out(full_h - 2 * pad, full_w - 2 * pad, f.out_channels);
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            for (int oc = 0; oc < f.out_channels; ++oc) {
                out.at(y, x, oc) = full.at(y + pad, x + pad, oc);
            }
        }
    }
    counter.add(macs);
    return out;
}

} // namespace budgetseg::reference
