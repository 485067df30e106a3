#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "budgetseg/errors.hpp"

namespace budgetseg {

/// Dense H x W x C tensor of doubles, row-major with channels innermost.
class Tensor {
public:
    Tensor() = default;
    Tensor(int height, int width, int channels);
    Tensor(int height, int width, int channels, std::vector<double> values);

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }
    std::size_t size() const { return data_.size(); }

    double at(int y, int x, int c) const { return data_[index(y, x, c)]; }
    double& at(int y, int x, int c) { return data_[index(y, x, c)]; }
    std::size_t index(int y, int x, int c) const {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool operator==(const Tensor&) const = default;

private:
    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::vector<double> data_;
};

enum class FilterKind { standard, depthwise, pointwise, transposed };

/// Convolution weights. Layout depends on kind:
///   standard/transposed: [kh][kw][in][out], depthwise: [kh][kw][in],
///   pointwise: [in][out].
struct Filterbank {
    FilterKind kind = FilterKind::standard;
    int kernel_h = 1;
    int kernel_w = 1;
    int in_channels = 1;
    int out_channels = 1;
    std::vector<double> weights;

    static Filterbank make(FilterKind kind, int kernel_h, int kernel_w, int in_channels,
                           int out_channels);

    std::size_t expected_weight_count() const;
    void validate() const;

    double spatial(int ky, int kx, int ci, int co) const {
        return weights[(static_cast<std::size_t>(ky * kernel_w + kx) * in_channels + ci) *
                           out_channels +
                       co];
    }
    double depth(int ky, int kx, int c) const {
        return weights[static_cast<std::size_t>(ky * kernel_w + kx) * in_channels + c];
    }
    double point(int ci, int co) const {
        return weights[static_cast<std::size_t>(ci) * out_channels + co];
    }
};

/// Exact multiply-accumulate tally; one tick per scalar MAC executed.
struct MacCounter {
    std::uint64_t macs = 0;
    void add(std::uint64_t n) { macs += n; }
};

/// Forward output size: floor((in + 2*pad - kernel) / stride) + 1. Throws ShapeError
/// when the result would be non-positive.
int conv_out_size(int in, int kernel, int stride, int pad);

// Parallel (OpenMP) kernels. Results of the forward convolutions are bitwise
// identical to the serial reference; the transposed kernel is an
// output-gather reformulation of the reference scatter and agrees to
// floating-point roundoff. MAC counts are always exactly equal.
Tensor conv_standard(const Tensor& input, const Filterbank& f, int stride, int pad,
                     MacCounter& counter);
Tensor conv_depthwise(const Tensor& input, const Filterbank& f, int stride, int pad,
                      MacCounter& counter);
Tensor conv_pointwise(const Tensor& input, const Filterbank& f, MacCounter& counter);
Tensor conv_transposed(const Tensor& input, const Filterbank& f, int stride, int pad,
                       MacCounter& counter);

// Serial reference implementations, kept as the plain-loop baseline for tests
// and benchmarks. conv_transposed is the literal scatter-accumulate.
namespace reference {
Tensor conv_standard(const Tensor& input, const Filterbank& f, int stride, int pad,
                     MacCounter& counter);
Tensor conv_depthwise(const Tensor& input, const Filterbank& f, int stride, int pad,
                      MacCounter& counter);
Tensor conv_pointwise(const Tensor& input, const Filterbank& f, MacCounter& counter);
Tensor conv_transposed(const Tensor& input, const Filterbank& f, int stride, int pad,
                       MacCounter& counter);
} // namespace reference

// CSV tensor format: one header line "h,w,c" followed by h*w*c values in
// row-major height -> width -> channel order.
Tensor read_tensor_csv(std::istream& in);
Tensor read_tensor_csv(const std::string& path);
void write_tensor_csv(const Tensor& t, std::ostream& out);
void write_tensor_csv(const Tensor& t, const std::string& path);

} // namespace budgetseg
