#include "budgetseg/tensor.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "conv_common.hpp"

namespace budgetseg {

Tensor::Tensor(int height, int width, int channels)
    : height_(height), width_(width), channels_(channels) {
    if (height < 1 || width < 1 || channels < 1) {
        throw ShapeError("tensor dimensions must be >= 1, got " + std::to_string(height) + "x" +
                         std::to_string(width) + "x" + std::to_string(channels));
    }
    data_.assign(static_cast<std::size_t>(height) * width * channels, 0.0);
}

Tensor::Tensor(int height, int width, int channels, std::vector<double> values)
    : Tensor(height, width, channels) {
    if (values.size() != data_.size()) {
        throw ShapeError("tensor data length " + std::to_string(values.size()) +
                         " does not match " + std::to_string(data_.size()));
    }
    data_ = std::move(values);
}

Filterbank Filterbank::make(FilterKind kind, int kernel_h, int kernel_w, int in_channels,
                            int out_channels) {
    Filterbank f;
    f.kind = kind;
    f.kernel_h = kernel_h;
    f.kernel_w = kernel_w;
    f.in_channels = in_channels;
    f.out_channels = kind == FilterKind::depthwise ? in_channels : out_channels;
    f.weights.assign(f.expected_weight_count(), 0.0);
    f.validate();
    return f;
}

std::size_t Filterbank::expected_weight_count() const {
    const auto kh = static_cast<std::size_t>(kernel_h);
    const auto kw = static_cast<std::size_t>(kernel_w);
    const auto ci = static_cast<std::size_t>(in_channels);
    const auto co = static_cast<std::size_t>(out_channels);
    switch (kind) {
    case FilterKind::depthwise: return kh * kw * ci;
    case FilterKind::pointwise: return ci * co;
    case FilterKind::standard:
    case FilterKind::transposed: return kh * kw * ci * co;
    }
    return 0;
}

void Filterbank::validate() const {
    if (kernel_h < 1 || kernel_w < 1 || in_channels < 1 || out_channels < 1) {
        throw ShapeError("filterbank dimensions must be >= 1");
    }
    if (kind == FilterKind::pointwise && (kernel_h != 1 || kernel_w != 1)) {
        throw ShapeError("pointwise filterbank must have a 1x1 kernel");
    }
    if (kind == FilterKind::depthwise && out_channels != in_channels) {
        throw ShapeError("depthwise filterbank must preserve the channel count");
    }
    if (weights.size() != expected_weight_count()) {
        throw ShapeError("filterbank has " + std::to_string(weights.size()) +
                         " weights, expected " + std::to_string(expected_weight_count()));
    }
}

int conv_out_size(int in, int kernel, int stride, int pad) {
    if (in < 1 || kernel < 1 || stride < 1 || pad < 0) {
        throw ShapeError("invalid convolution geometry");
    }
    const int span = in + 2 * pad - kernel;
    if (span < 0) {
        throw ShapeError("kernel " + std::to_string(kernel) + " exceeds padded input " +
                         std::to_string(in + 2 * pad));
    }
    return span / stride + 1;
}

namespace {

// Cutoff below which the parallel regions are not worth spawning.
constexpr std::int64_t kParallelMinWork = 1 << 15;

} // namespace

Tensor conv_standard(const Tensor& input, const Filterbank& f, int stride, int pad,
                     MacCounter& counter) {
    detail::check_forward(input, f, FilterKind::standard, stride, pad);
    const int oh = conv_out_size(input.height(), f.kernel_h, stride, pad);
    const int ow = conv_out_size(input.width(), f.kernel_w, stride, pad);
    const int ci = input.channels();
    const int co = f.out_channels;
    Tensor out(oh, ow, co);
    const std::int64_t work =
        static_cast<std::int64_t>(oh) * ow * ci * co * f.kernel_h * f.kernel_w;
    std::uint64_t macs = 0;
#pragma omp parallel for collapse(2) reduction(+ : macs) if (work >= kParallelMinWork)
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            for (int oc = 0; oc < co; ++oc) {
                double acc = 0.0;
                for (int ky = 0; ky < f.kernel_h; ++ky) {
                    const int iy = oy * stride - pad + ky;
                    for (int kx = 0; kx < f.kernel_w; ++kx) {
                        const int ix = ox * stride - pad + kx;
                        const bool inside =
                            iy >= 0 && iy < input.height() && ix >= 0 && ix < input.width();
                        for (int c = 0; c < ci; ++c) {
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
    const int ci = input.channels();
    Tensor out(oh, ow, ci);
    const std::int64_t work = static_cast<std::int64_t>(oh) * ow * ci * f.kernel_h * f.kernel_w;
    std::uint64_t macs = 0;
#pragma omp parallel for collapse(2) reduction(+ : macs) if (work >= kParallelMinWork)
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            for (int c = 0; c < ci; ++c) {
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
    const int h = input.height();
    const int w = input.width();
    const int ci = input.channels();
    const int co = f.out_channels;
    Tensor out(h, w, co);
    const std::int64_t work = static_cast<std::int64_t>(h) * w * ci * co;
    std::uint64_t macs = 0;
#pragma omp parallel for collapse(2) reduction(+ : macs) if (work >= kParallelMinWork)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int oc = 0; oc < co; ++oc) {
                double acc = 0.0;
                for (int c = 0; c < ci; ++c) {
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

// Output-gather form of the scatter-accumulate: every full-buffer pixel sums
// the (input pixel, kernel tap) pairs that land on it, so cropped margins are
// still computed and counted exactly as the scatter does.
Tensor conv_transposed(const Tensor& input, const Filterbank& f, int stride, int pad,
                       MacCounter& counter) {
    detail::check_transposed(input, f, stride, pad);
    const int ih = input.height();
    const int iw = input.width();
    const int ci = input.channels();
    const int co = f.out_channels;
    const int full_h = (ih - 1) * stride + f.kernel_h;
    const int full_w = (iw - 1) * stride + f.kernel_w;
    Tensor out(full_h - 2 * pad, full_w - 2 * pad, co);
    const std::int64_t work =
        static_cast<std::int64_t>(ih) * iw * ci * co * f.kernel_h * f.kernel_w;
    std::uint64_t macs = 0;
#pragma omp parallel for collapse(2) reduction(+ : macs) if (work >= kParallelMinWork)
    for (int fy = 0; fy < full_h; ++fy) {
        for (int fx = 0; fx < full_w; ++fx) {
            // input pixels whose kernel footprint covers (fy, fx):
            // iy with fy - iy*stride in [0, kernel_h), likewise for ix
            const int ny = fy - f.kernel_h + 1;
            const int iy_lo = ny > 0 ? (ny + stride - 1) / stride : 0;
            const int iy_hi = std::min(ih - 1, fy / stride);
            const int nx = fx - f.kernel_w + 1;
            const int ix_lo = nx > 0 ? (nx + stride - 1) / stride : 0;
            const int ix_hi = std::min(iw - 1, fx / stride);
            for (int oc = 0; oc < co; ++oc) {
                double acc = 0.0;
                for (int iy = iy_lo; iy <= iy_hi; ++iy) {
                    const int ky = fy - iy * stride;
                    for (int ix = ix_lo; ix <= ix_hi; ++ix) {
                        const int kx = fx - ix * stride;
                        for (int c = 0; c < ci; ++c) {
                            acc += input.at(iy, ix, c) * f.spatial(ky, kx, c, oc);
                            ++macs;
                        }
                    }
                }
                const int oy = fy - pad;
                const int ox = fx - pad;
                if (oy >= 0 && oy < out.height() && ox >= 0 && ox < out.width()) {
                    out.at(oy, ox, oc) = acc;
                }
            }
        }
    }
    counter.add(macs);
    return out;
}

Tensor read_tensor_csv(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) {
        throw ParseError("tensor CSV: missing header line");
    }
    for (char& ch : header) {
        if (ch == ',') ch = ' ';
    }
    std::istringstream hs(header);
    int h = 0, w = 0, c = 0;
    if (!(hs >> h >> w >> c)) {
        throw ParseError("tensor CSV: header must be 'h,w,c', got '" + header + "'");
    }
    std::string tail;
    if (hs >> tail) {
        throw ParseError("tensor CSV: trailing content in header: '" + tail + "'");
    }
    if (h < 1 || w < 1 || c < 1) {
        throw ParseError("tensor CSV: dimensions must be >= 1");
    }
    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    for (char& ch : body) {
        if (ch == ',') ch = ' ';
    }
    std::istringstream bs(body);
    const std::size_t expected = static_cast<std::size_t>(h) * w * c;
    std::vector<double> values;
    values.reserve(expected);
    double v = 0.0;
    while (bs >> v) {
        values.push_back(v);
    }
    if (!bs.eof()) {
        throw ParseError("tensor CSV: non-numeric value after " +
                         std::to_string(values.size()) + " values");
    }
    if (values.size() != expected) {
        throw ParseError("tensor CSV: expected " + std::to_string(expected) + " values, got " +
                         std::to_string(values.size()));
    }
    return Tensor(h, w, c, std::move(values));
}

Tensor read_tensor_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open tensor CSV '" + path + "'");
    }
    return read_tensor_csv(in);
}

void write_tensor_csv(const Tensor& t, std::ostream& out) {
    out << t.height() << ',' << t.width() << ',' << t.channels() << '\n';
    out << std::setprecision(17);
    for (double v : t.data()) {
        out << v << '\n';
    }
}

void write_tensor_csv(const Tensor& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot open '" + path + "' for writing");
    }
    write_tensor_csv(t, out);
}

} // namespace budgetseg
