#include "budgetseg/bilinear.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "budgetseg/errors.hpp"

namespace budgetseg {

PlaneParams find_params(int size) {
    if (size < 1) {
        throw ShapeError("kernel size must be >= 1, got " + std::to_string(size));
    }
    const double divisor = static_cast<double>((size + 1) / 2);
    const double center = size % 2 == 0 ? divisor - 0.5 : divisor - 1.0;
    return PlaneParams{divisor, center};
}

BilinearPlane make_bilinear_plane(int height, int width) {
    const PlaneParams ph = find_params(height);
    const PlaneParams pw = find_params(width);
    BilinearPlane plane;
    plane.height = height;
    plane.width = width;
    plane.divisor_h = ph.divisor;
    plane.divisor_w = pw.divisor;
    plane.center_h = ph.center;
    plane.center_w = pw.center;
    plane.coefficients.resize(static_cast<std::size_t>(height) * width);
    for (int y = 0; y < height; ++y) {
        const double fy = 1.0 - std::abs(y - ph.center) / ph.divisor;
        for (int x = 0; x < width; ++x) {
            const double fx = 1.0 - std::abs(x - pw.center) / pw.divisor;
            plane.coefficients[static_cast<std::size_t>(y) * width + x] = fy * fx;
        }
    }
    return plane;
}

KernelBank create_bilinear_kernels(int num_classes, int kernel_h, int kernel_w, BankMode mode) {
    if (num_classes < 1) {
        throw ShapeError("num_classes must be >= 1, got " + std::to_string(num_classes));
    }
    const BilinearPlane plane = make_bilinear_plane(kernel_h, kernel_w);
    KernelBank bank;
    bank.height = kernel_h;
    bank.width = kernel_w;
    bank.num_classes = num_classes;
    bank.mode = mode;
    bank.planes.assign(
        static_cast<std::size_t>(kernel_h) * kernel_w * num_classes * num_classes, 0.0);
    for (int y = 0; y < kernel_h; ++y) {
        for (int x = 0; x < kernel_w; ++x) {
            const double coeff = plane.at(y, x);
            for (int i = 0; i < num_classes; ++i) {
                for (int j = 0; j < num_classes; ++j) {
                    if (mode == BankMode::full || i == j) {
                        bank.planes[((static_cast<std::size_t>(y) * kernel_w + x) * num_classes +
                                     i) *
                                        num_classes +
                                    j] = coeff;
                    }
                }
            }
        }
    }
    return bank;
}

Filterbank to_filterbank(const KernelBank& bank) {
    Filterbank f = Filterbank::make(FilterKind::transposed, bank.height, bank.width,
                                    bank.num_classes, bank.num_classes);
    for (int ky = 0; ky < bank.height; ++ky) {
        for (int kx = 0; kx < bank.width; ++kx) {
            for (int ci = 0; ci < bank.num_classes; ++ci) {
                for (int co = 0; co < bank.num_classes; ++co) {
                    // bank planes are [y][x][out][in]
                    f.weights[(static_cast<std::size_t>(ky * bank.width + kx) *
                                   bank.num_classes +
                               ci) *
                                  bank.num_classes +
                              co] = bank.at(ky, kx, co, ci);
                }
            }
        }
    }
    return f;
}

int upsample_interior_margin(int factor) {
    return factor / 2;
}

Tensor bilinear_upsample_reference(const Tensor& input, int factor) {
    if (factor < 2 || factor % 2 != 0) {
        throw ShapeError("upsample factor must be even and >= 2, got " + std::to_string(factor));
    }
    const int h = input.height();
    const int w = input.width();
    const int c = input.channels();
    Tensor out(h * factor, w * factor, c);
    const double shift = (factor - 1) / 2.0;
    for (int qy = 0; qy < out.height(); ++qy) {
        const double sy = std::clamp((qy - shift) / factor, 0.0, static_cast<double>(h - 1));
        const int y0 = std::min(static_cast<int>(sy), h > 1 ? h - 2 : 0);
        const double ty = h > 1 ? sy - y0 : 0.0;
        for (int qx = 0; qx < out.width(); ++qx) {
            const double sx = std::clamp((qx - shift) / factor, 0.0, static_cast<double>(w - 1));
            const int x0 = std::min(static_cast<int>(sx), w > 1 ? w - 2 : 0);
            const double tx = w > 1 ? sx - x0 : 0.0;
            for (int ch = 0; ch < c; ++ch) {
                const double top =
                    (1.0 - tx) * input.at(y0, x0, ch) +
                    tx * input.at(y0, w > 1 ? x0 + 1 : x0, ch);
                const double bottom =
                    (1.0 - tx) * input.at(h > 1 ? y0 + 1 : y0, x0, ch) +
                    tx * input.at(h > 1 ? y0 + 1 : y0, w > 1 ? x0 + 1 : x0, ch);
                out.at(qy, qx, ch) = (1.0 - ty) * top + ty * bottom;
            }
        }
    }
    return out;
}

void write_kernel_csv(const KernelBank& bank, std::ostream& out) {
    out << bank.height << ',' << bank.width << ',' << bank.num_classes << ','
        << (bank.mode == BankMode::full ? "full" : "diagonal") << '\n';
    // coefficients are computed in double but stored as float32; nine
    // significant digits round-trip that exactly
    out << std::setprecision(9);
    for (int i = 0; i < bank.num_classes; ++i) {
        for (int j = 0; j < bank.num_classes; ++j) {
            for (int y = 0; y < bank.height; ++y) {
                for (int x = 0; x < bank.width; ++x) {
                    out << static_cast<float>(bank.at(y, x, i, j)) << '\n';
                }
            }
        }
    }
}

} // namespace budgetseg
