#pragma once

#include <iosfwd>
#include <vector>

#include "budgetseg/tensor.hpp"

namespace budgetseg {

/// Divisor/center pair steering the tent profile of one kernel axis.
struct PlaneParams {
    double divisor = 0.0;
    double center = 0.0;

    bool operator==(const PlaneParams&) const = default;
};

// divisor = floor((size + 1) / 2); center = divisor - 0.5 for even sizes,
// divisor - 1 for odd sizes.
PlaneParams find_params(int size);

/// A single bilinear coefficient grid: the outer product of two 1-D tent
/// profiles (1 - |y - center_h| / divisor_h) * (1 - |x - center_w| / divisor_w).
struct BilinearPlane {
    int height = 0;
    int width = 0;
    double divisor_h = 0.0;
    double divisor_w = 0.0;
    double center_h = 0.0;
    double center_w = 0.0;
    std::vector<double> coefficients;  // height x width, row-major

    double at(int y, int x) const { return coefficients[static_cast<std::size_t>(y) * width + x]; }
};

BilinearPlane make_bilinear_plane(int height, int width);

enum class BankMode { full, diagonal };

/// Bilinear kernel bank for a class-to-class transposed convolution.
/// full fills every (i, j) plane with the same coefficients; diagonal
/// fills only i == j and zeroes the cross-class planes.
struct KernelBank {
    int height = 0;
    int width = 0;
    int num_classes = 0;
    BankMode mode = BankMode::full;
    std::vector<double> planes;  // [y][x][i][j]

    double at(int y, int x, int i, int j) const {
        return planes[((static_cast<std::size_t>(y) * width + x) * num_classes + i) * num_classes +
                      j];
    }
};

KernelBank create_bilinear_kernels(int num_classes, int kernel_h, int kernel_w, BankMode mode);

/// Packs a kernel bank as transposed-convolution weights (in = out = classes).
Filterbank to_filterbank(const KernelBank& bank);

// Independent upsampling oracle: output pixel q samples the input at source
// coordinate (q - (x - 1) / 2) / x with clamped bilinear interpolation, per
// channel. Matches conv_transposed with a diagonal bank and upsample_params(x)
// away from the border (the outermost x/2 output pixels differ: the
// convolution path zero-extends while the oracle clamps).
Tensor bilinear_upsample_reference(const Tensor& input, int factor);

/// Number of output pixels per border to skip when comparing against
/// conv_transposed: factor / 2.
int upsample_interior_margin(int factor);

// Kernel dump: header "h,w,classes,mode" then one coefficient per line in
// nested i -> j -> y -> x order, >= 9 significant digits.
void write_kernel_csv(const KernelBank& bank, std::ostream& out);

} // namespace budgetseg
