#include "cdic/interpolant.hpp"

#include <cmath>

#include "cdic/errors.hpp"
#include "cdic/kernels.hpp"

namespace cdic {

namespace {

struct Weights {
    double w[4];
};

inline Weights basis(double t) {
    const double t2 = t * t, t3 = t2 * t;
    return {{(1.0 - 3.0 * t + 3.0 * t2 - t3) / 6.0,
             (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0,
             (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0,
             t3 / 6.0}};
}

inline Weights basis_d(double t) {
    const double t2 = t * t;
    return {{(-1.0 + 2.0 * t - t2) / 2.0,
             (3.0 * t2 - 4.0 * t) / 2.0,
             (-3.0 * t2 + 2.0 * t + 1.0) / 2.0,
             t2 / 2.0}};
}

}  // namespace

Interpolant Interpolant::make(const GrayImage& img, Kind kind) {
    validate_image(img);
    if (img.width() < 4 || img.height() < 4)
        throw Error("bicubic interpolant requires an image of at least 4x4");
    Interpolant ip;
    ip.kind_ = kind;
    ip.src_ = img.px;
    ip.coeff_ = img.px;
    kernels::bspline_prefilter(ip.coeff_);
    return ip;
}

double Interpolant::value(double x, double y) const {
    if (!in_domain(x, y))
        throw OutOfDomainError("interpolant query (" + std::to_string(x) + ", " +
                               std::to_string(y) + ") outside evaluation region");
    const int cx = static_cast<int>(std::floor(x));
    const int cy = static_cast<int>(std::floor(y));
    const Weights wx = basis(x - cx), wy = basis(y - cy);
    double acc = 0.0;
    for (int m = 0; m < 4; ++m) {
        const double* row = &coeff_.v[static_cast<size_t>(cy - 1 + m) * coeff_.w + (cx - 1)];
        acc += wy.w[m] * (wx.w[0] * row[0] + wx.w[1] * row[1] + wx.w[2] * row[2] +
                          wx.w[3] * row[3]);
    }
    return acc;
}

Interpolant::Sample Interpolant::sample(double x, double y) const {
    if (!in_domain(x, y))
        throw OutOfDomainError("interpolant query (" + std::to_string(x) + ", " +
                               std::to_string(y) + ") outside evaluation region");
    const int cx = static_cast<int>(std::floor(x));
    const int cy = static_cast<int>(std::floor(y));
    const Weights wx = basis(x - cx), wy = basis(y - cy);
    const Weights dx = basis_d(x - cx), dy = basis_d(y - cy);
    Sample s;
    for (int m = 0; m < 4; ++m) {
        const double* row = &coeff_.v[static_cast<size_t>(cy - 1 + m) * coeff_.w + (cx - 1)];
        const double rv = wx.w[0] * row[0] + wx.w[1] * row[1] + wx.w[2] * row[2] + wx.w[3] * row[3];
        const double rd = dx.w[0] * row[0] + dx.w[1] * row[1] + dx.w[2] * row[2] + dx.w[3] * row[3];
        s.value += wy.w[m] * rv;
        s.dx += wy.w[m] * rd;
        s.dy += dy.w[m] * rv;
    }
    return s;
}

}  // namespace cdic
