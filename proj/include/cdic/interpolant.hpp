#pragma once

#include "cdic/grid.hpp"
#include "cdic/image.hpp"

namespace cdic {

/// Subpixel evaluator over a GrayImage: interpolating bicubic B-spline with a
/// precomputed coefficient grid (natural end conditions). Evaluation is
/// defined on [margin, dim-1-margin] with margin = 2; queries outside throw
/// OutOfDomainError. Immutable after construction.
class Interpolant {
  public:
    enum class Kind { BicubicBSpline };

    static constexpr int kMargin = 2;

    static Interpolant make(const GrayImage& img, Kind kind = Kind::BicubicBSpline);

    struct Sample {
        double value = 0.0;
        double dx = 0.0;
        double dy = 0.0;
    };

    double value(double x, double y) const;
    Sample sample(double x, double y) const;

    bool in_domain(double x, double y) const {
        return x >= kMargin && x <= src_.w - 1 - kMargin && y >= kMargin &&
               y <= src_.h - 1 - kMargin;
    }

    int width() const { return src_.w; }
    int height() const { return src_.h; }
    Kind kind() const { return kind_; }

    /// Stored source intensities (exact pixel values, not spline coefficients).
    const Grid2<double>& source() const { return src_; }
    const Grid2<double>& coefficients() const { return coeff_; }

  private:
    Kind kind_ = Kind::BicubicBSpline;
    Grid2<double> src_;
    Grid2<double> coeff_;
};

/// Convenience wrapper matching the image-level operation name.
inline Interpolant make_interpolant(const GrayImage& img,
                                    Interpolant::Kind kind = Interpolant::Kind::BicubicBSpline) {
    return Interpolant::make(img, kind);
}

}  // namespace cdic
