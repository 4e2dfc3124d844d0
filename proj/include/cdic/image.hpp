#pragma once

#include <optional>

#include "cdic/grid.hpp"

namespace cdic {

/// Single-channel image. Intensities are stored normalized to [0,1];
/// `code_max` remembers the native integer full-scale (255, 65535, ...) so
/// that speckle-quality numbers stay comparable across bit depths.
struct GrayImage {
    Grid2<double> px;
    double code_max = 255.0;
    std::optional<double> mm_per_px;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0) : px(w, h, fill) {}

    int width() const { return px.w; }
    int height() const { return px.h; }
    double at(int x, int y) const { return px(x, y); }
    double& at(int x, int y) { return px(x, y); }
};

/// Throws if dimensions are below 3x3 or any intensity is non-finite or
/// outside [0,1].
void validate_image(const GrayImage& img);

struct GradientField {
    Grid2<double> fx, fy;
};

/// Intensity derivatives from normalized 3x3 Prewitt kernels (raw response
/// divided by 6, so a unit-slope ramp yields derivative 1). Border pixels
/// replicate the nearest interior value.
GradientField gradients(const GrayImage& img);

/// Mean intensity gradient: mean over all pixels of sqrt(fx^2 + fy^2),
/// evaluated in native code values (normalized intensity times code_max).
double mean_intensity_gradient(const GrayImage& img);

}  // namespace cdic
