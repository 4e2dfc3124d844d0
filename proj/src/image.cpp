#include "cdic/image.hpp"

#include <cmath>

#include "cdic/errors.hpp"
#include "cdic/kernels.hpp"

namespace cdic {

void validate_image(const GrayImage& img) {
    if (img.width() < 3 || img.height() < 3)
        throw Error("image must be at least 3x3, got " + std::to_string(img.width()) + "x" +
                    std::to_string(img.height()));
    for (double v : img.px.v)
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw Error("image intensities must be finite and within [0,1]");
}

GradientField gradients(const GrayImage& img) {
    validate_image(img);
    GradientField g;
    kernels::prewitt(img.px, g.fx, g.fy);
    return g;
}

double mean_intensity_gradient(const GrayImage& img) {
    const GradientField g = gradients(img);
    double sum = 0.0;
    for (size_t k = 0; k < g.fx.size(); ++k)
        sum += std::sqrt(g.fx.v[k] * g.fx.v[k] + g.fy.v[k] * g.fy.v[k]);
    return img.code_max * sum / static_cast<double>(g.fx.size());
}

}  // namespace cdic
