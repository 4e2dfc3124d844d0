// Serial reference implementations. Same arithmetic as the OpenMP kernels,
// kept for correctness tests and the kernel benchmark.

#include "cdic/kernels.hpp"
#include "kernels_detail.hpp"

namespace cdic::kernels {

void prewitt_ref(const Grid2<double>& src, Grid2<double>& fx, Grid2<double>& fy) {
    fx = Grid2<double>(src.w, src.h);
    fy = Grid2<double>(src.w, src.h);
    for (int y = 1; y < src.h - 1; ++y) detail::prewitt_row(src, fx, fy, y);
    detail::prewitt_borders(fx, fy);
}

void bspline_prefilter_ref(Grid2<double>& c) {
    const auto fr = detail::thomas_factors(c.w);
    const auto fc = detail::thomas_factors(c.h);
    std::vector<double> rhs(std::max(c.w, c.h), 0.0);
    for (int y = 0; y < c.h; ++y)
        detail::prefilter_line(&c.v[static_cast<size_t>(y) * c.w], c.w, 1, fr, rhs);
    for (int x = 0; x < c.w; ++x) detail::prefilter_line(&c.v[x], c.h, c.w, fc, rhs);
}

TranslationHit zncc_search_ref(const Grid2<double>& ref, const Grid2<double>& def,
                               int cx, int cy, int half, int radius) {
    const auto st = detail::ref_subset_stats(ref, cx, cy, half);
    const int side = 2 * radius + 1;
    std::vector<double> scores(static_cast<size_t>(side) * side);
    for (int k = 0; k < static_cast<int>(scores.size()); ++k)
        scores[k] = detail::zncc_at_offset(st, def, cx, cy, half, k % side - radius,
                                           k / side - radius);
    return detail::pick_best(scores, radius);
}

void render_rotation_ref(const Interpolant& src, double x0, double alpha_deg,
                         double background, Grid2<double>& out) {
    const double a = alpha_deg * 3.14159265358979323846 / 180.0;
    const detail::RotationMap map{x0, std::cos(a), std::sin(a)};
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x)
            out(x, y) = detail::render_pixel(src, map, background, x, y);
}

void render_speckle_ref(const std::vector<Blob>& blobs, double background,
                        double foreground, Grid2<double>& out) {
    const auto bins = detail::bin_blobs(blobs, out.w, out.h);
    const double amp = background - foreground;
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x)
            out(x, y) = detail::speckle_pixel(blobs, bins, background, amp, x, y);
}

}  // namespace cdic::kernels
