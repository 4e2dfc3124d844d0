#include "cdic/kernels.hpp"

#include <omp.h>

#include "kernels_detail.hpp"

namespace cdic::kernels {

namespace {
int g_max_threads = 0;
int effective_threads() {
    return g_max_threads > 0 ? g_max_threads : omp_get_max_threads();
}
}  // namespace

void set_max_threads(int n) { g_max_threads = n; }
int max_threads() { return effective_threads(); }

void prewitt(const Grid2<double>& src, Grid2<double>& fx, Grid2<double>& fy) {
    fx = Grid2<double>(src.w, src.h);
    fy = Grid2<double>(src.w, src.h);
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (int y = 1; y < src.h - 1; ++y) detail::prewitt_row(src, fx, fy, y);
    detail::prewitt_borders(fx, fy);
}

void bspline_prefilter(Grid2<double>& c) {
    const auto fr = detail::thomas_factors(c.w);
    const auto fc = detail::thomas_factors(c.h);
#pragma omp parallel num_threads(effective_threads())
    {
        std::vector<double> rhs(std::max(c.w, c.h), 0.0);
#pragma omp for schedule(static)
        for (int y = 0; y < c.h; ++y)
            detail::prefilter_line(&c.v[static_cast<size_t>(y) * c.w], c.w, 1, fr, rhs);
#pragma omp for schedule(static)
        for (int x = 0; x < c.w; ++x) detail::prefilter_line(&c.v[x], c.h, c.w, fc, rhs);
    }
}

TranslationHit zncc_search(const Grid2<double>& ref, const Grid2<double>& def,
                           int cx, int cy, int half, int radius) {
    const auto st = detail::ref_subset_stats(ref, cx, cy, half);
    const int side = 2 * radius + 1;
    std::vector<double> scores(static_cast<size_t>(side) * side);
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (int k = 0; k < static_cast<int>(scores.size()); ++k)
        scores[k] = detail::zncc_at_offset(st, def, cx, cy, half, k % side - radius,
                                           k / side - radius);
    return detail::pick_best(scores, radius);
}

void render_rotation(const Interpolant& src, double x0, double alpha_deg,
                     double background, Grid2<double>& out) {
    const double a = alpha_deg * 3.14159265358979323846 / 180.0;
    const detail::RotationMap map{x0, std::cos(a), std::sin(a)};
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x)
            out(x, y) = detail::render_pixel(src, map, background, x, y);
}

void render_speckle(const std::vector<Blob>& blobs, double background,
                    double foreground, Grid2<double>& out) {
    const auto bins = detail::bin_blobs(blobs, out.w, out.h);
    const double amp = background - foreground;
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x)
            out(x, y) = detail::speckle_pixel(blobs, bins, background, amp, x, y);
}

}  // namespace cdic::kernels
