#pragma once

// Per-element bodies shared by the OpenMP kernels and their serial *_ref
// twins. Keeping the arithmetic in one place guarantees the two variants
// produce bitwise-identical results.

#include <cmath>
#include <vector>

#include "cdic/errors.hpp"
#include "cdic/grid.hpp"
#include "cdic/interpolant.hpp"
#include "cdic/kernels.hpp"

namespace cdic::kernels::detail {

inline void prewitt_row(const Grid2<double>& s, Grid2<double>& fx, Grid2<double>& fy, int y) {
    for (int x = 1; x < s.w - 1; ++x) {
        const double right = s(x + 1, y - 1) + s(x + 1, y) + s(x + 1, y + 1);
        const double left = s(x - 1, y - 1) + s(x - 1, y) + s(x - 1, y + 1);
        const double bot = s(x - 1, y + 1) + s(x, y + 1) + s(x + 1, y + 1);
        const double top = s(x - 1, y - 1) + s(x, y - 1) + s(x + 1, y - 1);
        fx(x, y) = (right - left) / 6.0;
        fy(x, y) = (bot - top) / 6.0;
    }
}

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

// Border pixels replicate the nearest interior value.
inline void prewitt_borders(Grid2<double>& fx, Grid2<double>& fy) {
    const int w = fx.w, h = fx.h;
    for (int y = 0; y < h; ++y) {
        const bool border_row = (y == 0 || y == h - 1);
        for (int x = 0; x < w; ++x) {
            if (!border_row && x != 0 && x != w - 1) continue;
            const int sx = clampi(x, 1, w - 2);
            const int sy = clampi(y, 1, h - 2);
            fx(x, y) = fx(sx, sy);
            fy(x, y) = fy(sx, sy);
        }
    }
}

// Precomputed Thomas factors for the (1/6, 4/6, 1/6) tridiagonal system with
// Dirichlet ends (c_0 = f_0, c_{n-1} = f_{n-1}).
struct ThomasFactors {
    std::vector<double> m;     // elimination multipliers, index 2..n-2
    std::vector<double> diag;  // eliminated diagonal, index 1..n-2
};

inline ThomasFactors thomas_factors(int n) {
    ThomasFactors f;
    f.m.assign(n, 0.0);
    f.diag.assign(n, 0.0);
    if (n < 3) return f;
    f.diag[1] = 4.0 / 6.0;
    for (int i = 2; i <= n - 2; ++i) {
        f.m[i] = (1.0 / 6.0) / f.diag[i - 1];
        f.diag[i] = 4.0 / 6.0 - f.m[i] * (1.0 / 6.0);
    }
    return f;
}

// Solves one line in place: data[k*stride], k = 0..n-1.
inline void prefilter_line(double* data, int n, long stride, const ThomasFactors& f,
                           std::vector<double>& rhs) {
    auto at = [&](int k) -> double& { return data[static_cast<long>(k) * stride]; };
    rhs[1] = at(1) - (1.0 / 6.0) * at(0);
    for (int i = 2; i <= n - 3; ++i) rhs[i] = at(i);
    rhs[n - 2] = at(n - 2) - (1.0 / 6.0) * at(n - 1);
    for (int i = 2; i <= n - 2; ++i) rhs[i] -= f.m[i] * rhs[i - 1];
    double next = rhs[n - 2] / f.diag[n - 2];
    at(n - 2) = next;
    for (int i = n - 3; i >= 1; --i) {
        next = (rhs[i] - (1.0 / 6.0) * next) / f.diag[i];
        at(i) = next;
    }
}

// --- integer ZNCC search -----------------------------------------------------

struct RefSubsetStats {
    std::vector<double> centered;  // f - f_mean, subset scan order
    double norm = 0.0;             // sqrt(sum (f - f_mean)^2)
};

inline RefSubsetStats ref_subset_stats(const Grid2<double>& ref, int cx, int cy, int half) {
    const int n = 2 * half + 1;
    RefSubsetStats st;
    st.centered.resize(static_cast<size_t>(n) * n);
    double sum = 0.0;
    for (int j = -half; j <= half; ++j)
        for (int i = -half; i <= half; ++i) sum += ref(cx + i, cy + j);
    const double mean = sum / (static_cast<double>(n) * n);
    double ss = 0.0;
    size_t k = 0;
    for (int j = -half; j <= half; ++j)
        for (int i = -half; i <= half; ++i) {
            const double c = ref(cx + i, cy + j) - mean;
            st.centered[k++] = c;
            ss += c * c;
        }
    if (ss < 1e-12) throw DegenerateSubsetError("reference subset has near-zero variance");
    st.norm = std::sqrt(ss);
    return st;
}

// ZNCC of the reference subset against `def` shifted by (dx, dy); NaN when the
// shifted subset leaves the image or is degenerate.
inline double zncc_at_offset(const RefSubsetStats& st, const Grid2<double>& def,
                             int cx, int cy, int half, int dx, int dy) {
    const int x0 = cx + dx, y0 = cy + dy;
    if (x0 - half < 0 || x0 + half >= def.w || y0 - half < 0 || y0 + half >= def.h)
        return std::nan("");
    const int n = 2 * half + 1;
    const double count = static_cast<double>(n) * n;
    double sg = 0.0, sgg = 0.0, sfg = 0.0;
    size_t k = 0;
    for (int j = -half; j <= half; ++j)
        for (int i = -half; i <= half; ++i) {
            const double g = def(x0 + i, y0 + j);
            sg += g;
            sgg += g * g;
            sfg += st.centered[k++] * g;
        }
    const double var = sgg - sg * sg / count;
    if (var < 1e-12) return std::nan("");
    return sfg / (st.norm * std::sqrt(var));
}

// First strictly-greatest finite entry wins; k is row-major over the window.
inline TranslationHit pick_best(const std::vector<double>& scores, int radius) {
    TranslationHit best;
    const int side = 2 * radius + 1;
    for (int k = 0; k < static_cast<int>(scores.size()); ++k) {
        const double s = scores[k];
        if (std::isnan(s)) continue;
        if (!best.found || s > best.zncc) {
            best.found = true;
            best.zncc = s;
            best.dx = k % side - radius;
            best.dy = k / side - radius;
        }
    }
    return best;
}

// --- rendering ---------------------------------------------------------------

struct RotationMap {
    double x0, ca, sa;
    // Inverse of the counterclockwise-positive image rotation about (x0, 0).
    inline void source(double x, double y, double& sx, double& sy) const {
        const double dx = x - x0;
        sx = x0 + ca * dx - sa * y;
        sy = sa * dx + ca * y;
    }
};

inline double render_pixel(const Interpolant& src, const RotationMap& map, double background,
                           int x, int y) {
    double sx, sy;
    map.source(static_cast<double>(x), static_cast<double>(y), sx, sy);
    const double fx = std::floor(sx), fy = std::floor(sy);
    if (sx == fx && sy == fy) {
        const int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
        if (src.source().in_bounds(ix, iy)) return src.source()(ix, iy);
    }
    if (src.in_domain(sx, sy)) {
        // clip spline overshoot to the sensor range
        const double v = src.value(sx, sy);
        return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    }
    return background;
}

// Gaussian blob with sigma = r / 1.2, cut at 4 sigma; the tail value is
// subtracted so the profile reaches zero continuously at the cutoff.
constexpr double kBlobSigmaFactor = 1.0 / 1.2;
constexpr double kBlobCutSigmas = 4.0;

struct BlobBins {
    int tile = 32;
    int tx = 0, ty = 0;
    std::vector<std::vector<int>> bins;
};

inline BlobBins bin_blobs(const std::vector<Blob>& blobs, int w, int h) {
    BlobBins b;
    b.tx = (w + b.tile - 1) / b.tile;
    b.ty = (h + b.tile - 1) / b.tile;
    b.bins.resize(static_cast<size_t>(b.tx) * b.ty);
    for (int i = 0; i < static_cast<int>(blobs.size()); ++i) {
        const double cut = kBlobCutSigmas * blobs[i].r * kBlobSigmaFactor;
        const int x0 = clampi(static_cast<int>(std::floor((blobs[i].x - cut) / b.tile)), 0, b.tx - 1);
        const int x1 = clampi(static_cast<int>(std::floor((blobs[i].x + cut) / b.tile)), 0, b.tx - 1);
        const int y0 = clampi(static_cast<int>(std::floor((blobs[i].y - cut) / b.tile)), 0, b.ty - 1);
        const int y1 = clampi(static_cast<int>(std::floor((blobs[i].y + cut) / b.tile)), 0, b.ty - 1);
        for (int ty = y0; ty <= y1; ++ty)
            for (int tx = x0; tx <= x1; ++tx)
                b.bins[static_cast<size_t>(ty) * b.tx + tx].push_back(i);
    }
    return b;
}

inline double speckle_pixel(const std::vector<Blob>& blobs, const BlobBins& bins,
                            double background, double amplitude, int x, int y) {
    const auto& list = bins.bins[static_cast<size_t>(y / bins.tile) * bins.tx + x / bins.tile];
    double acc = 0.0;
    for (int i : list) {
        const Blob& bl = blobs[i];
        const double dx = x - bl.x, dy = y - bl.y;
        const double d2 = dx * dx + dy * dy;
        const double sigma = bl.r * kBlobSigmaFactor;
        const double cut = kBlobCutSigmas * sigma;
        if (d2 > cut * cut) continue;
        const double tail = std::exp(-0.5 * kBlobCutSigmas * kBlobCutSigmas);
        acc += std::exp(-0.5 * d2 / (sigma * sigma)) - tail;
    }
    double v = background - amplitude * acc;
    return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
}

}  // namespace cdic::kernels::detail
