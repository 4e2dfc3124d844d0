#pragma once

// Independent reference implementations used to freeze expected values in the
// tests. These deliberately avoid the library's computation paths.

#include <cmath>
#include <random>
#include <vector>

#include "cdic/grid.hpp"
#include "cdic/image.hpp"

namespace oracle {

using cdic::Grid2;
using cdic::GrayImage;

// --- brute-force 3x3 Prewitt (interior pixels; normalized by 6) --------------

inline double prewitt_fx_at(const Grid2<double>& s, int x, int y) {
    static const double kx[3][3] = {{-1, 0, 1}, {-1, 0, 1}, {-1, 0, 1}};
    double acc = 0.0;
    for (int j = -1; j <= 1; ++j)
        for (int i = -1; i <= 1; ++i) acc += kx[j + 1][i + 1] * s(x + i, y + j);
    return acc / 6.0;
}

inline double prewitt_fy_at(const Grid2<double>& s, int x, int y) {
    static const double ky[3][3] = {{-1, -1, -1}, {0, 0, 0}, {1, 1, 1}};
    double acc = 0.0;
    for (int j = -1; j <= 1; ++j)
        for (int i = -1; i <= 1; ++i) acc += ky[j + 1][i + 1] * s(x + i, y + j);
    return acc / 6.0;
}

// Direct double-loop mean intensity gradient on native code values, with the
// same border replication rule.
inline double mig_direct(const GrayImage& img) {
    const auto& s = img.px;
    auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };
    double sum = 0.0;
    for (int y = 0; y < s.h; ++y)
        for (int x = 0; x < s.w; ++x) {
            const int cx = clampi(x, 1, s.w - 2), cy = clampi(y, 1, s.h - 2);
            const double fx = prewitt_fx_at(s, cx, cy) * img.code_max;
            const double fy = prewitt_fy_at(s, cx, cy) * img.code_max;
            sum += std::sqrt(fx * fx + fy * fy);
        }
    return sum / (static_cast<double>(s.w) * s.h);
}

// --- textbook natural bicubic spline (row splines, then a column spline) -----

struct Spline1D {
    std::vector<double> y, y2;

    void build(const std::vector<double>& values) {
        y = values;
        const int n = static_cast<int>(y.size());
        y2.assign(n, 0.0);
        std::vector<double> u(n, 0.0);
        for (int i = 1; i < n - 1; ++i) {
            const double p = 0.5 * y2[i - 1] + 2.0;
            y2[i] = -0.5 / p;
            u[i] = (y[i + 1] - 2.0 * y[i] + y[i - 1]) * 3.0;
            u[i] = (u[i] - 0.5 * u[i - 1]) / p;
        }
        for (int i = n - 2; i >= 1; --i) y2[i] = y2[i] * y2[i + 1] + u[i];
    }

    double eval(double x) const {
        const int n = static_cast<int>(y.size());
        int k = static_cast<int>(std::floor(x));
        if (k < 0) k = 0;
        if (k > n - 2) k = n - 2;
        const double b = x - k, a = 1.0 - b;
        return a * y[k] + b * y[k + 1] +
               ((a * a * a - a) * y2[k] + (b * b * b - b) * y2[k + 1]) / 6.0;
    }
};

inline double bicubic_direct(const Grid2<double>& img, double x, double y) {
    std::vector<double> col(static_cast<size_t>(img.h));
    std::vector<double> row(static_cast<size_t>(img.w));
    Spline1D s;
    for (int j = 0; j < img.h; ++j) {
        for (int i = 0; i < img.w; ++i) row[static_cast<size_t>(i)] = img(i, j);
        s.build(row);
        col[static_cast<size_t>(j)] = s.eval(x);
    }
    Spline1D sc;
    sc.build(col);
    return sc.eval(y);
}

// --- naive Eq.-1 / Eq.-2 style sums ------------------------------------------

inline double znssd_direct(const std::vector<double>& f, const std::vector<double>& g) {
    const double n = static_cast<double>(f.size());
    double fm = 0, gm = 0;
    for (size_t i = 0; i < f.size(); ++i) {
        fm += f[i];
        gm += g[i];
    }
    fm /= n;
    gm /= n;
    double fs = 0, gs = 0;
    for (size_t i = 0; i < f.size(); ++i) {
        fs += (f[i] - fm) * (f[i] - fm);
        gs += (g[i] - gm) * (g[i] - gm);
    }
    double c = 0;
    for (size_t i = 0; i < f.size(); ++i) {
        const double r = (f[i] - fm) / std::sqrt(fs) - (g[i] - gm) / std::sqrt(gs);
        c += r * r;
    }
    return c;
}

inline double zncc_direct(const std::vector<double>& f, const std::vector<double>& g) {
    const double n = static_cast<double>(f.size());
    double fm = 0, gm = 0;
    for (size_t i = 0; i < f.size(); ++i) {
        fm += f[i];
        gm += g[i];
    }
    fm /= n;
    gm /= n;
    double fs = 0, gs = 0, x = 0;
    for (size_t i = 0; i < f.size(); ++i) {
        fs += (f[i] - fm) * (f[i] - fm);
        gs += (g[i] - gm) * (g[i] - gm);
        x += (f[i] - fm) * (g[i] - gm);
    }
    return x / (std::sqrt(fs) * std::sqrt(gs));
}

// --- rigid rotation about (x0, 0), counterclockwise-positive image sense ------

inline cdic::Vec2 rotation_direct(double x0, double alpha_deg, double x, double y) {
    const double a = alpha_deg * 3.14159265358979323846 / 180.0;
    const double dx = x - x0;
    const double nx = dx * std::cos(a) + y * std::sin(a);
    const double ny = -dx * std::sin(a) + y * std::cos(a);
    return {nx - dx, ny - y};
}

// --- random test images --------------------------------------------------------

inline GrayImage random_image(int w, int h, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    GrayImage img(w, h);
    for (double& v : img.px.v) v = dist(rng);
    return img;
}

// Smooth random image: uniform noise blurred with a few box passes, so that
// subpixel matching has realistic content.
inline GrayImage smooth_random_image(int w, int h, uint64_t seed, int passes = 2) {
    GrayImage img = random_image(w, h, seed);
    for (int p = 0; p < passes; ++p) {
        Grid2<double> out(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                int n = 0;
                for (int j = -1; j <= 1; ++j)
                    for (int i = -1; i <= 1; ++i) {
                        const int xx = x + i, yy = y + j;
                        if (xx < 0 || xx >= w || yy < 0 || yy >= h) continue;
                        acc += img.px(xx, yy);
                        ++n;
                    }
                out(x, y) = acc / n;
            }
        img.px = out;
    }
    return img;
}

}  // namespace oracle
