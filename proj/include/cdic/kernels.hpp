#pragma once

#include <cstdint>
#include <vector>

#include "cdic/grid.hpp"
#include "cdic/interpolant.hpp"

namespace cdic::kernels {

// Data-parallel inner loops of the engine. Every kernel here is an OpenMP
// parallel implementation with a serial *_ref twin that runs the identical
// per-element arithmetic; tests assert bitwise equality between the two and
// bench/ measures the speedup. All kernels are deterministic regardless of
// thread count.

void set_max_threads(int n);  // n <= 0 restores the OpenMP default
int max_threads();

// --- Prewitt gradients (normalized by 6, borders replicate nearest interior) ---
void prewitt(const Grid2<double>& src, Grid2<double>& fx, Grid2<double>& fy);
void prewitt_ref(const Grid2<double>& src, Grid2<double>& fx, Grid2<double>& fy);

// --- Cubic B-spline prefilter: rows then columns, natural end conditions ---
// In-place on a grid initialized with the image intensities. Requires w,h >= 4.
void bspline_prefilter(Grid2<double>& c);
void bspline_prefilter_ref(Grid2<double>& c);

// --- Exhaustive integer-translation ZNCC search -----------------------------
struct TranslationHit {
    int dx = 0, dy = 0;
    double zncc = -2.0;   // -2 marks "nothing evaluable"
    bool found = false;
};

// Scans offsets in [-radius, radius]^2, row-major; skips offsets whose shifted
// subset leaves `def` or has near-zero variance. Ties keep the first offset in
// scan order. Throws DegenerateSubsetError when the reference subset itself is
// degenerate.
TranslationHit zncc_search(const Grid2<double>& ref, const Grid2<double>& def,
                           int cx, int cy, int half, int radius);
TranslationHit zncc_search_ref(const Grid2<double>& ref, const Grid2<double>& def,
                               int cx, int cy, int half, int radius);

// --- Inverse-mapped rigid-rotation rendering --------------------------------
// For each output pixel, rotates its position by -alpha about (x0, 0) and
// samples `src`. Integer source positions inside the image copy the stored
// pixel exactly; fractional positions inside the spline domain interpolate;
// anything else gets `background`.
void render_rotation(const Interpolant& src, double x0, double alpha_deg,
                     double background, Grid2<double>& out);
void render_rotation_ref(const Interpolant& src, double x0, double alpha_deg,
                         double background, Grid2<double>& out);

// --- Speckle rasterization ---------------------------------------------------
struct Blob {
    double x = 0.0, y = 0.0, r = 1.0;
};

// Dark blobs on a light background: I = bg - (bg-fg) * sum exp(-ln2 (d/r)^4),
// clamped to [0,1]. Blob influence is cut off at 2.5 r.
void render_speckle(const std::vector<Blob>& blobs, double background,
                    double foreground, Grid2<double>& out);
void render_speckle_ref(const std::vector<Blob>& blobs, double background,
                        double foreground, Grid2<double>& out);

}  // namespace cdic::kernels
