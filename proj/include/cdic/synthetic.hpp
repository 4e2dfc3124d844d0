#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cdic/image.hpp"
#include "cdic/rgdic.hpp"

namespace cdic::synthetic {

/// Rigid counterclockwise rotation by alpha about the edge point (x0, 0).
struct RotationField {
    double x0 = 0.0;
    double alpha_deg = 0.0;
};

/// Displacement (u_x, u_y) of the pixel at (x, y), y > 0. Exactly the
/// angle-sum form; throws OutOfDomainError at y = 0 with x != x0 where the
/// inverse tangent is undefined, and returns (0, 0) at the center itself.
Vec2 eval_rotation(const RotationField& field, double x, double y);

struct SpeckleSpec {
    int width = 1024, height = 1024;
    int count = 8000;
    double radius_mean = 3.0;
    double radius_spread = 0.5;
    double background = 1.0;
    double foreground = 0.0;
    uint64_t rng_seed = 1;
    double mig_floor = 20.0;
    int max_attempts = 20;
};

struct SpeckleResult {
    GrayImage image;
    double mig = 0.0;
    int attempts = 1;
};

/// Random quartic-falloff blobs on a plain background. Same seed, same image,
/// bit for bit. Re-rolls the RNG seed until the mean intensity gradient
/// reaches spec.mig_floor; throws after spec.max_attempts tries.
SpeckleResult generate_speckle(const SpeckleSpec& spec);

/// Inverse-mapped rendering of the rotated image; source positions outside
/// the reference get `background`.
GrayImage render_deformed(const GrayImage& ref, const RotationField& field,
                          double background = 1.0);

enum class Mode { OneSeed, MultiSeed, IncrementalMultiSeed };

std::string mode_name(Mode m);

struct BenchmarkOptions {
    int frames = 50;
    double alpha_max_deg = 15.0;
    std::vector<Mode> modes = {Mode::OneSeed, Mode::MultiSeed, Mode::IncrementalMultiSeed};
    int roi_w = 640, roi_h = 824;  // centered; clamped to fit small images
    int subset_half = 11;
    int step = 8;
    int seed_radius = 50;
    int update_interval = 10;     // fixed-interval reference updates
    double zncc_accept = 0.7;
    double tol = 1e-6;
    int max_iter = 50;
    // Called once per rendered frame (0 = reference) before the analyses run.
    std::function<void(int, const GrayImage&)> frame_sink;
};

struct BenchmarkRow {
    Mode mode;
    int frame = 0;              // 1-based deformed frame
    double alpha_deg = 0.0;
    double mae_x = 0.0, mae_y = 0.0;            // NaN when the frame failed
    double strict_x = 0.0, strict_y = 0.0;      // invalid points at 10 px
    int n_valid = 0, n_invalid = 0;
    bool frame_failed = false;
};

/// Rotation-sequence benchmark against the analytic field: renders
/// `frames` deformed images with alpha up to alpha_max_deg, runs each
/// requested mode over the centered ROI, and reports per-frame MAE.
std::vector<BenchmarkRow> run_benchmark(const GrayImage& reference,
                                        const BenchmarkOptions& opts);

/// Metric for mode-ordering comparisons: MAE over valid points, or the 10 px
/// invalid penalty when a frame produced nothing valid.
inline double ordering_metric_x(const BenchmarkRow& r) {
    return (r.frame_failed || r.n_valid == 0) ? 10.0 : r.mae_x;
}

/// The ROI and seed layout the benchmark uses (exposed for tests/CLI).
RoiGrid benchmark_grid(const GrayImage& reference, const BenchmarkOptions& opts);
SeedSpec benchmark_seeds(const RoiGrid& grid, Mode mode, int seed_radius);

}  // namespace cdic::synthetic
