#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cdic/correlation.hpp"
#include "cdic/grid.hpp"
#include "cdic/image.hpp"
#include "cdic/interpolant.hpp"

namespace cdic {

/// Evenly spaced correlation-point grid over a region of interest.
struct RoiGrid {
    int x0 = 0, y0 = 0;   // pixel origin
    int w = 0, h = 0;     // extent in pixels
    int step = 1;         // pixels between correlation points

    int nx() const { return w / step; }
    int ny() const { return h / step; }
    int pixel_x(int ix) const { return x0 + ix * step; }
    int pixel_y(int iy) const { return y0 + iy * step; }
};

/// Throws unless step >= 1, the grid is non-empty, and every grid point's
/// subset (plus interpolation margin) fits inside a img_w x img_h image.
void validate_grid(const RoiGrid& grid, int subset_half, int img_w, int img_h);

struct Seed {
    int ix = 0, iy = 0;       // grid indices
    int search_radius = 50;   // integer-search radius in pixels
};

struct SeedSpec {
    std::vector<Seed> seeds;
};

void validate_seeds(const SeedSpec& seeds, const RoiGrid& grid);

/// Queue audit hook; used by tests to check the reliability-guided pop order.
struct QueueEvent {
    enum class Type { Push, Pop } type;
    double zncc;
    int ix, iy;
};

struct AnalysisConfig {
    int subset_half = 11;
    int shape_order = 1;
    double zncc_accept = 0.7;
    double tol = 1e-6;
    int max_iter = 50;
    std::function<void(const QueueEvent&)> observer;  // optional
};

/// Full-field result on a RoiGrid. Invalid points hold NaN displacements and
/// must not be read as zero; `origin` records the flat grid index of the point
/// whose warp seeded each computation (or the point itself for seeds, -1 for
/// untouched points).
struct DisplacementField {
    RoiGrid grid;
    int frame_index = 0;
    int reference_frame = 0;
    std::optional<double> mm_per_px;
    Grid2<double> u, v, zncc;
    Grid2<uint8_t> valid;
    Grid2<int32_t> origin;

    int n_valid() const;
    int n_points() const { return grid.nx() * grid.ny(); }
    double invalid_fraction() const;
};

DisplacementField make_empty_field(const RoiGrid& grid);

/// Reliability-guided flood fill from the seeds over one image pair.
/// Throws FrameFailureError when every seed fails.
DisplacementField analyze_frame(const Interpolant& ref, const Interpolant& def,
                                const RoiGrid& grid, const SeedSpec& seeds,
                                const AnalysisConfig& cfg);
DisplacementField analyze_frame(const GrayImage& ref, const GrayImage& def,
                                const RoiGrid& grid, const SeedSpec& seeds,
                                const AnalysisConfig& cfg);

struct IncrementalOptions {
    bool enabled = false;
    enum class Update { Interval, Trigger } update = Update::Trigger;
    int interval = 10;
    double trigger_seed_zncc = 0.8;
    double trigger_invalid_fraction = 0.1;
    enum class Composition { Displaced, Literal } composition = Composition::Displaced;
};

struct FrameOutcome {
    DisplacementField field;       // expressed against frame 0
    bool failed = false;           // every seed failed on this leg
    int leg_reference = 0;         // reference frame the leg correlated against
    double mean_seed_zncc = 0.0;
    double leg_invalid_fraction = 1.0;
};

/// Reference-update bookkeeping for an incremental run.
struct IncrementalChain {
    std::vector<int> update_frames;  // strictly increasing, starts with 0
};

struct SequenceResult {
    std::vector<FrameOutcome> frames;  // one per deformed frame (index 1..n-1)
    IncrementalChain chain;
};

/// Correlates frames 1..n-1 against frame 0, optionally re-basing the
/// reference mid-sequence and composing displacements so that returned fields
/// are always expressed against frame 0.
SequenceResult analyze_sequence(int n_frames, const std::function<GrayImage(int)>& frame_at,
                                const RoiGrid& grid, const SeedSpec& seeds,
                                const AnalysisConfig& cfg, const IncrementalOptions& inc);
SequenceResult analyze_sequence(const std::vector<GrayImage>& frames, const RoiGrid& grid,
                                const SeedSpec& seeds, const AnalysisConfig& cfg,
                                const IncrementalOptions& inc);

struct MaeResult {
    double x = 0.0, y = 0.0;          // over valid points
    double strict_x = 0.0, strict_y = 0.0;  // invalid points counted at 10 px
    int n_valid = 0, n_invalid = 0;
};

/// Mean absolute error against an analytic ground-truth field evaluated at
/// grid pixel coordinates. Throws NoValidPointsError when nothing is valid.
MaeResult mae(const DisplacementField& field,
              const std::function<Vec2(double, double)>& truth);

}  // namespace cdic
