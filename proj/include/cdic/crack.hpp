#pragma once

#include <optional>
#include <vector>

#include "cdic/grid.hpp"
#include "cdic/rgdic.hpp"

namespace cdic::crack {

/// Crack-plane orientation: Vertical cracks open in x (u differenced along x),
/// horizontal cracks open in y (v differenced along y).
enum class Orientation { Vertical, Horizontal };

/// Relative displacement between neighboring correlation points, in mm.
/// One column (vertical) or one row (horizontal) narrower than the source
/// grid; entries are defined only where both contributing points are valid.
struct RelativeDisplacementField {
    Orientation orientation = Orientation::Vertical;
    RoiGrid grid;            // source correlation grid
    double mm_per_px = 0.0;
    Grid2<double> rel;       // mm
    Grid2<uint8_t> defined;
};

RelativeDisplacementField relative_displacement(const DisplacementField& field,
                                                Orientation orientation, double mm_per_px);

struct CrackTip {
    bool found = false;
    double x_mm = 0.0, y_mm = 0.0;   // reference-image coordinates
    int frame = 0;
    double confidence_mm = 0.0;      // spread of the per-profile abscissas
    bool low_confidence = false;
    int opening_dir = +1;  // +1: opening grows toward +y (vertical) / +x (horizontal)
};

/// Locates the crack tip from displacement profiles perpendicular to the
/// crack plane. Each profile's two flanks are fit with least-squares lines;
/// the tip abscissa is the robust center (median) of the per-profile
/// intersection abscissas, and the tip ordinate comes from where the fitted
/// opening closes (falling back to just beyond the last opened profile for
/// rigid openings). Profiles without a discontinuity signature above
/// noise_floor_mm are ignored; none at all yields found = false.
CrackTip locate_crack_tip(const DisplacementField& field, Orientation orientation,
                          int band_begin, int band_end, double mm_per_px,
                          double noise_floor_mm = 1e-4);

/// Signed crack-tip opening displacement for reference points offset by
/// (lx_mm, ly_mm) from the tip: positive means opening. Field values are
/// sampled bilinearly; probes over invalid regions throw ProbeError.
double measure_ctod(const DisplacementField& field, const CrackTip& tip, double lx_mm,
                    double ly_mm, Orientation orientation, double mm_per_px);

struct DeltaCResult {
    double delta_c = 0.0;             // mm, median CTOD over the plateau
    double onset_lx = 0.0, onset_ly = 0.0;
    int lx_begin = 0, lx_end = 0;     // plateau index range, inclusive
    int ly_begin = 0, ly_end = 0;
    Grid2<double> ctod;               // full probe grid (NaN where unprobeable)
};

/// Sweeps measure_ctod over the probe grids and finds the largest contiguous
/// sub-grid (at least 3x3) whose max/min CTOD ratio stays within 1.05; the
/// critical CTOD is the median over that region. Throws NoPlateauError (with
/// the probe-grid dump) when no such region exists.
DeltaCResult determine_delta_c(const DisplacementField& field, const CrackTip& tip,
                               const std::vector<double>& lx_grid_mm,
                               const std::vector<double>& ly_grid_mm,
                               Orientation orientation, double mm_per_px,
                               double plateau_ratio = 1.05, int min_size = 3);

struct EdgePoint {
    int ix = 0, iy = 0;      // grid indices of the correlation point
    int side = 0;            // 0 = left/top flank, 1 = right/bottom flank
    double ref_x_px = 0.0, ref_y_px = 0.0;
    double def_x_px = 0.0, def_y_px = 0.0;
    double opening_mm = 0.0;
};

struct EdgeSet {
    Orientation orientation = Orientation::Vertical;
    RoiGrid grid;
    double mm_per_px = 0.0;
    int frame = 0;
    std::vector<std::pair<int, int>> cells;  // flagged relative-displacement cells
    std::vector<EdgePoint> points;
};

/// Flags every relative-displacement entry >= delta_c and emits the two
/// contributing correlation points in reference and deformed coordinates.
EdgeSet detect_crack_edges(const RelativeDisplacementField& rel, double delta_c_mm,
                           const DisplacementField& field);

/// Tip from a frame's edge set: topmost 8-connected component (components of
/// fewer than 3 cells are noise), flank lines through each side's top 5
/// points, tip at their intersection; falls back to the midpoint of the
/// topmost edge pair for short or parallel flanks.
std::optional<CrackTip> tip_from_edges(const EdgeSet& edges);

struct TipTrack {
    std::vector<std::optional<CrackTip>> tips;  // one per frame
    std::vector<double> interval_speeds_mm_s;   // between consecutive located tips
    double mean_speed_mm_s = 0.0;
};

/// Tracks the tip across frames and reports the mean propagation speed along
/// the crack plane. Throws when fewer than two tips can be located.
TipTrack track_tip_and_speed(const std::vector<EdgeSet>& frames,
                             const std::vector<double>& timestamps_s);

/// The paper-recommended sampling guard: spatial resolution should be at
/// least delta_c / 3 per pixel.
inline bool resolution_too_coarse(double mm_per_px, double delta_c_mm) {
    return mm_per_px > delta_c_mm / 3.0;
}

}  // namespace cdic::crack
