#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cdic/crack.hpp"
#include "cdic/image.hpp"
#include "cdic/rgdic.hpp"
#include "cdic/synthetic.hpp"

namespace cdic::io {

/// Formats a double so it parses back to the identical bits ("%.17g").
std::string fmt(double v);

// --- images ------------------------------------------------------------------

/// 8/16-bit grayscale PNG or TIFF; RGB converted by 0.299 R + 0.587 G + 0.114 B.
GrayImage load_image(const std::string& path, std::optional<double> mm_per_px = {});

/// 8-bit grayscale PNG from normalized intensities.
void save_png(const GrayImage& img, const std::string& path);

/// Deformed frame with markers drawn in red at the given pixel positions.
void save_overlay_png(const GrayImage& base, const std::vector<Vec2>& red_px,
                      const std::string& path);

// --- displacement fields -------------------------------------------------------

void write_field_csv(const DisplacementField& field, std::optional<double> mm_per_px,
                     const std::string& path);

// Compact binary grid: 32-byte header (magic "DICF", version, step, nx, ny,
// origin, scale as f64), then row-major u, v, zncc (f64) and valid (u8).
void write_field_dicf(const DisplacementField& field, std::optional<double> mm_per_px,
                      const std::string& path);
DisplacementField read_field_dicf(const std::string& path);

// --- benchmark ----------------------------------------------------------------

void write_benchmark_csv(const std::vector<synthetic::BenchmarkRow>& rows,
                         const std::string& path);
void write_benchmark_svg(const std::vector<synthetic::BenchmarkRow>& rows,
                         const std::string& path);

// --- crack reports --------------------------------------------------------------

struct CrackFrameSummary {
    int frame = 0;
    double time_s = 0.0;
    bool tip_found = false;
    double tip_x_mm = 0.0, tip_y_mm = 0.0;
    int n_edge_points = 0;
    double speed_mm_s = 0.0;  // NaN until two tips are located
};

void write_crack_report_csv(const std::vector<CrackFrameSummary>& rows, double delta_c_mm,
                            double mean_speed_mm_s, const std::string& path);
void write_edges_csv(const crack::EdgeSet& edges, const std::string& path);
void write_ctod_grid_csv(const std::vector<double>& lx_mm, const std::vector<double>& ly_mm,
                         const Grid2<double>& ctod, const std::string& path);

// --- load history ----------------------------------------------------------------

struct LoadSample {
    double time_s = 0.0;
    double load_kn = 0.0;
    double displacement_mm = 0.0;
};

/// CSV with columns time_s, load_kN, displacement_mm (header optional).
std::vector<LoadSample> read_load_history(const std::string& path);

/// Index of the last sample strictly before the peak load.
int last_prepeak_index(const std::vector<LoadSample>& history);

// --- generic csv ------------------------------------------------------------------

std::vector<std::vector<std::string>> read_csv(const std::string& path);

}  // namespace cdic::io
