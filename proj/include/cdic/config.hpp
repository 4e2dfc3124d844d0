#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cdic/crack.hpp"
#include "cdic/rgdic.hpp"

namespace cdic::config {

/// Flat key-value file with [section] headers and '#' comments. Order is
/// preserved for the manifest echo.
struct KeyValues {
    // (section, key) -> value; also kept in file order
    std::vector<std::pair<std::string, std::string>> order;  // "section.key"
    std::map<std::string, std::string> values;

    void set(const std::string& section, const std::string& key, const std::string& value);
    std::optional<std::string> get(const std::string& section, const std::string& key) const;
};

KeyValues parse_file(const std::string& path);
KeyValues parse_text(const std::string& text);

/// Applies "section.key=value" overrides (CLI flags win over file values).
void apply_overrides(KeyValues& kv, const std::vector<std::string>& overrides);

struct RunConfig {
    // [paths]
    std::string reference;
    std::string frames;      // glob or directory
    std::string frame_list;  // explicit ordered list file (alternative)
    std::string output;
    // [roi]
    int roi_x = 0, roi_y = 0, roi_w = 0, roi_h = 0;
    // [dic]
    int subset_half = 11;
    int step = 8;
    int shape_order = 1;
    double zncc_threshold = 0.7;
    double tolerance = 1e-6;
    int max_iterations = 50;
    int seed_search_radius = 50;
    std::vector<std::pair<int, int>> seeds_px;
    double mm_per_px = 0.0;  // 0 = absent
    int threads = 0;
    // [sequence]
    bool incremental = false;
    std::string update_mode = "trigger";  // trigger | interval
    int update_interval = 10;
    double trigger_mean_seed_zncc = 0.8;
    double trigger_invalid_fraction = 0.1;
    std::string composition = "displaced";  // displaced | literal
    double fps = 4.0;
    // [crack]
    bool crack_enabled = false;
    std::string orientation = "vertical";  // vertical | horizontal
    std::string delta_c_mode = "determine";
    double delta_c = 0.0;  // used when delta_c_mode == "value"
    int prepeak_frame = -1;
    std::string load_history;
    std::vector<double> lx_grid, ly_grid;  // mm
    double noise_floor_mm = 1e-4;
    int band_begin = -1, band_end = -1;  // grid rows; -1 = full range

    std::vector<std::string> warnings;
};

/// Typed parse with field-level error messages; throws ConfigError.
RunConfig load_run_config(const KeyValues& kv);

/// Image-dependent checks: ROI inside the image minus the subset margin,
/// seeds on the grid and inside the ROI. Returns grid and seeds.
std::pair<RoiGrid, SeedSpec> resolve_grid(const RunConfig& cfg, int img_w, int img_h);

crack::Orientation parse_orientation(const std::string& s);

/// "a:step:b" inclusive range or ";"-separated values, in mm.
std::vector<double> parse_grid_spec(const std::string& spec, const std::string& field);

/// Ordered deformed-frame paths from `frames` (glob/directory, lexicographic,
/// ambiguous numeric orderings rejected) or `frame_list` (explicit order).
std::vector<std::string> expand_frames(const RunConfig& cfg);

/// Config echo (same format load_run_config accepts) plus a [run] section.
std::string manifest_text(const KeyValues& kv,
                          const std::vector<std::pair<std::string, std::string>>& run_keys);

}  // namespace cdic::config
