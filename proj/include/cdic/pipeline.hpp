#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cdic/synthetic.hpp"

namespace cdic::pipeline {

// Exit codes shared by all commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitQuality = 1;      // mig below the quality floor
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCorrelation = 3;
inline constexpr int kExitNoPlateau = 4;

struct MigOptions {
    std::string image;
    double floor = 20.0;
};
int cmd_mig(const MigOptions& opts);

struct SynthOptions {
    std::string out_dir;
    int frames = 50;
    double alpha_max_deg = 15.0;
    std::vector<std::string> modes;  // empty = all three
    int size = 1024;
    int speckles = 8000;
    double radius = 3.0;
    uint64_t rng_seed = 1;
    int subset_half = 11;
    int step = 8;
    int update_interval = 10;
    int threads = 0;
    bool svg = false;
    bool write_frames = true;
};
int cmd_synth(const SynthOptions& opts);

struct RunOptions {
    std::string config_path;
    std::vector<std::string> overrides;  // section.key=value
    int threads = -1;                    // -1 = from config
};
int cmd_analyze(const RunOptions& opts);
int cmd_crack(const RunOptions& opts);

}  // namespace cdic::pipeline
