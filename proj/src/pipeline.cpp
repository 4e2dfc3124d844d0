#include "cdic/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

#include "cdic/config.hpp"
#include "cdic/crack.hpp"
#include "cdic/errors.hpp"
#include "cdic/io.hpp"
#include "cdic/kernels.hpp"

namespace fs = std::filesystem;

namespace cdic::pipeline {

namespace {

std::string frame_tag(int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d", i);
    return buf;
}

double field_mean_zncc(const DisplacementField& f) {
    double sum = 0.0;
    int n = 0;
    for (int iy = 0; iy < f.grid.ny(); ++iy)
        for (int ix = 0; ix < f.grid.nx(); ++ix)
            if (f.valid(ix, iy)) {
                sum += f.zncc(ix, iy);
                ++n;
            }
    return n ? sum / n : 0.0;
}

}  // namespace

int cmd_mig(const MigOptions& opts) {
    GrayImage img;
    try {
        img = io::load_image(opts.image);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    const double mig = mean_intensity_gradient(img);
    std::printf("MIG %.2f\n", mig);
    if (mig < opts.floor) {
        std::fprintf(stderr,
                     "warning: mean intensity gradient %.2f is below the quality floor %.2f; "
                     "the speckle pattern is unlikely to correlate well\n",
                     mig, opts.floor);
        return kExitQuality;
    }
    return kExitOk;
}

int cmd_synth(const SynthOptions& opts) {
    try {
        kernels::set_max_threads(opts.threads);
        fs::create_directories(opts.out_dir);
        const fs::path out(opts.out_dir);

        synthetic::SpeckleSpec spec;
        spec.width = spec.height = opts.size;
        spec.count = opts.speckles;
        spec.radius_mean = opts.radius;
        spec.rng_seed = opts.rng_seed;
        const synthetic::SpeckleResult speckle = synthetic::generate_speckle(spec);
        std::printf("speckle MIG %.2f (attempt %d)\n", speckle.mig, speckle.attempts);

        synthetic::BenchmarkOptions bopts;
        bopts.frames = opts.frames;
        bopts.alpha_max_deg = opts.alpha_max_deg;
        bopts.subset_half = opts.subset_half;
        bopts.step = opts.step;
        bopts.update_interval = opts.update_interval;
        if (!opts.modes.empty()) {
            bopts.modes.clear();
            for (const std::string& m : opts.modes) {
                if (m == "one-seed") bopts.modes.push_back(synthetic::Mode::OneSeed);
                else if (m == "multi-seed") bopts.modes.push_back(synthetic::Mode::MultiSeed);
                else if (m == "incremental-multi-seed")
                    bopts.modes.push_back(synthetic::Mode::IncrementalMultiSeed);
                else
                    throw ConfigError("unknown mode '" + m +
                                      "' (one-seed, multi-seed, incremental-multi-seed)");
            }
        }
        if (opts.write_frames) {
            fs::create_directories(out / "frames");
            bopts.frame_sink = [&](int i, const GrayImage& img) {
                io::save_png(img, (out / "frames" / ("frame_" + frame_tag(i) + ".png")).string());
            };
        }

        const auto rows = synthetic::run_benchmark(speckle.image, bopts);
        io::write_benchmark_csv(rows, (out / "benchmark.csv").string());
        if (opts.svg) io::write_benchmark_svg(rows, (out / "mae.svg").string());

        for (const auto mode : bopts.modes) {
            double worst = 0.0;
            int failed = 0;
            for (const auto& r : rows)
                if (r.mode == mode) {
                    if (r.frame_failed || std::isnan(r.mae_x)) ++failed;
                    else worst = std::max(worst, r.mae_x);
                }
            std::printf("%-24s worst MAE_x %.4f px, failed frames %d/%d\n",
                        synthetic::mode_name(mode).c_str(), worst, failed, opts.frames);
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
}

namespace {

struct PreparedRun {
    config::KeyValues kv;
    config::RunConfig cfg;
    GrayImage reference;
    std::vector<std::string> frame_paths;
    RoiGrid grid;
    SeedSpec seeds;
    AnalysisConfig acfg;
    IncrementalOptions inc;
    fs::path out;
};

PreparedRun prepare(const RunOptions& opts, bool force_crack) {
    PreparedRun r;
    r.kv = config::parse_file(opts.config_path);
    config::apply_overrides(r.kv, opts.overrides);
    if (force_crack && !r.kv.get("crack", "enabled")) r.kv.set("crack", "enabled", "on");
    r.cfg = config::load_run_config(r.kv);
    for (const std::string& w : r.cfg.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

    if (opts.threads >= 0) r.cfg.threads = opts.threads;
    kernels::set_max_threads(r.cfg.threads);

    std::optional<double> scale;
    if (r.cfg.mm_per_px > 0.0) scale = r.cfg.mm_per_px;
    r.reference = io::load_image(r.cfg.reference, scale);
    r.frame_paths = config::expand_frames(r.cfg);
    std::tie(r.grid, r.seeds) = config::resolve_grid(r.cfg, r.reference.width(),
                                                     r.reference.height());

    r.acfg.subset_half = r.cfg.subset_half;
    r.acfg.shape_order = r.cfg.shape_order;
    r.acfg.zncc_accept = r.cfg.zncc_threshold;
    r.acfg.tol = r.cfg.tolerance;
    r.acfg.max_iter = r.cfg.max_iterations;

    r.inc.enabled = r.cfg.incremental;
    r.inc.update = r.cfg.update_mode == "interval" ? IncrementalOptions::Update::Interval
                                                   : IncrementalOptions::Update::Trigger;
    r.inc.interval = r.cfg.update_interval;
    r.inc.trigger_seed_zncc = r.cfg.trigger_mean_seed_zncc;
    r.inc.trigger_invalid_fraction = r.cfg.trigger_invalid_fraction;
    r.inc.composition = r.cfg.composition == "literal"
                            ? IncrementalOptions::Composition::Literal
                            : IncrementalOptions::Composition::Displaced;

    r.out = fs::path(r.cfg.output);
    fs::create_directories(r.out);
    return r;
}

SequenceResult run_analysis(PreparedRun& r) {
    const int n_frames = static_cast<int>(r.frame_paths.size()) + 1;
    std::optional<double> scale;
    if (r.cfg.mm_per_px > 0.0) scale = r.cfg.mm_per_px;

    auto frame_at = [&](int i) -> GrayImage {
        if (i == 0) return r.reference;
        return io::load_image(r.frame_paths[static_cast<size_t>(i - 1)], scale);
    };
    SequenceResult seq = analyze_sequence(n_frames, frame_at, r.grid, r.seeds, r.acfg, r.inc);

    std::vector<std::pair<std::string, std::string>> run_keys;
    run_keys.emplace_back("frames_analyzed", std::to_string(seq.frames.size()));
    std::string updates;
    for (int u : seq.chain.update_frames) updates += (updates.empty() ? "" : ";") + std::to_string(u);
    run_keys.emplace_back("reference_updates", updates);

    std::ofstream report(r.out / "run_report.csv");
    report << "frame,file,failed,leg_reference,mean_seed_zncc,mean_zncc,valid_count,"
              "invalid_count\n";
    for (size_t k = 0; k < seq.frames.size(); ++k) {
        const FrameOutcome& o = seq.frames[k];
        const int i = static_cast<int>(k) + 1;
        io::write_field_csv(o.field, scale, (r.out / ("field_" + frame_tag(i) + ".csv")).string());
        io::write_field_dicf(o.field, scale, (r.out / ("field_" + frame_tag(i) + ".dicf")).string());
        const int nvalid = o.field.n_valid();
        report << i << ',' << r.frame_paths[k] << ',' << (o.failed ? 1 : 0) << ','
               << o.leg_reference << ',' << io::fmt(o.mean_seed_zncc) << ','
               << io::fmt(field_mean_zncc(o.field)) << ',' << nvalid << ','
               << (o.field.n_points() - nvalid) << '\n';
        run_keys.emplace_back("frame_" + frame_tag(i) + "_mean_zncc",
                              io::fmt(field_mean_zncc(o.field)));
        run_keys.emplace_back("frame_" + frame_tag(i) + "_invalid",
                              std::to_string(o.field.n_points() - nvalid));
    }
    std::ofstream manifest(r.out / "manifest.cfg");
    manifest << config::manifest_text(r.kv, run_keys);
    return seq;
}

}  // namespace

int cmd_analyze(const RunOptions& opts) {
    try {
        PreparedRun r = prepare(opts, false);
        const SequenceResult seq = run_analysis(r);
        int failed = 0;
        for (const auto& o : seq.frames) failed += o.failed;
        std::printf("analyzed %zu frames, %d failed; outputs in %s\n", seq.frames.size(),
                    failed, r.out.string().c_str());
        if (failed == static_cast<int>(seq.frames.size())) {
            std::fprintf(stderr, "error: every frame failed to correlate\n");
            return kExitCorrelation;
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitConfig;
    } catch (const FrameFailureError& e) {
        std::fprintf(stderr, "correlation error: %s\n", e.what());
        return kExitCorrelation;
    }
}

int cmd_crack(const RunOptions& opts) {
    try {
        PreparedRun r = prepare(opts, true);
        const double scale = r.cfg.mm_per_px;
        const crack::Orientation orient = config::parse_orientation(r.cfg.orientation);
        const int n = static_cast<int>(r.frame_paths.size());

        // reuse fields from a previous analyze run when they are all present
        bool have_fields = true;
        for (int i = 1; i <= n && have_fields; ++i)
            have_fields = fs::exists(r.out / ("field_" + frame_tag(i) + ".dicf"));
        if (!have_fields) {
            std::printf("displacement fields not found in %s; running analysis first\n",
                        r.out.string().c_str());
            run_analysis(r);
        }
        std::vector<DisplacementField> fields;
        for (int i = 1; i <= n; ++i) {
            fields.push_back(io::read_field_dicf((r.out / ("field_" + frame_tag(i) + ".dicf")).string()));
            fields.back().frame_index = i;
        }

        std::vector<double> timestamps;
        for (int i = 1; i <= n; ++i) timestamps.push_back(i / r.cfg.fps);

        // critical CTOD
        double delta_c = r.cfg.delta_c;
        if (r.cfg.delta_c_mode == "determine") {
            int prepeak = r.cfg.prepeak_frame;
            if (!r.cfg.load_history.empty()) {
                const auto hist = io::read_load_history(r.cfg.load_history);
                const double t_pre = hist[static_cast<size_t>(io::last_prepeak_index(hist))].time_s;
                prepeak = static_cast<int>(std::floor(t_pre * r.cfg.fps + 1e-9));
            }
            if (prepeak < 1 || prepeak > n)
                throw ConfigError("[crack] determining delta_c needs prepeak_frame in 1.." +
                                  std::to_string(n) + " or a load_history file");
            if (r.cfg.lx_grid.empty() || r.cfg.ly_grid.empty())
                throw ConfigError("[crack] lx_grid and ly_grid are required to determine delta_c");

            const DisplacementField& pf = fields[static_cast<size_t>(prepeak - 1)];
            const int ny = pf.grid.ny();
            const int band_begin = r.cfg.band_begin >= 0 ? r.cfg.band_begin : 0;
            const int band_end = r.cfg.band_end >= 0 ? r.cfg.band_end : ny;
            const crack::CrackTip tip = crack::locate_crack_tip(pf, orient, band_begin, band_end,
                                                                scale, r.cfg.noise_floor_mm);
            if (!tip.found) {
                std::fprintf(stderr,
                             "error: no crack-opening signature on pre-peak frame %d; "
                             "delta_c cannot be determined\n",
                             prepeak);
                return kExitNoPlateau;
            }
            try {
                const crack::DeltaCResult dc = crack::determine_delta_c(
                    pf, tip, r.cfg.lx_grid, r.cfg.ly_grid, orient, scale);
                delta_c = dc.delta_c;
                io::write_ctod_grid_csv(r.cfg.lx_grid, r.cfg.ly_grid, dc.ctod,
                                        (r.out / "ctod_grid.csv").string());
                std::printf("delta_c %.6g mm (plateau onset Lx >= %.6g mm, Ly >= %.6g mm, "
                            "tip at %.6g, %.6g mm on frame %d)\n",
                            dc.delta_c, dc.onset_lx, dc.onset_ly, tip.x_mm, tip.y_mm, prepeak);
            } catch (const NoPlateauError& e) {
                std::fprintf(stderr, "error: %s\nCTOD probe grid (mm):\n%s", e.what(),
                             e.grid_dump.c_str());
                return kExitNoPlateau;
            }
        } else {
            std::printf("delta_c %.6g mm (from configuration)\n", delta_c);
        }
        if (crack::resolution_too_coarse(scale, delta_c))
            std::fprintf(stderr,
                         "warning: spatial resolution %.6g mm/px is coarser than delta_c/3 = "
                         "%.6g mm/px; crack localization accuracy will suffer\n",
                         scale, delta_c / 3.0);

        // per-frame edges, overlays, tips
        std::vector<crack::EdgeSet> edge_sets;
        size_t total_edges = 0;
        for (int i = 1; i <= n; ++i) {
            const DisplacementField& f = fields[static_cast<size_t>(i - 1)];
            const auto rel = crack::relative_displacement(f, orient, scale);
            crack::EdgeSet edges = crack::detect_crack_edges(rel, delta_c, f);
            total_edges += edges.points.size();
            io::write_edges_csv(edges, (r.out / ("edges_" + frame_tag(i) + ".csv")).string());
            const GrayImage frame_img =
                io::load_image(r.frame_paths[static_cast<size_t>(i - 1)]);
            std::vector<Vec2> red;
            for (const auto& p : edges.points) red.push_back({p.def_x_px, p.def_y_px});
            io::save_overlay_png(frame_img, red,
                                 (r.out / ("overlay_" + frame_tag(i) + ".png")).string());
            edge_sets.push_back(std::move(edges));
        }

        std::vector<io::CrackFrameSummary> rows(static_cast<size_t>(n));
        int tips_found = 0;
        for (int i = 0; i < n; ++i) {
            rows[i].frame = i + 1;
            rows[i].time_s = timestamps[static_cast<size_t>(i)];
            rows[i].n_edge_points = static_cast<int>(edge_sets[static_cast<size_t>(i)].points.size());
            rows[i].speed_mm_s = std::nan("");
            if (const auto tip = crack::tip_from_edges(edge_sets[static_cast<size_t>(i)])) {
                rows[i].tip_found = true;
                rows[i].tip_x_mm = tip->x_mm;
                rows[i].tip_y_mm = tip->y_mm;
                ++tips_found;
            }
        }

        double mean_speed = std::nan("");
        if (tips_found >= 2) {
            const crack::TipTrack track = crack::track_tip_and_speed(edge_sets, timestamps);
            mean_speed = track.mean_speed_mm_s;
            size_t si = 0;
            int prev = -1;
            for (int i = 0; i < n; ++i) {
                if (!rows[static_cast<size_t>(i)].tip_found) continue;
                if (prev >= 0) rows[static_cast<size_t>(i)].speed_mm_s =
                    track.interval_speeds_mm_s[si++];
                prev = i;
            }
        }
        io::write_crack_report_csv(rows, delta_c, mean_speed,
                                   (r.out / "crack_report.csv").string());

        if (total_edges == 0) {
            std::printf("no crack detected: no relative displacement reached delta_c = %.6g mm "
                        "in %d frames\n",
                        delta_c, n);
        } else if (tips_found >= 2) {
            std::printf("crack tracked over %d frames (%d tips located); "
                        "mean propagation speed %.6g mm/s\n",
                        n, tips_found, mean_speed);
        } else {
            std::printf("crack edges found on %d frames but only %d tip(s) located; "
                        "speed unavailable\n",
                        n, tips_found);
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitConfig;
    } catch (const NoPlateauError& e) {
        std::fprintf(stderr, "error: %s\n%s", e.what(), e.grid_dump.c_str());
        return kExitNoPlateau;
    } catch (const FrameFailureError& e) {
        std::fprintf(stderr, "correlation error: %s\n", e.what());
        return kExitCorrelation;
    }
}

}  // namespace cdic::pipeline
