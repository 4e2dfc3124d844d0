#include "cdic/synthetic.hpp"

#include <cmath>
#include <random>
#include <string>

#include "cdic/errors.hpp"
#include "cdic/kernels.hpp"

namespace cdic::synthetic {

Vec2 eval_rotation(const RotationField& field, double x, double y) {
    const double dx = x - field.x0;
    if (y == 0.0) {
        if (dx == 0.0) return {0.0, 0.0};
        throw OutOfDomainError("rotation displacement undefined on y = 0 away from the center");
    }
    if (y < 0.0) throw OutOfDomainError("rotation displacement defined for y > 0 only");
    if (field.alpha_deg == 0.0) return {0.0, 0.0};
    const double a = field.alpha_deg * 3.14159265358979323846 / 180.0;
    const double r = std::sqrt(dx * dx + y * y);
    const double angle = a + std::atan(dx / y);
    return {std::sin(angle) * r + field.x0 - x, std::cos(angle) * r - y};
}

SpeckleResult generate_speckle(const SpeckleSpec& spec) {
    if (spec.width < 3 || spec.height < 3) throw ConfigError("speckle image must be >= 3x3");
    if (spec.max_attempts < 1) throw ConfigError("speckle max_attempts must be >= 1");

    SpeckleResult res;
    for (int attempt = 1; attempt <= spec.max_attempts; ++attempt) {
        std::mt19937_64 rng(spec.rng_seed + static_cast<uint64_t>(attempt - 1));
        std::uniform_real_distribution<double> ux(0.0, spec.width);
        std::uniform_real_distribution<double> uy(0.0, spec.height);
        std::normal_distribution<double> nr(spec.radius_mean, spec.radius_spread);
        std::vector<kernels::Blob> blobs(static_cast<size_t>(std::max(spec.count, 0)));
        for (auto& b : blobs) {
            b.x = ux(rng);
            b.y = uy(rng);
            b.r = std::max(0.5, nr(rng));
        }
        GrayImage img(spec.width, spec.height);
        kernels::render_speckle(blobs, spec.background, spec.foreground, img.px);
        const double mig = mean_intensity_gradient(img);
        if (mig >= spec.mig_floor) {
            res.image = std::move(img);
            res.mig = mig;
            res.attempts = attempt;
            return res;
        }
    }
    throw Error("speckle generation could not reach MIG floor " +
                std::to_string(spec.mig_floor) + " in " + std::to_string(spec.max_attempts) +
                " attempts");
}

GrayImage render_deformed(const GrayImage& ref, const RotationField& field, double background) {
    const Interpolant ip = Interpolant::make(ref);
    GrayImage out(ref.width(), ref.height());
    out.code_max = ref.code_max;
    out.mm_per_px = ref.mm_per_px;
    kernels::render_rotation(ip, field.x0, field.alpha_deg, background, out.px);
    return out;
}

std::string mode_name(Mode m) {
    switch (m) {
        case Mode::OneSeed: return "one-seed";
        case Mode::MultiSeed: return "multi-seed";
        case Mode::IncrementalMultiSeed: return "incremental-multi-seed";
    }
    return "?";
}

RoiGrid benchmark_grid(const GrayImage& reference, const BenchmarkOptions& opts) {
    const int margin = opts.subset_half + Interpolant::kMargin;
    RoiGrid grid;
    grid.step = opts.step;
    grid.w = std::min(opts.roi_w, reference.width() - 2 * margin - opts.step);
    grid.h = std::min(opts.roi_h, reference.height() - 2 * margin - opts.step);
    grid.x0 = (reference.width() - grid.w) / 2;
    grid.y0 = (reference.height() - grid.h) / 2;
    validate_grid(grid, opts.subset_half, reference.width(), reference.height());
    return grid;
}

SeedSpec benchmark_seeds(const RoiGrid& grid, Mode mode, int seed_radius) {
    SeedSpec seeds;
    const int iy = grid.ny() / 2;
    seeds.seeds.push_back({grid.nx() / 4, iy, seed_radius});
    if (mode != Mode::OneSeed) seeds.seeds.push_back({(3 * grid.nx()) / 4, iy, seed_radius});
    return seeds;
}

std::vector<BenchmarkRow> run_benchmark(const GrayImage& reference,
                                        const BenchmarkOptions& opts) {
    validate_image(reference);
    if (opts.frames < 1) throw ConfigError("benchmark needs at least 1 frame");

    const double cx = reference.width() / 2.0;
    auto alpha_of = [&](int k) { return opts.alpha_max_deg * k / opts.frames; };
    const Interpolant ref_ip = Interpolant::make(reference);

    auto frame_at = [&](int i) -> GrayImage {
        if (i == 0) return reference;
        GrayImage out(reference.width(), reference.height());
        out.code_max = reference.code_max;
        kernels::render_rotation(ref_ip, cx, alpha_of(i), 1.0, out.px);
        return out;
    };

    if (opts.frame_sink)
        for (int i = 0; i <= opts.frames; ++i) opts.frame_sink(i, frame_at(i));

    const RoiGrid grid = benchmark_grid(reference, opts);
    AnalysisConfig cfg;
    cfg.subset_half = opts.subset_half;
    cfg.zncc_accept = opts.zncc_accept;
    cfg.tol = opts.tol;
    cfg.max_iter = opts.max_iter;

    std::vector<BenchmarkRow> rows;
    for (Mode mode : opts.modes) {
        IncrementalOptions inc;
        inc.enabled = (mode == Mode::IncrementalMultiSeed);
        inc.update = IncrementalOptions::Update::Interval;
        inc.interval = opts.update_interval;
        const SeedSpec seeds = benchmark_seeds(grid, mode, opts.seed_radius);

        const SequenceResult seq =
            analyze_sequence(opts.frames + 1, frame_at, grid, seeds, cfg, inc);

        for (int k = 1; k <= opts.frames; ++k) {
            const FrameOutcome& out = seq.frames[static_cast<size_t>(k - 1)];
            const RotationField truth_field{cx, alpha_of(k)};
            BenchmarkRow row;
            row.mode = mode;
            row.frame = k;
            row.alpha_deg = alpha_of(k);
            row.frame_failed = out.failed;
            row.n_valid = out.field.n_valid();
            row.n_invalid = out.field.n_points() - row.n_valid;
            try {
                const MaeResult m = mae(out.field, [&](double px, double py) {
                    return eval_rotation(truth_field, px, py);
                });
                row.mae_x = m.x;
                row.mae_y = m.y;
                row.strict_x = m.strict_x;
                row.strict_y = m.strict_y;
            } catch (const NoValidPointsError&) {
                row.mae_x = row.mae_y = std::nan("");
                row.strict_x = row.strict_y = 10.0;
            }
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace cdic::synthetic
