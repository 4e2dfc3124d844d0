#include "cdic/rgdic.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "cdic/errors.hpp"
#include "cdic/kernels.hpp"

namespace cdic {

void validate_grid(const RoiGrid& grid, int subset_half, int img_w, int img_h) {
    if (grid.step < 1) throw ConfigError("grid step must be >= 1");
    if (grid.nx() < 1 || grid.ny() < 1) throw ConfigError("ROI produces an empty grid");
    const int m = subset_half + Interpolant::kMargin;
    const int last_x = grid.pixel_x(grid.nx() - 1);
    const int last_y = grid.pixel_y(grid.ny() - 1);
    if (grid.x0 - m < 0 || grid.y0 - m < 0 || last_x + m > img_w - 1 || last_y + m > img_h - 1)
        throw ConfigError("ROI grid subsets leave the image: origin (" +
                          std::to_string(grid.x0) + ", " + std::to_string(grid.y0) +
                          "), last point (" + std::to_string(last_x) + ", " +
                          std::to_string(last_y) + "), subset margin " + std::to_string(m));
}

void validate_seeds(const SeedSpec& seeds, const RoiGrid& grid) {
    if (seeds.seeds.empty()) throw ConfigError("at least one seed is required");
    for (const Seed& s : seeds.seeds) {
        if (s.ix < 0 || s.ix >= grid.nx() || s.iy < 0 || s.iy >= grid.ny())
            throw ConfigError("seed grid index (" + std::to_string(s.ix) + ", " +
                              std::to_string(s.iy) + ") lies outside the ROI grid");
        if (s.search_radius < 1) throw ConfigError("seed search radius must be >= 1");
    }
}

int DisplacementField::n_valid() const {
    int n = 0;
    for (uint8_t f : valid.v) n += f != 0;
    return n;
}

double DisplacementField::invalid_fraction() const {
    const int total = n_points();
    return total == 0 ? 1.0 : 1.0 - static_cast<double>(n_valid()) / total;
}

DisplacementField make_empty_field(const RoiGrid& grid) {
    DisplacementField f;
    f.grid = grid;
    const double nan = std::nan("");
    f.u = Grid2<double>(grid.nx(), grid.ny(), nan);
    f.v = Grid2<double>(grid.nx(), grid.ny(), nan);
    f.zncc = Grid2<double>(grid.nx(), grid.ny(), nan);
    f.valid = Grid2<uint8_t>(grid.nx(), grid.ny(), 0);
    f.origin = Grid2<int32_t>(grid.nx(), grid.ny(), -1);
    return f;
}

namespace {

struct QueueEntry {
    double zncc;
    int ix, iy;
};

struct EntryLess {
    // max-heap on zncc; ties pop the lowest (row, column) first
    bool operator()(const QueueEntry& a, const QueueEntry& b) const {
        if (a.zncc != b.zncc) return a.zncc < b.zncc;
        if (a.iy != b.iy) return a.iy > b.iy;
        return a.ix > b.ix;
    }
};

enum class PointState : uint8_t { Untouched, Claimed, Valid, Failed };

}  // namespace

DisplacementField analyze_frame(const Interpolant& ref, const Interpolant& def,
                                const RoiGrid& grid, const SeedSpec& seeds,
                                const AnalysisConfig& cfg) {
    validate_grid(grid, cfg.subset_half, ref.width(), ref.height());
    validate_seeds(seeds, grid);

    const int nx = grid.nx(), ny = grid.ny();
    DisplacementField field = make_empty_field(grid);
    Grid2<WarpVector> warps(nx, ny);
    Grid2<uint8_t> state(nx, ny, static_cast<uint8_t>(PointState::Untouched));

    std::priority_queue<QueueEntry, std::vector<QueueEntry>, EntryLess> queue;

    auto notify = [&](QueueEvent::Type t, double zncc, int ix, int iy) {
        if (cfg.observer) cfg.observer(QueueEvent{t, zncc, ix, iy});
    };

    auto subset_at = [&](int ix, int iy) {
        return SubsetSpec{grid.pixel_x(ix), grid.pixel_y(iy), cfg.subset_half};
    };

    auto store = [&](int ix, int iy, const MatchResult& m, int32_t origin_idx) {
        const bool ok = m.converged && m.zncc >= cfg.zncc_accept;
        field.zncc(ix, iy) = m.zncc;
        field.origin(ix, iy) = origin_idx;
        if (ok) {
            field.u(ix, iy) = m.warp.u();
            field.v(ix, iy) = m.warp.v();
            field.valid(ix, iy) = 1;
            warps(ix, iy) = m.warp;
            state(ix, iy) = static_cast<uint8_t>(PointState::Valid);
            queue.push({m.zncc, ix, iy});
            notify(QueueEvent::Type::Push, m.zncc, ix, iy);
        } else {
            state(ix, iy) = static_cast<uint8_t>(PointState::Failed);
        }
        return ok;
    };

    // Seed the queue: integer search then subpixel refinement per seed.
    int seeds_ok = 0;
    for (const Seed& s : seeds.seeds) {
        if (state(s.ix, s.iy) != static_cast<uint8_t>(PointState::Untouched)) continue;
        state(s.ix, s.iy) = static_cast<uint8_t>(PointState::Claimed);
        const SubsetSpec spec = subset_at(s.ix, s.iy);
        MatchResult m;
        try {
            const IntegerGuess g = initial_guess(ref.source(), def.source(), spec,
                                                 s.search_radius);
            WarpVector w0 = WarpVector::translation(g.dx, g.dy, cfg.shape_order);
            m = refine_nr(ref, def, spec, w0, cfg.tol, cfg.max_iter);
        } catch (const DegenerateSubsetError&) {
            m = MatchResult{};  // seed unusable
        }
        const int32_t self = static_cast<int32_t>(s.iy) * nx + s.ix;
        if (store(s.ix, s.iy, m, self)) ++seeds_ok;
    }
    if (seeds_ok == 0) throw FrameFailureError("all seeds failed to correlate");

    // Reliability-guided flood fill; neighbor refinements of one popped point
    // may run concurrently, pushes stay in fixed order.
    const int off_x[4] = {1, -1, 0, 0};
    const int off_y[4] = {0, 0, 1, -1};
    while (!queue.empty()) {
        const QueueEntry e = queue.top();
        queue.pop();
        notify(QueueEvent::Type::Pop, e.zncc, e.ix, e.iy);

        int cand_x[4], cand_y[4];
        int n_cand = 0;
        for (int d = 0; d < 4; ++d) {
            const int ix = e.ix + off_x[d], iy = e.iy + off_y[d];
            if (ix < 0 || ix >= nx || iy < 0 || iy >= ny) continue;
            if (state(ix, iy) != static_cast<uint8_t>(PointState::Untouched)) continue;
            state(ix, iy) = static_cast<uint8_t>(PointState::Claimed);
            cand_x[n_cand] = ix;
            cand_y[n_cand] = iy;
            ++n_cand;
        }
        if (n_cand == 0) continue;

        const WarpVector guess = warps(e.ix, e.iy);
        MatchResult results[4];
#pragma omp parallel for schedule(static) num_threads(std::min(n_cand, kernels::max_threads())) if (n_cand > 1 && kernels::max_threads() > 1)
        for (int c = 0; c < n_cand; ++c)
            results[c] = refine_nr(ref, def, subset_at(cand_x[c], cand_y[c]), guess, cfg.tol,
                                   cfg.max_iter);
        const int32_t origin_idx = static_cast<int32_t>(e.iy) * nx + e.ix;
        for (int c = 0; c < n_cand; ++c) store(cand_x[c], cand_y[c], results[c], origin_idx);
    }
    return field;
}

DisplacementField analyze_frame(const GrayImage& ref, const GrayImage& def,
                                const RoiGrid& grid, const SeedSpec& seeds,
                                const AnalysisConfig& cfg) {
    const Interpolant ri = Interpolant::make(ref);
    const Interpolant di = Interpolant::make(def);
    return analyze_frame(ri, di, grid, seeds, cfg);
}

namespace {

double mean_seed_zncc(const DisplacementField& f, const SeedSpec& seeds) {
    double sum = 0.0;
    int n = 0;
    for (const Seed& s : seeds.seeds) {
        if (f.valid(s.ix, s.iy)) {
            sum += f.zncc(s.ix, s.iy);
            ++n;
        }
    }
    return n == 0 ? 0.0 : sum / n;
}

// Total displacement d_i = d_j + Δd_{i,j}, with Δd sampled at the point's
// displaced location in the updated reference (bilinear over the leg grid),
// or read at the same grid node in the literal mode.
DisplacementField compose(const DisplacementField& base, const DisplacementField& leg,
                          IncrementalOptions::Composition mode) {
    const RoiGrid& grid = base.grid;
    DisplacementField out = make_empty_field(grid);
    const int nx = grid.nx(), ny = grid.ny();
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            if (!base.valid(ix, iy)) continue;
            double du, dv, q;
            if (mode == IncrementalOptions::Composition::Literal) {
                if (!leg.valid(ix, iy)) continue;
                du = leg.u(ix, iy);
                dv = leg.v(ix, iy);
                q = leg.zncc(ix, iy);
            } else {
                const double px = grid.pixel_x(ix) + base.u(ix, iy);
                const double py = grid.pixel_y(iy) + base.v(ix, iy);
                const double gx = (px - grid.x0) / grid.step;
                const double gy = (py - grid.y0) / grid.step;
                if (gx < 0.0 || gy < 0.0 || gx > nx - 1 || gy > ny - 1) continue;
                int cx = static_cast<int>(std::floor(gx));
                int cy = static_cast<int>(std::floor(gy));
                if (cx > nx - 2) cx = nx - 2;
                if (cy > ny - 2) cy = ny - 2;
                const double fx = gx - cx, fy = gy - cy;
                if (!(leg.valid(cx, cy) && leg.valid(cx + 1, cy) && leg.valid(cx, cy + 1) &&
                      leg.valid(cx + 1, cy + 1)))
                    continue;
                auto lerp2 = [&](const Grid2<double>& g) {
                    const double a = g(cx, cy) * (1.0 - fx) + g(cx + 1, cy) * fx;
                    const double b = g(cx, cy + 1) * (1.0 - fx) + g(cx + 1, cy + 1) * fx;
                    return a * (1.0 - fy) + b * fy;
                };
                du = lerp2(leg.u);
                dv = lerp2(leg.v);
                q = lerp2(leg.zncc);
            }
            out.u(ix, iy) = base.u(ix, iy) + du;
            out.v(ix, iy) = base.v(ix, iy) + dv;
            out.zncc(ix, iy) = q;
            out.valid(ix, iy) = 1;
        }
    return out;
}

}  // namespace

SequenceResult analyze_sequence(int n_frames, const std::function<GrayImage(int)>& frame_at,
                                const RoiGrid& grid, const SeedSpec& seeds,
                                const AnalysisConfig& cfg, const IncrementalOptions& inc) {
    if (n_frames < 2) throw ConfigError("a sequence needs at least 2 frames");

    SequenceResult result;
    result.chain.update_frames.push_back(0);

    GrayImage ref_img = frame_at(0);
    Interpolant ref = Interpolant::make(ref_img);
    std::optional<DisplacementField> base;  // accumulated field of the current reference
    int base_index = 0;

    for (int i = 1; i < n_frames; ++i) {
        const GrayImage def_img = frame_at(i);
        const Interpolant def = Interpolant::make(def_img);

        FrameOutcome outcome;
        outcome.leg_reference = base_index;
        DisplacementField leg;
        bool failed = false;
        try {
            leg = analyze_frame(ref, def, grid, seeds, cfg);
        } catch (const FrameFailureError&) {
            failed = true;
        }

        if (failed) {
            outcome.failed = true;
            outcome.field = make_empty_field(grid);
        } else {
            outcome.mean_seed_zncc = mean_seed_zncc(leg, seeds);
            outcome.leg_invalid_fraction = leg.invalid_fraction();
            outcome.field = (base_index == 0) ? leg : compose(*base, leg, inc.composition);
        }
        outcome.field.frame_index = i;
        outcome.field.reference_frame = 0;

        bool fire = false;
        if (inc.enabled && !failed) {
            if (inc.update == IncrementalOptions::Update::Interval)
                fire = (i - base_index) >= inc.interval;
            else
                fire = outcome.mean_seed_zncc < inc.trigger_seed_zncc ||
                       outcome.leg_invalid_fraction > inc.trigger_invalid_fraction;
        }
        if (fire) {
            ref_img = def_img;
            ref = def;
            base = outcome.field;
            base_index = i;
            result.chain.update_frames.push_back(i);
        }
        result.frames.push_back(std::move(outcome));
    }
    return result;
}

SequenceResult analyze_sequence(const std::vector<GrayImage>& frames, const RoiGrid& grid,
                                const SeedSpec& seeds, const AnalysisConfig& cfg,
                                const IncrementalOptions& inc) {
    return analyze_sequence(static_cast<int>(frames.size()),
                            [&](int i) { return frames[static_cast<size_t>(i)]; }, grid, seeds,
                            cfg, inc);
}

MaeResult mae(const DisplacementField& field,
              const std::function<Vec2(double, double)>& truth) {
    MaeResult r;
    double sx = 0.0, sy = 0.0;
    const int nx = field.grid.nx(), ny = field.grid.ny();
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            if (!field.valid(ix, iy)) {
                ++r.n_invalid;
                continue;
            }
            const Vec2 t = truth(field.grid.pixel_x(ix), field.grid.pixel_y(iy));
            sx += std::abs(field.u(ix, iy) - t.x);
            sy += std::abs(field.v(ix, iy) - t.y);
            ++r.n_valid;
        }
    if (r.n_valid == 0) throw NoValidPointsError("MAE undefined: field has no valid points");
    r.x = sx / r.n_valid;
    r.y = sy / r.n_valid;
    const double total = r.n_valid + r.n_invalid;
    r.strict_x = (sx + 10.0 * r.n_invalid) / total;
    r.strict_y = (sy + 10.0 * r.n_invalid) / total;
    return r;
}

}  // namespace cdic
