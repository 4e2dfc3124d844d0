#include "cdic/crack.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <string>

#include "cdic/errors.hpp"

namespace cdic::crack {

namespace {

void require_scale(double mm_per_px) {
    if (!(mm_per_px > 0.0))
        throw ConfigError("crack analysis requires a positive mm/pixel scale");
}

// Vertical-crack logic is the single implementation; horizontal fields are
// transposed in, results swapped out.
DisplacementField transpose_field(const DisplacementField& f) {
    DisplacementField t = f;
    t.grid = RoiGrid{f.grid.y0, f.grid.x0, f.grid.h, f.grid.w, f.grid.step};
    const int nx = f.grid.nx(), ny = f.grid.ny();
    t.u = Grid2<double>(ny, nx);
    t.v = Grid2<double>(ny, nx);
    t.zncc = Grid2<double>(ny, nx);
    t.valid = Grid2<uint8_t>(ny, nx);
    t.origin = Grid2<int32_t>(ny, nx, -1);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            t.u(iy, ix) = f.v(ix, iy);
            t.v(iy, ix) = f.u(ix, iy);
            t.zncc(iy, ix) = f.zncc(ix, iy);
            t.valid(iy, ix) = f.valid(ix, iy);
        }
    return t;
}

struct LineFit {
    double a = 0.0, b = 0.0;  // y = a + b x
    bool ok = false;
};

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    LineFit f;
    const size_t n = xs.size();
    if (n < 2) return f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-12) return f;
    f.b = (n * sxy - sx * sy) / det;
    f.a = (sy - f.b * sx) / n;
    f.ok = true;
    return f;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::optional<double> sample_bilinear(const DisplacementField& f, const Grid2<double>& g,
                                      double px, double py) {
    const double gx = (px - f.grid.x0) / f.grid.step;
    const double gy = (py - f.grid.y0) / f.grid.step;
    const int nx = f.grid.nx(), ny = f.grid.ny();
    if (gx < 0.0 || gy < 0.0 || gx > nx - 1 || gy > ny - 1) return std::nullopt;
    int cx = static_cast<int>(std::floor(gx));
    int cy = static_cast<int>(std::floor(gy));
    if (cx > nx - 2) cx = nx - 2;
    if (cy > ny - 2) cy = ny - 2;
    if (!(f.valid(cx, cy) && f.valid(cx + 1, cy) && f.valid(cx, cy + 1) &&
          f.valid(cx + 1, cy + 1)))
        return std::nullopt;
    const double fx = gx - cx, fy = gy - cy;
    const double top = g(cx, cy) * (1.0 - fx) + g(cx + 1, cy) * fx;
    const double bot = g(cx, cy + 1) * (1.0 - fx) + g(cx + 1, cy + 1) * fx;
    return top * (1.0 - fy) + bot * fy;
}

}  // namespace

RelativeDisplacementField relative_displacement(const DisplacementField& field,
                                                Orientation orientation, double mm_per_px) {
    require_scale(mm_per_px);
    RelativeDisplacementField out;
    out.orientation = orientation;
    out.grid = field.grid;
    out.mm_per_px = mm_per_px;
    const int nx = field.grid.nx(), ny = field.grid.ny();
    if (orientation == Orientation::Vertical) {
        out.rel = Grid2<double>(nx - 1, ny, std::nan(""));
        out.defined = Grid2<uint8_t>(nx - 1, ny, 0);
        for (int iy = 0; iy < ny; ++iy)
            for (int ix = 0; ix + 1 < nx; ++ix)
                if (field.valid(ix, iy) && field.valid(ix + 1, iy)) {
                    out.rel(ix, iy) = (field.u(ix + 1, iy) - field.u(ix, iy)) * mm_per_px;
                    out.defined(ix, iy) = 1;
                }
    } else {
        out.rel = Grid2<double>(nx, ny - 1, std::nan(""));
        out.defined = Grid2<uint8_t>(nx, ny - 1, 0);
        for (int iy = 0; iy + 1 < ny; ++iy)
            for (int ix = 0; ix < nx; ++ix)
                if (field.valid(ix, iy) && field.valid(ix, iy + 1)) {
                    out.rel(ix, iy) = (field.v(ix, iy + 1) - field.v(ix, iy)) * mm_per_px;
                    out.defined(ix, iy) = 1;
                }
    }
    return out;
}

namespace {

struct Profile {
    double y_px = 0.0;
    double abscissa_px = 0.0;  // where the flank lines meet / the jump sits
    double opening_mm = 0.0;   // flank separation at the abscissa
};

CrackTip locate_vertical(const DisplacementField& field, int band_begin, int band_end,
                         double mm_per_px, double noise_floor_mm) {
    const int nx = field.grid.nx(), ny = field.grid.ny();
    if (band_begin < 0 || band_end > ny || band_end - band_begin < 3)
        throw ConfigError("profile band must contain at least 3 grid rows inside the field");

    const double step = field.grid.step;
    std::vector<Profile> profiles;
    for (int iy = band_begin; iy < band_end; ++iy) {
        // strongest adjacent jump along the profile
        int jump = -1;
        double jump_mag = 0.0;
        for (int ix = 0; ix + 1 < nx; ++ix) {
            if (!(field.valid(ix, iy) && field.valid(ix + 1, iy))) continue;
            const double d = std::abs(field.u(ix + 1, iy) - field.u(ix, iy)) * mm_per_px;
            if (d > jump_mag) {
                jump_mag = d;
                jump = ix;
            }
        }
        if (jump < 0 || jump_mag < noise_floor_mm) continue;

        auto collect = [&](int lo, int hi, std::vector<double>& xs, std::vector<double>& us) {
            for (int ix = lo; ix <= hi; ++ix)
                if (ix >= 0 && ix < nx && field.valid(ix, iy)) {
                    xs.push_back(field.grid.pixel_x(ix));
                    us.push_back(field.u(ix, iy) * mm_per_px);
                }
        };
        std::vector<double> lx, lu, rx, ru;
        collect(0, jump - 1, lx, lu);          // flanks away from the opening
        collect(jump + 2, nx - 1, rx, ru);
        if (lx.size() < 2) collect(jump, jump, lx, lu);
        if (rx.size() < 2) collect(jump + 1, jump + 1, rx, ru);
        const LineFit left = fit_line(lx, lu);
        const LineFit right = fit_line(rx, ru);
        if (!left.ok || !right.ok) continue;

        const double xa = field.grid.pixel_x(jump), xb = field.grid.pixel_x(jump + 1);
        double abscissa = 0.5 * (xa + xb);
        if (std::abs(left.b - right.b) > 1e-12) {
            const double xi = (right.a - left.a) / (left.b - right.b);
            if (xi >= xa - 2.0 * step && xi <= xb + 2.0 * step) abscissa = xi;
        }
        Profile p;
        p.y_px = field.grid.pixel_y(iy);
        p.abscissa_px = abscissa;
        p.opening_mm = (right.a + right.b * abscissa) - (left.a + left.b * abscissa);
        profiles.push_back(p);
    }

    CrackTip tip;
    if (profiles.empty()) return tip;

    std::vector<double> xs;
    for (const Profile& p : profiles) xs.push_back(p.abscissa_px);
    const double x_tip_px = median_of(xs);
    double spread = 0.0;
    for (double x : xs) spread = std::max(spread, std::abs(x - x_tip_px));

    // Where does the opening close? Regress opening against the profile row.
    std::vector<double> py, pw;
    for (const Profile& p : profiles) {
        py.push_back(p.y_px);
        pw.push_back(std::abs(p.opening_mm));
    }
    const LineFit wfit = fit_line(py, pw);
    double y_tip_px;
    const double y_lo = profiles.front().y_px, y_hi = profiles.back().y_px;
    if (wfit.ok && std::abs(wfit.b) > 1e-9) {
        y_tip_px = -wfit.a / wfit.b;
        tip.opening_dir = wfit.b > 0.0 ? +1 : -1;
        if (y_tip_px < y_lo - 2.0 * step) y_tip_px = y_lo - 0.5 * step;
        if (y_tip_px > y_hi + 2.0 * step) y_tip_px = y_hi + 0.5 * step;
    } else {
        // rigid opening: constant along the band, tip just above its top row
        y_tip_px = y_lo - 0.5 * step;
        tip.opening_dir = +1;
    }

    tip.found = true;
    tip.x_mm = x_tip_px * mm_per_px;
    tip.y_mm = y_tip_px * mm_per_px;
    tip.confidence_mm = spread * mm_per_px;
    tip.low_confidence = spread > 2.0 * step;
    return tip;
}

}  // namespace

CrackTip locate_crack_tip(const DisplacementField& field, Orientation orientation,
                          int band_begin, int band_end, double mm_per_px,
                          double noise_floor_mm) {
    require_scale(mm_per_px);
    if (orientation == Orientation::Vertical)
        return locate_vertical(field, band_begin, band_end, mm_per_px, noise_floor_mm);
    const DisplacementField t = transpose_field(field);
    CrackTip tip = locate_vertical(t, band_begin, band_end, mm_per_px, noise_floor_mm);
    std::swap(tip.x_mm, tip.y_mm);
    return tip;
}

double measure_ctod(const DisplacementField& field, const CrackTip& tip, double lx_mm,
                    double ly_mm, Orientation orientation, double mm_per_px) {
    require_scale(mm_per_px);
    if (!tip.found) throw ProbeError("CTOD requires a located crack tip");
    if (!(lx_mm > 0.0) || ly_mm < 0.0)
        throw ConfigError("CTOD probe requires L_x > 0 and L_y >= 0");
    if (orientation == Orientation::Horizontal) {
        const DisplacementField t = transpose_field(field);
        CrackTip tt = tip;
        std::swap(tt.x_mm, tt.y_mm);
        return measure_ctod(t, tt, lx_mm, ly_mm, Orientation::Vertical, mm_per_px);
    }
    const double xt = tip.x_mm / mm_per_px, yt = tip.y_mm / mm_per_px;
    const double py = yt + tip.opening_dir * (ly_mm / mm_per_px);
    const auto right = sample_bilinear(field, field.u, xt + lx_mm / mm_per_px, py);
    const auto left = sample_bilinear(field, field.u, xt - lx_mm / mm_per_px, py);
    if (!right || !left)
        throw ProbeError("CTOD probe at L_x=" + std::to_string(lx_mm) + "mm, L_y=" +
                         std::to_string(ly_mm) + "mm falls outside the valid field");
    return (*right - *left) * mm_per_px;
}

DeltaCResult determine_delta_c(const DisplacementField& field, const CrackTip& tip,
                               const std::vector<double>& lx_grid_mm,
                               const std::vector<double>& ly_grid_mm,
                               Orientation orientation, double mm_per_px,
                               double plateau_ratio, int min_size) {
    require_scale(mm_per_px);
    const int ncols = static_cast<int>(lx_grid_mm.size());
    const int nrows = static_cast<int>(ly_grid_mm.size());
    if (ncols < min_size || nrows < min_size)
        throw ConfigError("probe grids must provide at least " + std::to_string(min_size) +
                          " offsets per axis");

    DeltaCResult res;
    res.ctod = Grid2<double>(ncols, nrows, std::nan(""));
    for (int r = 0; r < nrows; ++r)
        for (int c = 0; c < ncols; ++c) {
            try {
                res.ctod(c, r) =
                    measure_ctod(field, tip, lx_grid_mm[c], ly_grid_mm[r], orientation,
                                 mm_per_px);
            } catch (const ProbeError&) {
                // outside the valid region; stays NaN
            }
        }

    // Largest contiguous sub-grid with max/min <= plateau_ratio, all positive.
    long best_area = 0;
    int b_r0 = -1, b_r1 = -1, b_c0 = -1, b_c1 = -1;
    for (int r0 = 0; r0 < nrows; ++r0)
        for (int r1 = r0 + min_size - 1; r1 < nrows; ++r1)
            for (int c0 = 0; c0 + min_size - 1 < ncols; ++c0) {
                double lo = 1e300, hi = -1e300;
                bool bad = false;
                for (int c1 = c0; c1 < ncols; ++c1) {
                    for (int r = r0; r <= r1; ++r) {
                        const double v = res.ctod(c1, r);
                        if (!(v > 0.0) || !std::isfinite(v)) {
                            bad = true;
                            break;
                        }
                        lo = std::min(lo, v);
                        hi = std::max(hi, v);
                    }
                    if (bad || hi / lo > plateau_ratio) break;
                    if (c1 - c0 + 1 >= min_size) {
                        const long area =
                            static_cast<long>(r1 - r0 + 1) * (c1 - c0 + 1);
                        if (area > best_area) {
                            best_area = area;
                            b_r0 = r0;
                            b_r1 = r1;
                            b_c0 = c0;
                            b_c1 = c1;
                        }
                    }
                }
            }

    if (best_area == 0) {
        std::string dump = "      ";
        char buf[64];
        for (int c = 0; c < ncols; ++c) {
            std::snprintf(buf, sizeof buf, " Lx=%-8.4g", lx_grid_mm[c]);
            dump += buf;
        }
        dump += "\n";
        for (int r = 0; r < nrows; ++r) {
            std::snprintf(buf, sizeof buf, "Ly=%-8.4g", ly_grid_mm[r]);
            dump += buf;
            for (int c = 0; c < ncols; ++c) {
                std::snprintf(buf, sizeof buf, " %11.5g", res.ctod(c, r));
                dump += buf;
            }
            dump += "\n";
        }
        throw NoPlateauError("no contiguous CTOD plateau of at least " +
                                 std::to_string(min_size) + "x" + std::to_string(min_size) +
                                 " probe offsets (ratio " + std::to_string(plateau_ratio) + ")",
                             dump);
    }

    std::vector<double> vals;
    for (int r = b_r0; r <= b_r1; ++r)
        for (int c = b_c0; c <= b_c1; ++c) vals.push_back(res.ctod(c, r));
    res.delta_c = median_of(vals);
    res.lx_begin = b_c0;
    res.lx_end = b_c1;
    res.ly_begin = b_r0;
    res.ly_end = b_r1;
    res.onset_lx = lx_grid_mm[b_c0];
    res.onset_ly = ly_grid_mm[b_r0];
    return res;
}

EdgeSet detect_crack_edges(const RelativeDisplacementField& rel, double delta_c_mm,
                           const DisplacementField& field) {
    if (!(delta_c_mm > 0.0)) throw ConfigError("delta_c must be positive");
    EdgeSet out;
    out.orientation = rel.orientation;
    out.grid = rel.grid;
    out.mm_per_px = rel.mm_per_px;
    out.frame = field.frame_index;

    auto emit = [&](int ix, int iy, int side, double opening) {
        EdgePoint p;
        p.ix = ix;
        p.iy = iy;
        p.side = side;
        p.ref_x_px = field.grid.pixel_x(ix);
        p.ref_y_px = field.grid.pixel_y(iy);
        p.def_x_px = p.ref_x_px + field.u(ix, iy);
        p.def_y_px = p.ref_y_px + field.v(ix, iy);
        p.opening_mm = opening;
        out.points.push_back(p);
    };

    for (int iy = 0; iy < rel.rel.h; ++iy)
        for (int ix = 0; ix < rel.rel.w; ++ix) {
            if (!rel.defined(ix, iy) || rel.rel(ix, iy) < delta_c_mm) continue;
            out.cells.emplace_back(ix, iy);
            const double opening = rel.rel(ix, iy);
            if (rel.orientation == Orientation::Vertical) {
                emit(ix, iy, 0, opening);
                emit(ix + 1, iy, 1, opening);
            } else {
                emit(ix, iy, 0, opening);
                emit(ix, iy + 1, 1, opening);
            }
        }
    return out;
}

namespace {

// Cells of the topmost 8-connected component of at least `min_cells` cells,
// in the transposed-to-vertical convention (cells indexed (ix, iy), crack
// plane along y).
std::vector<std::pair<int, int>> topmost_component(const std::vector<std::pair<int, int>>& cells,
                                                   int w, int h, int min_cells) {
    Grid2<int32_t> label(w, h, -1);
    for (const auto& [ix, iy] : cells) label(ix, iy) = 0;
    int next = 1;
    std::vector<std::vector<std::pair<int, int>>> comps;
    for (const auto& [sx, sy] : cells) {
        if (label(sx, sy) != 0) continue;
        std::vector<std::pair<int, int>> comp;
        std::deque<std::pair<int, int>> work{{sx, sy}};
        label(sx, sy) = next;
        while (!work.empty()) {
            const auto [cx, cy] = work.front();
            work.pop_front();
            comp.emplace_back(cx, cy);
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx2 = cx + dx, ny2 = cy + dy;
                    if (nx2 < 0 || nx2 >= w || ny2 < 0 || ny2 >= h) continue;
                    if (label(nx2, ny2) == 0) {
                        label(nx2, ny2) = next;
                        work.emplace_back(nx2, ny2);
                    }
                }
        }
        ++next;
        if (static_cast<int>(comp.size()) >= min_cells) comps.push_back(std::move(comp));
    }
    if (comps.empty()) return {};
    auto key = [](const std::vector<std::pair<int, int>>& c) {
        int min_iy = 1 << 30, min_ix = 1 << 30;
        for (const auto& [ix, iy] : c) {
            if (iy < min_iy) {
                min_iy = iy;
                min_ix = ix;
            } else if (iy == min_iy) {
                min_ix = std::min(min_ix, ix);
            }
        }
        return std::pair<int, int>(min_iy, min_ix);
    };
    size_t best = 0;
    for (size_t i = 1; i < comps.size(); ++i)
        if (key(comps[i]) < key(comps[best])) best = i;
    return comps[best];
}

}  // namespace

std::optional<CrackTip> tip_from_edges(const EdgeSet& edges) {
    if (edges.cells.empty()) return std::nullopt;
    const bool vertical = edges.orientation == Orientation::Vertical;
    const int w = vertical ? edges.grid.nx() - 1 : edges.grid.ny() - 1;
    const int h = vertical ? edges.grid.ny() : edges.grid.nx();

    // transpose horizontal cells into the vertical convention
    std::vector<std::pair<int, int>> cells;
    cells.reserve(edges.cells.size());
    for (const auto& [ix, iy] : edges.cells)
        cells.emplace_back(vertical ? ix : iy, vertical ? iy : ix);

    const auto comp = topmost_component(cells, w, h, 3);
    if (comp.empty()) return std::nullopt;

    // per-row flank extremes of the component
    std::vector<int> min_ix(h, 1 << 30), max_ix(h, -1);
    for (const auto& [ix, iy] : comp) {
        min_ix[iy] = std::min(min_ix[iy], ix);
        max_ix[iy] = std::max(max_ix[iy], ix);
    }
    std::vector<int> rows;
    for (int iy = 0; iy < h; ++iy)
        if (max_ix[iy] >= 0) rows.push_back(iy);

    const double step = edges.grid.step;
    const int base_x = vertical ? edges.grid.x0 : edges.grid.y0;
    const int base_y = vertical ? edges.grid.y0 : edges.grid.x0;
    auto px_x = [&](int ix) { return base_x + ix * step; };
    auto px_y = [&](int iy) { return base_y + iy * step; };
    // left flank point of cell (ix,iy) is grid point ix; right flank is ix+1
    const int top = rows.front();
    double tip_x_px = 0.5 * (px_x(min_ix[top]) + px_x(max_ix[top] + 1));
    double tip_y_px = px_y(top);

    if (rows.size() >= 5) {
        std::vector<double> ly, lx, ry, rx;
        for (size_t k = 0; k < 5; ++k) {
            const int iy = rows[k];
            ly.push_back(px_y(iy));
            lx.push_back(px_x(min_ix[iy]));
            ry.push_back(px_y(iy));
            rx.push_back(px_x(max_ix[iy] + 1));
        }
        const LineFit lf = fit_line(ly, lx);  // x as a function of y
        const LineFit rf = fit_line(ry, rx);
        if (lf.ok && rf.ok && std::abs(lf.b - rf.b) > 1e-9) {
            const double yi = (rf.a - lf.a) / (lf.b - rf.b);
            if (yi >= tip_y_px - 3.0 * step && yi <= tip_y_px + step) {
                tip_y_px = yi;
                tip_x_px = lf.a + lf.b * yi;
            }
        }
    }

    CrackTip tip;
    tip.found = true;
    tip.frame = edges.frame;
    if (vertical) {
        tip.x_mm = tip_x_px * edges.mm_per_px;
        tip.y_mm = tip_y_px * edges.mm_per_px;
    } else {
        tip.x_mm = tip_y_px * edges.mm_per_px;
        tip.y_mm = tip_x_px * edges.mm_per_px;
    }
    return tip;
}

TipTrack track_tip_and_speed(const std::vector<EdgeSet>& frames,
                             const std::vector<double>& timestamps_s) {
    if (frames.size() != timestamps_s.size())
        throw ConfigError("one timestamp per frame is required");
    for (size_t i = 1; i < timestamps_s.size(); ++i)
        if (!(timestamps_s[i] > timestamps_s[i - 1]))
            throw ConfigError("timestamps must be strictly increasing");

    TipTrack track;
    for (const EdgeSet& e : frames) track.tips.push_back(tip_from_edges(e));

    int prev = -1;
    double speed_sum = 0.0;
    for (size_t i = 0; i < track.tips.size(); ++i) {
        if (!track.tips[i]) continue;
        if (prev >= 0) {
            const bool vertical = frames[i].orientation == Orientation::Vertical;
            const double da = vertical ? track.tips[i]->y_mm - track.tips[prev]->y_mm
                                       : track.tips[i]->x_mm - track.tips[prev]->x_mm;
            const double dt = timestamps_s[i] - timestamps_s[prev];
            track.interval_speeds_mm_s.push_back(std::abs(da) / dt);
            speed_sum += track.interval_speeds_mm_s.back();
        }
        prev = static_cast<int>(i);
    }
    if (track.interval_speeds_mm_s.empty())
        throw Error("crack speed requires at least two frames with located tips");
    track.mean_speed_mm_s = speed_sum / track.interval_speeds_mm_s.size();
    return track;
}

}  // namespace cdic::crack
