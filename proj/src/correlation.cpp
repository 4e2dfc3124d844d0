#include "cdic/correlation.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "cdic/errors.hpp"
#include "cdic/kernels.hpp"

namespace cdic {

bool WarpVector::finite() const {
    for (int i = 0; i < size(); ++i)
        if (!std::isfinite(p[i])) return false;
    return true;
}

void validate_subset(const SubsetSpec& spec, int img_w, int img_h) {
    if (spec.half_width < 3)
        throw Error("subset half-width must be >= 3, got " + std::to_string(spec.half_width));
    const int m = spec.half_width + Interpolant::kMargin;
    if (spec.cx - m < 0 || spec.cx + m > img_w - 1 || spec.cy - m < 0 || spec.cy + m > img_h - 1)
        throw Error("subset at (" + std::to_string(spec.cx) + ", " + std::to_string(spec.cy) +
                    ") with half-width " + std::to_string(spec.half_width) +
                    " does not fit inside the image with the interpolation margin");
}

std::pair<double, double> warp_point(const SubsetSpec& spec, const WarpVector& w,
                                     double dx, double dy) {
    using I = WarpVector::Index;
    double x = spec.cx + dx + w.p[I::U] + w.p[I::UX] * dx + w.p[I::UY] * dy;
    double y = spec.cy + dy + w.p[I::V] + w.p[I::VX] * dx + w.p[I::VY] * dy;
    if (w.order == 2) {
        x += 0.5 * w.p[I::UXX] * dx * dx + 0.5 * w.p[I::UYY] * dy * dy + w.p[I::UXY] * dx * dy;
        y += 0.5 * w.p[I::VXX] * dx * dx + 0.5 * w.p[I::VYY] * dy * dy + w.p[I::VXY] * dx * dy;
    }
    return {x, y};
}

namespace {

constexpr double kVarianceFloor = 1e-12;
constexpr double kConditionLimit = 1e12;

struct RefSubset {
    int half = 0;
    int count = 0;
    std::vector<double> norm_centered;  // (f - f_mean) / norm
    bool degenerate = false;
};

// Reference-side subset from exact stored intensities.
RefSubset ref_subset(const Grid2<double>& src, const SubsetSpec& spec) {
    RefSubset r;
    r.half = spec.half_width;
    const int n = 2 * r.half + 1;
    r.count = n * n;
    std::vector<double> f(static_cast<size_t>(r.count));
    double sum = 0.0;
    size_t k = 0;
    for (int j = -r.half; j <= r.half; ++j)
        for (int i = -r.half; i <= r.half; ++i) {
            f[k] = src(spec.cx + i, spec.cy + j);
            sum += f[k];
            ++k;
        }
    const double mean = sum / r.count;
    double ss = 0.0;
    for (double& v : f) {
        v -= mean;
        ss += v * v;
    }
    if (ss < kVarianceFloor) {
        r.degenerate = true;
        return r;
    }
    const double norm = std::sqrt(ss);
    for (double& v : f) v /= norm;
    r.norm_centered = std::move(f);
    return r;
}

struct DeformedEval {
    std::vector<double> g, gx, gy;
    double mean = 0.0, norm = 0.0;
    double cost = 0.0;
    std::vector<double> residual;  // f_norm - g_norm
};

enum class EvalStatus { Ok, OutOfBounds, Degenerate };

EvalStatus eval_deformed(const Interpolant& def, const SubsetSpec& spec, const WarpVector& w,
                         const RefSubset& ref, bool with_grad, DeformedEval& out) {
    const int half = spec.half_width;
    const int count = ref.count;
    out.g.resize(count);
    if (with_grad) {
        out.gx.resize(count);
        out.gy.resize(count);
    }
    double sum = 0.0;
    size_t k = 0;
    for (int j = -half; j <= half; ++j)
        for (int i = -half; i <= half; ++i, ++k) {
            const auto [x, y] = warp_point(spec, w, i, j);
            if (!def.in_domain(x, y)) return EvalStatus::OutOfBounds;
            if (with_grad) {
                const auto s = def.sample(x, y);
                out.g[k] = s.value;
                out.gx[k] = s.dx;
                out.gy[k] = s.dy;
            } else {
                out.g[k] = def.value(x, y);
            }
            sum += out.g[k];
        }
    out.mean = sum / count;
    double ss = 0.0;
    for (int i = 0; i < count; ++i) {
        const double c = out.g[i] - out.mean;
        ss += c * c;
    }
    if (ss < kVarianceFloor) return EvalStatus::Degenerate;
    out.norm = std::sqrt(ss);
    out.residual.resize(count);
    double cost = 0.0;
    for (int i = 0; i < count; ++i) {
        const double r = ref.norm_centered[i] - (out.g[i] - out.mean) / out.norm;
        out.residual[i] = r;
        cost += r * r;
    }
    out.cost = cost;
    return EvalStatus::Ok;
}

// Cholesky solve of the symmetric system A x = b with a cheap condition
// estimate from the factor's diagonal spread. Returns false when the system
// is singular or the estimate exceeds kConditionLimit.
bool solve_spd(int n, std::array<double, 144>& a, std::array<double, 12>& b) {
    std::array<double, 144> l{};
    double dmin = 0.0, dmax = 0.0;
    for (int j = 0; j < n; ++j) {
        double d = a[j * 12 + j];
        for (int k = 0; k < j; ++k) d -= l[j * 12 + k] * l[j * 12 + k];
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        const double lj = std::sqrt(d);
        l[j * 12 + j] = lj;
        if (j == 0) {
            dmin = dmax = lj;
        } else {
            dmin = std::min(dmin, lj);
            dmax = std::max(dmax, lj);
        }
        for (int i = j + 1; i < n; ++i) {
            double s = a[i * 12 + j];
            for (int k = 0; k < j; ++k) s -= l[i * 12 + k] * l[j * 12 + k];
            l[i * 12 + j] = s / lj;
        }
    }
    const double cond = (dmax / dmin) * (dmax / dmin);
    if (!std::isfinite(cond) || cond > kConditionLimit) return false;
    // forward then backward substitution
    std::array<double, 12> y{};
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= l[i * 12 + k] * y[k];
        y[i] = s / l[i * 12 + i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int k = i + 1; k < n; ++k) s -= l[k * 12 + i] * b[k];
        b[i] = s / l[i * 12 + i];
    }
    return true;
}

void warp_jacobian(int order, double gx, double gy, double dx, double dy, double* out) {
    out[0] = gx;
    out[1] = gy;
    out[2] = gx * dx;
    out[3] = gx * dy;
    out[4] = gy * dx;
    out[5] = gy * dy;
    if (order == 2) {
        out[6] = gx * 0.5 * dx * dx;
        out[7] = gx * 0.5 * dy * dy;
        out[8] = gx * dx * dy;
        out[9] = gy * 0.5 * dx * dx;
        out[10] = gy * 0.5 * dy * dy;
        out[11] = gy * dx * dy;
    }
}

double weighted_norm(const WarpVector& d, int half) {
    const double m = half;
    double s = d.p[0] * d.p[0] + d.p[1] * d.p[1];
    for (int i = 2; i < 6; ++i) s += m * m * d.p[i] * d.p[i];
    if (d.order == 2)
        for (int i = 6; i < 12; ++i) s += m * m * m * m * d.p[i] * d.p[i];
    return std::sqrt(s);
}

}  // namespace

double znssd_cost(const Interpolant& ref, const Interpolant& def, const SubsetSpec& spec,
                  const WarpVector& w) {
    validate_subset(spec, ref.width(), ref.height());
    const int half = spec.half_width;
    const int n = 2 * half + 1;
    const int count = n * n;
    std::vector<double> f(static_cast<size_t>(count)), g(static_cast<size_t>(count));
    double fsum = 0.0, gsum = 0.0;
    size_t k = 0;
    for (int j = -half; j <= half; ++j)
        for (int i = -half; i <= half; ++i, ++k) {
            f[k] = ref.value(spec.cx + i, spec.cy + j);
            const auto [x, y] = warp_point(spec, w, i, j);
            if (!def.in_domain(x, y))
                throw OutOfDomainError("warped subset leaves the deformed image");
            g[k] = def.value(x, y);
            fsum += f[k];
            gsum += g[k];
        }
    const double fm = fsum / count, gm = gsum / count;
    double fss = 0.0, gss = 0.0;
    for (int i = 0; i < count; ++i) {
        fss += (f[i] - fm) * (f[i] - fm);
        gss += (g[i] - gm) * (g[i] - gm);
    }
    if (fss < kVarianceFloor || gss < kVarianceFloor)
        throw DegenerateSubsetError("subset variance underflow in ZNSSD");
    const double fn = std::sqrt(fss), gn = std::sqrt(gss);
    double c = 0.0;
    for (int i = 0; i < count; ++i) {
        const double r = (f[i] - fm) / fn - (g[i] - gm) / gn;
        c += r * r;
    }
    return c;
}

IntegerGuess initial_guess(const Grid2<double>& ref, const Grid2<double>& def,
                           const SubsetSpec& spec, int search_radius) {
    const auto hit = kernels::zncc_search(ref, def, spec.cx, spec.cy, spec.half_width,
                                          search_radius);
    if (!hit.found)
        throw DegenerateSubsetError("no evaluable offset in the integer search window");
    return {hit.dx, hit.dy, hit.zncc};
}

IntegerGuess initial_guess(const GrayImage& ref, const GrayImage& def,
                           const SubsetSpec& spec, int search_radius) {
    return initial_guess(ref.px, def.px, spec, search_radius);
}

MatchResult refine_nr(const Interpolant& ref, const Interpolant& def, const SubsetSpec& spec,
                      const WarpVector& w0, double tol, int max_iter) {
    validate_subset(spec, ref.width(), ref.height());
    if (!w0.finite()) throw Error("refine_nr requires a finite initial warp");

    MatchResult result;
    result.warp = w0;

    const RefSubset rsub = ref_subset(ref.source(), spec);
    if (rsub.degenerate) return result;

    WarpVector w = w0;
    DeformedEval cur;
    if (eval_deformed(def, spec, w, rsub, true, cur) != EvalStatus::Ok) return result;

    // Best iterate seen, returned when the trajectory ends above it. This
    // keeps the final ZNSSD at or below the initial one.
    WarpVector best_w = w;
    double best_cost = cur.cost;

    const int np = w.size();
    int stalled = 0;
    for (int it = 1; it <= max_iter; ++it) {
        result.iterations = it;

        std::array<double, 144> a{};
        std::array<double, 12> b{};
        double jac[12];
        size_t k = 0;
        for (int j = -spec.half_width; j <= spec.half_width; ++j)
            for (int i = -spec.half_width; i <= spec.half_width; ++i, ++k) {
                warp_jacobian(w.order, cur.gx[k], cur.gy[k], i, j, jac);
                for (int r = 0; r < np; ++r) {
                    b[r] += cur.residual[k] * jac[r];
                    for (int c = r; c < np; ++c) a[r * 12 + c] += jac[r] * jac[c];
                }
            }
        for (int r = 1; r < np; ++r)
            for (int c = 0; c < r; ++c) a[r * 12 + c] = a[c * 12 + r];

        if (!solve_spd(np, a, b)) break;

        WarpVector delta = w;
        for (int i = 0; i < np; ++i) delta.p[i] = cur.norm * b[i];
        const double norm = weighted_norm(delta, spec.half_width);

        WarpVector wt = w;
        for (int i = 0; i < np; ++i) wt.p[i] = w.p[i] + delta.p[i];
        if (!wt.finite()) break;
        DeformedEval trial;
        if (eval_deformed(def, spec, wt, rsub, true, trial) != EvalStatus::Ok) break;
        w = wt;
        std::swap(cur, trial);

        if (cur.cost < best_cost) {
            best_cost = cur.cost;
            best_w = w;
            stalled = 0;
        } else if (++stalled > 8) {
            break;  // oscillating or diverging away from the best iterate
        }

        if (norm < tol) {
            result.converged = true;
            break;
        }
    }

    if (cur.cost <= best_cost) {
        result.warp = w;
        result.znssd = cur.cost;
    } else {
        result.warp = best_w;
        result.znssd = best_cost;
    }
    result.zncc = zncc_from_znssd(result.znssd);
    return result;
}

}  // namespace cdic
