#pragma once

#include <array>
#include <utility>

#include "cdic/image.hpp"
#include "cdic/interpolant.hpp"

namespace cdic {

/// Square matching window of (2M+1)^2 pixels centered on an integer pixel.
struct SubsetSpec {
    int cx = 0, cy = 0;
    int half_width = 11;  // M
};

/// Throws if M < 3 or the subset plus the interpolation margin leaves the image.
void validate_subset(const SubsetSpec& spec, int img_w, int img_h);

/// Displacement-mapping parameter vector p. Component order:
/// u, v, u_x, u_y, v_x, v_y [, u_xx, u_yy, u_xy, v_xx, v_yy, v_xy].
struct WarpVector {
    enum Index { U, V, UX, UY, VX, VY, UXX, UYY, UXY, VXX, VYY, VXY };

    int order = 1;
    std::array<double, 12> p{};

    static WarpVector translation(double u, double v, int order = 1) {
        WarpVector w;
        w.order = order;
        w.p[U] = u;
        w.p[V] = v;
        return w;
    }

    int size() const { return order == 1 ? 6 : 12; }
    double u() const { return p[U]; }
    double v() const { return p[V]; }
    bool finite() const;
};

/// First- or second-order subset mapping: local offset (dx, dy) from the
/// subset center to deformed-image coordinates.
std::pair<double, double> warp_point(const SubsetSpec& spec, const WarpVector& w,
                                     double dx, double dy);

/// ZNSSD over the subset; in [0, 4]. Throws OutOfDomainError when the warped
/// subset leaves the deformed interpolant's region and DegenerateSubsetError
/// when either subset's variance underflows.
double znssd_cost(const Interpolant& ref, const Interpolant& def, const SubsetSpec& spec,
                  const WarpVector& w);

inline double zncc_from_znssd(double znssd) { return 1.0 - 0.5 * znssd; }

struct IntegerGuess {
    int dx = 0, dy = 0;
    double zncc = -2.0;
};

/// Exhaustive integer-translation ZNCC search over [-radius, radius]^2.
/// Throws DegenerateSubsetError when nothing in the window is evaluable.
IntegerGuess initial_guess(const GrayImage& ref, const GrayImage& def,
                           const SubsetSpec& spec, int search_radius);
IntegerGuess initial_guess(const Grid2<double>& ref, const Grid2<double>& def,
                           const SubsetSpec& spec, int search_radius);

struct MatchResult {
    WarpVector warp;
    double znssd = 4.0;
    double zncc = -1.0;
    int iterations = 0;
    bool converged = false;
};

/// Forward-additive Newton-Raphson refinement of the ZNSSD cost, starting from
/// w0. Convergence is declared when the weighted update norm (gradient terms
/// scaled by M, second-order terms by M^2) drops below tol. Singular or
/// ill-conditioned normal equations, degenerate subsets, and out-of-bounds
/// warps yield a non-converged result instead of throwing.
MatchResult refine_nr(const Interpolant& ref, const Interpolant& def, const SubsetSpec& spec,
                      const WarpVector& w0, double tol = 1e-6, int max_iter = 50);

}  // namespace cdic
