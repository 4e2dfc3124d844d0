#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cdic/correlation.hpp"
#include "cdic/errors.hpp"
#include "cdic/synthetic.hpp"
#include "oracles.hpp"

using namespace cdic;

namespace {

// Deformed image carrying a uniform translation (u, v): samples the reference
// interpolant at (x - u, y - v); pixels without a source keep the reference.
GrayImage translate_image(const GrayImage& ref, double u, double v) {
    const Interpolant ip = Interpolant::make(ref);
    GrayImage out = ref;
    for (int y = 0; y < ref.height(); ++y)
        for (int x = 0; x < ref.width(); ++x)
            if (ip.in_domain(x - u, y - v))
                out.at(x, y) = std::clamp(ip.value(x - u, y - v), 0.0, 1.0);
    return out;
}

std::vector<double> subset_values(const Interpolant& ip, const SubsetSpec& spec,
                                  const WarpVector& w) {
    std::vector<double> out;
    for (int j = -spec.half_width; j <= spec.half_width; ++j)
        for (int i = -spec.half_width; i <= spec.half_width; ++i) {
            const auto [x, y] = warp_point(spec, w, i, j);
            out.push_back(ip.value(x, y));
        }
    return out;
}

WarpVector small_random_warp(std::mt19937_64& rng, int order) {
    std::uniform_real_distribution<double> t(-1.5, 1.5), g(-0.02, 0.02), s(-0.001, 0.001);
    WarpVector w;
    w.order = order;
    w.p[WarpVector::U] = t(rng);
    w.p[WarpVector::V] = t(rng);
    for (int i = 2; i < 6; ++i) w.p[i] = g(rng);
    if (order == 2)
        for (int i = 6; i < 12; ++i) w.p[i] = s(rng);
    return w;
}

}  // namespace

TEST_CASE("warp_point: identity, translation, second-order curvature") {
    const SubsetSpec spec{100, 80, 10};
    WarpVector zero;
    auto [x0, y0] = warp_point(spec, zero, 4.0, -7.0);
    CHECK(x0 == 104.0);
    CHECK(y0 == 73.0);

    const WarpVector t = WarpVector::translation(5.0, 3.0);
    auto [x1, y1] = warp_point(spec, t, 0.0, 0.0);
    CHECK(x1 == 105.0);
    CHECK(y1 == 83.0);

    WarpVector q;
    q.order = 2;
    q.p[WarpVector::UXX] = 0.02;
    auto [x2, y2] = warp_point(spec, q, 10.0, 0.0);
    CHECK(x2 == doctest::Approx(100.0 + 10.0 + 0.5 * 0.02 * 100.0).epsilon(1e-15));
    CHECK(y2 == 80.0);
}

TEST_CASE("order-2 warp with zero curvature equals order-1 exactly") {
    std::mt19937_64 rng(4);
    const SubsetSpec spec{50, 50, 8};
    for (int rep = 0; rep < 50; ++rep) {
        WarpVector w1 = small_random_warp(rng, 1);
        WarpVector w2 = w1;
        w2.order = 2;
        for (int i = 6; i < 12; ++i) w2.p[i] = 0.0;
        std::uniform_real_distribution<double> d(-8.0, 8.0);
        const double dx = d(rng), dy = d(rng);
        const auto [xa, ya] = warp_point(spec, w1, dx, dy);
        const auto [xb, yb] = warp_point(spec, w2, dx, dy);
        CHECK(xa == xb);
        CHECK(ya == yb);
    }
}

TEST_CASE("znssd: perfect match, lighting invariance, oracle agreement") {
    const GrayImage ref = oracle::smooth_random_image(48, 48, 21);
    const Interpolant rip = Interpolant::make(ref);
    const SubsetSpec spec{24, 24, 7};

    SUBCASE("def = ref with zero warp is a perfect match") {
        CHECK(znssd_cost(rip, rip, spec, WarpVector{}) < 1e-10);
    }

    SUBCASE("affine intensity transform leaves the cost at zero") {
        GrayImage lit = ref;
        for (double& v : lit.px.v) v = 0.7 * v + 0.1;
        const Interpolant lip = Interpolant::make(lit);
        CHECK(znssd_cost(rip, lip, spec, WarpVector{}) < 1e-8);
    }

    SUBCASE("random subsets and warps match the naive double sum") {
        std::mt19937_64 rng(33);
        for (int rep = 0; rep < 20; ++rep) {
            const SubsetSpec s{20 + rep % 8, 22 + rep % 5, 3};  // 7x7 subsets
            const WarpVector w = small_random_warp(rng, rep % 2 ? 2 : 1);
            const auto f = subset_values(rip, s, WarpVector{});
            const auto g = subset_values(rip, s, w);
            const double expect = oracle::znssd_direct(f, g);
            CHECK(znssd_cost(rip, rip, s, w) == doctest::Approx(expect).epsilon(1e-12));
        }
    }

    SUBCASE("cost is invariant under deformed-image scaling in [0.5, 2]") {
        // scale around the image mean so values stay in [0,1]
        for (double a : {0.5, 0.8, 1.3, 2.0}) {
            GrayImage lit = ref;
            for (double& v : lit.px.v) v = std::clamp(0.5 + a * (v - 0.5) * 0.4, 0.0, 1.0);
            const Interpolant lip = Interpolant::make(lit);
            GrayImage base = ref;
            for (double& v : base.px.v) v = std::clamp(0.5 + (v - 0.5) * 0.4, 0.0, 1.0);
            const Interpolant bip = Interpolant::make(base);
            const double c0 = znssd_cost(rip, bip, spec, WarpVector{});
            const double c1 = znssd_cost(rip, lip, spec, WarpVector{});
            CHECK(std::abs(c1 - c0) < 1e-8);
        }
    }

    SUBCASE("degenerate subset throws") {
        GrayImage flat(48, 48, 0.5);
        const Interpolant fip = Interpolant::make(flat);
        CHECK_THROWS_AS(znssd_cost(fip, rip, spec, WarpVector{}), DegenerateSubsetError);
    }

    SUBCASE("warp leaving the image throws") {
        CHECK_THROWS_AS(znssd_cost(rip, rip, spec, WarpVector::translation(200.0, 0.0)),
                        OutOfDomainError);
    }
}

TEST_CASE("zncc_from_znssd endpoints") {
    CHECK(zncc_from_znssd(0.0) == 1.0);
    CHECK(zncc_from_znssd(2.0) == 0.0);
    CHECK(zncc_from_znssd(4.0) == -1.0);
}

TEST_CASE("Eq.-2 identity: 1 - 0.5*znssd equals the directly evaluated ZNCC") {
    const GrayImage ref = oracle::smooth_random_image(40, 40, 13);
    const Interpolant rip = Interpolant::make(ref);
    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 25; ++rep) {
        const SubsetSpec s{18 + rep % 6, 19 + rep % 7, 4};
        const WarpVector w = small_random_warp(rng, 1);
        const auto f = subset_values(rip, s, WarpVector{});
        const auto g = subset_values(rip, s, w);
        const double zncc = oracle::zncc_direct(f, g);
        CHECK(zncc_from_znssd(znssd_cost(rip, rip, s, w)) ==
              doctest::Approx(zncc).epsilon(1e-10));
    }
}

TEST_CASE("initial_guess finds integer shifts") {
    const GrayImage ref = oracle::smooth_random_image(80, 80, 55);

    SUBCASE("pure integer shift (7, -4)") {
        GrayImage def(80, 80);
        for (int y = 0; y < 80; ++y)
            for (int x = 0; x < 80; ++x)
                def.at(x, y) = ref.at(std::clamp(x - 7, 0, 79), std::clamp(y + 4, 0, 79));
        const auto g = initial_guess(ref, def, SubsetSpec{40, 40, 7}, 10);
        CHECK(g.dx == 7);
        CHECK(g.dy == -4);
    }

    SUBCASE("def = ref gives (0,0) with zncc 1") {
        const auto g = initial_guess(ref, ref, SubsetSpec{40, 40, 7}, 5);
        CHECK(g.dx == 0);
        CHECK(g.dy == 0);
        CHECK(g.zncc == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("shift (3,2) survives sigma = 0.01 noise; brute force agrees") {
        GrayImage def(80, 80);
        std::mt19937_64 rng(2);
        std::normal_distribution<double> noise(0.0, 0.01);
        for (int y = 0; y < 80; ++y)
            for (int x = 0; x < 80; ++x)
                def.at(x, y) = std::clamp(
                    ref.at(std::clamp(x - 3, 0, 79), std::clamp(y - 2, 0, 79)) + noise(rng),
                    0.0, 1.0);
        const SubsetSpec spec{40, 40, 9};
        const auto g = initial_guess(ref, def, spec, 8);
        CHECK(g.dx == 3);
        CHECK(g.dy == 2);
        // brute-force confirmation of the argmax
        double best = -2.0;
        int bx = 0, by = 0;
        for (int dy = -8; dy <= 8; ++dy)
            for (int dx = -8; dx <= 8; ++dx) {
                std::vector<double> f, gg;
                for (int j = -9; j <= 9; ++j)
                    for (int i = -9; i <= 9; ++i) {
                        f.push_back(ref.at(40 + i, 40 + j));
                        gg.push_back(def.at(40 + dx + i, 40 + dy + j));
                    }
                const double z = oracle::zncc_direct(f, gg);
                if (z > best) {
                    best = z;
                    bx = dx;
                    by = dy;
                }
            }
        CHECK(g.dx == bx);
        CHECK(g.dy == by);
        CHECK(g.zncc == doctest::Approx(best).epsilon(1e-12));
    }

    SUBCASE("fully flat window throws") {
        GrayImage flat(80, 80, 0.25);
        CHECK_THROWS_AS(initial_guess(flat, ref, SubsetSpec{40, 40, 7}, 5),
                        DegenerateSubsetError);
    }
}

TEST_CASE("refine_nr recovers subpixel warps") {
    synthetic::SpeckleSpec spec;
    spec.width = spec.height = 96;
    spec.count = 184;  // ~0.02 blobs per px^2
    spec.radius_mean = 2.5;
    spec.background = 0.90;
    spec.foreground = 0.55;
    spec.mig_floor = 0.0;
    const GrayImage ref = synthetic::generate_speckle(spec).image;
    const Interpolant rip = Interpolant::make(ref);

    SUBCASE("def = ref converges immediately") {
        const auto m = refine_nr(rip, rip, SubsetSpec{48, 48, 10}, WarpVector{});
        CHECK(m.converged);
        CHECK(m.iterations <= 2);
        CHECK(m.znssd < 1e-10);
        CHECK(m.zncc == doctest::Approx(1.0 - 0.5 * m.znssd).epsilon(1e-12));
    }

    SUBCASE("subpixel translation (0.5, 0.25) recovered within 0.01 px") {
        const GrayImage def = translate_image(ref, 0.5, 0.25);
        const Interpolant dip = Interpolant::make(def);
        for (int cx : {30, 48, 64})
            for (int cy : {30, 48, 64}) {
                const auto m = refine_nr(rip, dip, SubsetSpec{cx, cy, 10},
                                         WarpVector::translation(1.0, 0.0));
                REQUIRE(m.converged);
                CHECK(m.warp.u() == doctest::Approx(0.5).epsilon(0.02));
                CHECK(std::abs(m.warp.u() - 0.5) < 0.01);
                CHECK(std::abs(m.warp.v() - 0.25) < 0.01);
            }
    }

    SUBCASE("every shift in {0.1, 0.25, 0.5, 0.75} px is recovered to 0.01 px") {
        for (double shift : {0.1, 0.25, 0.5, 0.75}) {
            const GrayImage def = translate_image(ref, shift, 0.0);
            const Interpolant dip = Interpolant::make(def);
            const auto m = refine_nr(rip, dip, SubsetSpec{48, 48, 10}, WarpVector{});
            REQUIRE(m.converged);
            CHECK(std::abs(m.warp.u() - shift) < 0.01);
            CHECK(std::abs(m.warp.v()) < 0.01);
        }
    }

    SUBCASE("small rotation: displacement error below 0.02 px, first-order warp") {
        const GrayImage def = synthetic::render_deformed(ref, {48.0, 0.3});
        const Interpolant dip = Interpolant::make(def);
        for (int cx : {32, 48, 70})
            for (int cy : {40, 60}) {
                const Vec2 truth = oracle::rotation_direct(48.0, 0.3, cx, cy);
                const auto m = refine_nr(rip, dip, SubsetSpec{cx, cy, 10},
                                         WarpVector::translation(std::round(truth.x),
                                                                 std::round(truth.y)));
                REQUIRE(m.converged);
                CHECK(std::abs(m.warp.u() - truth.x) < 0.02);
                CHECK(std::abs(m.warp.v() - truth.y) < 0.02);
            }
    }

    SUBCASE("ZNSSD never increases from the initial guess to the result") {
        const GrayImage def = translate_image(ref, 0.37, -0.21);
        const Interpolant dip = Interpolant::make(def);
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> d(-1.0, 1.0);
        for (int rep = 0; rep < 10; ++rep) {
            const WarpVector w0 = WarpVector::translation(d(rng), d(rng));
            const SubsetSpec spec{40 + rep, 50, 9};
            const double c0 = znssd_cost(rip, dip, spec, w0);
            const auto m = refine_nr(rip, dip, spec, w0);
            CHECK(m.znssd <= c0 + 1e-12);
        }
    }

    SUBCASE("degenerate and out-of-bounds inputs do not crash") {
        GrayImage flat(96, 96, 0.5);
        const Interpolant fip = Interpolant::make(flat);
        const auto m1 = refine_nr(fip, rip, SubsetSpec{48, 48, 10}, WarpVector{});
        CHECK_FALSE(m1.converged);
        const auto m2 = refine_nr(rip, fip, SubsetSpec{48, 48, 10}, WarpVector{});
        CHECK_FALSE(m2.converged);  // flat deformed side: singular normal equations
        const auto m3 =
            refine_nr(rip, rip, SubsetSpec{48, 48, 10}, WarpVector::translation(300.0, 0.0));
        CHECK_FALSE(m3.converged);
    }
}
