#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cdic/errors.hpp"
#include "cdic/synthetic.hpp"
#include "oracles.hpp"

using namespace cdic;
using namespace cdic::synthetic;

TEST_CASE("eval_rotation: identity, quarter turn, rotation-matrix oracle") {
    CHECK(eval_rotation({512.0, 0.0}, 300.0, 40.0).x == 0.0);
    CHECK(eval_rotation({512.0, 0.0}, 300.0, 40.0).y == 0.0);

    const Vec2 q = eval_rotation({512.0, 90.0}, 512.0, 100.0);
    CHECK(q.x == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(q.y == doctest::Approx(-100.0).epsilon(1e-12));

    const Vec2 a = eval_rotation({100.0, 0.6}, 130.0, 40.0);
    const Vec2 b = oracle::rotation_direct(100.0, 0.6, 130.0, 40.0);
    CHECK(a.x == doctest::Approx(b.x).epsilon(1e-9));
    CHECK(a.y == doctest::Approx(b.y).epsilon(1e-9));
}

TEST_CASE("eval_rotation edge behavior on y = 0") {
    CHECK(eval_rotation({64.0, 5.0}, 64.0, 0.0).x == 0.0);
    CHECK_THROWS_AS(eval_rotation({64.0, 5.0}, 63.0, 0.0), OutOfDomainError);
    CHECK_THROWS_AS(eval_rotation({64.0, 5.0}, 70.0, -1.0), OutOfDomainError);
}

TEST_CASE("rotation is an isometry and composes additively") {
    const RotationField f1{200.0, 2.5};
    const RotationField f2{200.0, 4.0};
    for (double x : {150.0, 210.0, 260.0})
        for (double y : {30.0, 120.0, 400.0}) {
            const Vec2 d1 = eval_rotation(f1, x, y);
            const double r0 = std::hypot(x - 200.0, y);
            const double r1 = std::hypot(x + d1.x - 200.0, y + d1.y);
            CHECK(r1 == doctest::Approx(r0).epsilon(1e-9));

            const Vec2 d2 = eval_rotation(f2, x + d1.x, y + d1.y);
            const Vec2 d12 = eval_rotation({200.0, 6.5}, x, y);
            CHECK(d1.x + d2.x == doctest::Approx(d12.x).epsilon(1e-6));
            CHECK(d1.y + d2.y == doctest::Approx(d12.y).epsilon(1e-6));
        }
}

TEST_CASE("generate_speckle: determinism, zero-count, default quality") {
    SpeckleSpec small;
    small.width = small.height = 128;
    small.count = 260;
    small.mig_floor = 0.0;

    SUBCASE("same seed twice is bit-identical") {
        const auto a = generate_speckle(small);
        const auto b = generate_speckle(small);
        CHECK(a.image.px.v == b.image.px.v);
        SpeckleSpec other = small;
        other.rng_seed = 2;
        CHECK(generate_speckle(other).image.px.v != a.image.px.v);
    }

    SUBCASE("zero speckles give a constant image with MIG 0") {
        SpeckleSpec none = small;
        none.count = 0;
        const auto r = generate_speckle(none);
        CHECK(r.mig == 0.0);
        for (double v : r.image.px.v) CHECK(v == none.background);
    }

    SUBCASE("unreachable floor throws after max_attempts") {
        SpeckleSpec hard = small;
        hard.mig_floor = 1e6;
        hard.max_attempts = 2;
        CHECK_THROWS_AS(generate_speckle(hard), Error);
    }

    SUBCASE("the default 1024x1024 spec clears the MIG floor") {
        const auto r = generate_speckle(SpeckleSpec{});
        CHECK(r.mig >= 20.0);
        CHECK(r.image.width() == 1024);
    }
}

TEST_CASE("render_deformed: identity, round trip, background fill") {
    SpeckleSpec spec;
    spec.width = spec.height = 160;
    spec.count = 320;
    spec.radius_mean = 2.5;
    spec.background = 0.9;
    spec.foreground = 0.55;
    spec.mig_floor = 0.0;
    const GrayImage ref = generate_speckle(spec).image;

    SUBCASE("zero angle reproduces the input bit-exactly away from the margin") {
        const GrayImage out = render_deformed(ref, {80.0, 0.0});
        for (int y = 2; y < 158; ++y)
            for (int x = 2; x < 158; ++x) CHECK(out.at(x, y) == ref.at(x, y));
    }

    SUBCASE("rotating forward then back recovers the image") {
        const GrayImage fwd = render_deformed(ref, {80.0, 4.0});
        const GrayImage back = render_deformed(fwd, {80.0, -4.0});
        double diff = 0.0;
        int n = 0;
        for (int y = 20; y < 140; ++y)
            for (int x = 20; x < 140; ++x) {
                diff += std::abs(back.at(x, y) - ref.at(x, y));
                ++n;
            }
        CHECK(diff / n < 0.01);
    }

    SUBCASE("pixels rotated in from outside take the background value") {
        const GrayImage out = render_deformed(ref, {80.0, 12.0}, 1.0);
        // the wedge below the top edge, left of center, has no source
        CHECK(out.at(4, 3) == 1.0);
    }
}

TEST_CASE("small-scale benchmark behaves per mode") {
    SpeckleSpec spec;
    spec.width = spec.height = 256;
    spec.count = 1310;
    spec.radius_mean = 2.5;
    spec.background = 0.9;
    spec.foreground = 0.55;
    spec.mig_floor = 0.0;
    const GrayImage ref = generate_speckle(spec).image;

    BenchmarkOptions opts;
    opts.frames = 3;
    opts.alpha_max_deg = 1.2;
    opts.roi_w = 160;
    opts.roi_h = 160;
    opts.subset_half = 8;
    opts.step = 8;
    opts.update_interval = 1;
    int sink_calls = 0;
    opts.frame_sink = [&](int, const GrayImage&) { ++sink_calls; };

    const auto rows = run_benchmark(ref, opts);
    CHECK(sink_calls == 4);
    REQUIRE(rows.size() == 9);
    for (const auto& r : rows) {
        INFO(mode_name(r.mode), " frame ", r.frame);
        CHECK_FALSE(r.frame_failed);
        CHECK(r.mae_x < 0.05);
        CHECK(r.mae_y < 0.05);
        CHECK(r.n_valid > 200);
    }
    // buffered mode ordering, pointwise by frame
    for (int k = 1; k <= 3; ++k) {
        double one = 0, multi = 0, inc = 0;
        for (const auto& r : rows)
            if (r.frame == k) {
                if (r.mode == Mode::OneSeed) one = ordering_metric_x(r);
                if (r.mode == Mode::MultiSeed) multi = ordering_metric_x(r);
                if (r.mode == Mode::IncrementalMultiSeed) inc = ordering_metric_x(r);
            }
        CHECK(inc <= multi + 0.02);
        CHECK(multi <= one + 0.02);
    }
}

TEST_CASE("single identity frame yields zero MAE in every mode") {
    SpeckleSpec spec;
    spec.width = spec.height = 192;
    spec.count = 737;
    spec.radius_mean = 2.5;
    spec.background = 0.9;
    spec.foreground = 0.55;
    spec.mig_floor = 0.0;
    const GrayImage ref = generate_speckle(spec).image;

    BenchmarkOptions opts;
    opts.frames = 1;
    opts.alpha_max_deg = 0.0;
    opts.roi_w = 96;
    opts.roi_h = 96;
    opts.subset_half = 8;
    opts.step = 8;
    const auto rows = run_benchmark(ref, opts);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
        CHECK(r.mae_x < 0.005);
        CHECK(r.mae_y < 0.005);
        CHECK(r.n_invalid == 0);
    }
}
