#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cdic/errors.hpp"
#include "cdic/image.hpp"
#include "oracles.hpp"

using namespace cdic;

TEST_CASE("constant image has zero gradients and zero MIG") {
    GrayImage img(16, 12, 0.37);
    const GradientField g = gradients(img);
    for (size_t k = 0; k < g.fx.size(); ++k) {
        CHECK(g.fx.v[k] == 0.0);
        CHECK(g.fy.v[k] == 0.0);
    }
    CHECK(mean_intensity_gradient(img) == 0.0);
}

TEST_CASE("ramp image: interior f_x equals the slope, f_y is zero") {
    const double c = 0.01;
    GrayImage img(20, 14);
    for (int y = 0; y < 14; ++y)
        for (int x = 0; x < 20; ++x) img.at(x, y) = c * x;
    const GradientField g = gradients(img);
    for (int y = 1; y < 13; ++y)
        for (int x = 1; x < 19; ++x) {
            CHECK(g.fx(x, y) == doctest::Approx(c).epsilon(1e-12));
            CHECK(g.fy(x, y) == doctest::Approx(0.0).epsilon(1e-12));
        }
    // borders replicate the nearest interior value
    CHECK(g.fx(0, 5) == g.fx(1, 5));
    CHECK(g.fx(19, 5) == g.fx(18, 5));
    CHECK(g.fy(7, 0) == g.fy(7, 1));
}

TEST_CASE("random 5x5 gradients match the brute-force convolution") {
    const GrayImage img = oracle::random_image(5, 5, 42);
    const GradientField g = gradients(img);
    for (int y = 1; y < 4; ++y)
        for (int x = 1; x < 4; ++x) {
            CHECK(g.fx(x, y) ==
                  doctest::Approx(oracle::prewitt_fx_at(img.px, x, y)).epsilon(1e-12));
            CHECK(g.fy(x, y) ==
                  doctest::Approx(oracle::prewitt_fy_at(img.px, x, y)).epsilon(1e-12));
        }
}

TEST_CASE("gradient linearity on interior pixels") {
    const GrayImage a = oracle::random_image(11, 9, 1);
    const GrayImage b = oracle::random_image(11, 9, 2);
    const double ca = 0.4, cb = 0.3;
    GrayImage mix(11, 9);
    for (size_t k = 0; k < mix.px.size(); ++k) mix.px.v[k] = ca * a.px.v[k] + cb * b.px.v[k];
    const GradientField ga = gradients(a), gb = gradients(b), gm = gradients(mix);
    for (int y = 1; y < 8; ++y)
        for (int x = 1; x < 10; ++x) {
            CHECK(gm.fx(x, y) ==
                  doctest::Approx(ca * ga.fx(x, y) + cb * gb.fx(x, y)).epsilon(1e-12));
            CHECK(gm.fy(x, y) ==
                  doctest::Approx(ca * ga.fy(x, y) + cb * gb.fy(x, y)).epsilon(1e-12));
        }
}

TEST_CASE("MIG matches the direct double-loop evaluation") {
    const GrayImage img = oracle::random_image(23, 17, 7);
    CHECK(mean_intensity_gradient(img) == doctest::Approx(oracle::mig_direct(img)).epsilon(1e-12));
}

TEST_CASE("MIG: high-contrast pattern scores above its blurred copy") {
    GrayImage sharp(32, 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) sharp.at(x, y) = ((x / 2 + y / 2) % 2) ? 0.9 : 0.1;
    GrayImage blurred = sharp;
    for (int pass = 0; pass < 2; ++pass) {
        Grid2<double> out(32, 32);
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x) {
                double acc = 0.0;
                int n = 0;
                for (int j = -1; j <= 1; ++j)
                    for (int i = -1; i <= 1; ++i)
                        if (blurred.px.in_bounds(x + i, y + j)) {
                            acc += blurred.px(x + i, y + j);
                            ++n;
                        }
                out(x, y) = acc / n;
            }
        blurred.px = out;
    }
    CHECK(mean_intensity_gradient(sharp) > mean_intensity_gradient(blurred));
}

TEST_CASE("MIG is offset-invariant and scales with contrast") {
    const GrayImage base = oracle::random_image(19, 15, 9);
    GrayImage scaled = base, shifted = base;
    for (double& v : scaled.px.v) v *= 0.5;
    for (double& v : shifted.px.v) v = v * 0.5 + 0.25;  // stays inside [0,1]
    const double m_scaled = mean_intensity_gradient(scaled);
    const double m_shifted = mean_intensity_gradient(shifted);
    const double m_base = mean_intensity_gradient(base);
    CHECK(m_shifted == doctest::Approx(m_scaled).epsilon(1e-12));
    CHECK(m_scaled == doctest::Approx(0.5 * m_base).epsilon(1e-12));
}

TEST_CASE("image validation rejects tiny or out-of-range images") {
    CHECK_THROWS_AS(validate_image(GrayImage(2, 8)), Error);
    GrayImage bad(5, 5, 0.5);
    bad.at(2, 2) = 1.5;
    CHECK_THROWS_AS(validate_image(bad), Error);
    bad.at(2, 2) = std::nan("");
    CHECK_THROWS_AS(validate_image(bad), Error);
}
