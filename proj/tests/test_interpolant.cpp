#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cdic/errors.hpp"
#include "cdic/interpolant.hpp"
#include "oracles.hpp"

using namespace cdic;

TEST_CASE("integer queries reproduce the stored intensities") {
    const GrayImage img = oracle::random_image(16, 13, 11);
    const Interpolant ip = Interpolant::make(img);
    for (int y = 2; y <= 10; ++y)
        for (int x = 2; x <= 13; ++x)
            CHECK(std::abs(ip.value(x, y) - img.at(x, y)) < 1e-9);
}

TEST_CASE("linear ramp: midpoint query is exact") {
    GrayImage img(12, 12);
    for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 12; ++x) img.at(x, y) = 0.02 * x + 0.03 * y;
    const Interpolant ip = Interpolant::make(img);
    CHECK(ip.value(5.5, 4.0) == doctest::Approx(0.02 * 5.5 + 0.03 * 4.0).epsilon(1e-13));
    CHECK(ip.value(3.25, 7.75) == doctest::Approx(0.02 * 3.25 + 0.03 * 7.75).epsilon(1e-13));
    const auto s = ip.sample(4.7, 6.1);
    CHECK(s.dx == doctest::Approx(0.02).epsilon(1e-10));
    CHECK(s.dy == doctest::Approx(0.03).epsilon(1e-10));
}

TEST_CASE("dense grid matches the textbook natural bicubic spline") {
    const GrayImage img = oracle::random_image(17, 14, 5);
    const Interpolant ip = Interpolant::make(img);
    for (double y = 2.0; y <= 11.0; y += 0.37)
        for (double x = 2.0; x <= 14.0; x += 0.41) {
            const double expect = oracle::bicubic_direct(img.px, x, y);
            CHECK(ip.value(x, y) == doctest::Approx(expect).epsilon(1e-9));
        }
}

TEST_CASE("derivatives agree with central differences") {
    const GrayImage img = oracle::smooth_random_image(20, 20, 3);
    const Interpolant ip = Interpolant::make(img);
    const double h = 1e-6;
    for (double y = 3.1; y < 16.0; y += 2.3)
        for (double x = 3.7; x < 16.0; x += 2.1) {
            const auto s = ip.sample(x, y);
            const double fdx = (ip.value(x + h, y) - ip.value(x - h, y)) / (2 * h);
            const double fdy = (ip.value(x, y + h) - ip.value(x, y - h)) / (2 * h);
            CHECK(s.dx == doctest::Approx(fdx).epsilon(1e-5));
            CHECK(s.dy == doctest::Approx(fdy).epsilon(1e-5));
        }
}

TEST_CASE("evaluation is continuous") {
    const GrayImage img = oracle::random_image(15, 15, 8);
    const Interpolant ip = Interpolant::make(img);
    for (double x = 2.0; x <= 11.9; x += 0.499) {
        CHECK(std::abs(ip.value(x + 1e-6, 6.3) - ip.value(x, 6.3)) < 1e-4);
        CHECK(std::abs(ip.value(7.1, x + 1e-6) - ip.value(7.1, x)) < 1e-4);
    }
}

TEST_CASE("domain is [margin, dim-1-margin]; outside queries throw") {
    const GrayImage img = oracle::random_image(10, 8, 2);
    const Interpolant ip = Interpolant::make(img);
    CHECK_NOTHROW(ip.value(2.0, 2.0));
    CHECK_NOTHROW(ip.value(7.0, 5.0));
    CHECK_THROWS_AS(ip.value(1.999, 4.0), OutOfDomainError);
    CHECK_THROWS_AS(ip.value(7.001, 4.0), OutOfDomainError);
    CHECK_THROWS_AS(ip.value(4.0, 5.5), OutOfDomainError);
    CHECK_THROWS_AS(ip.value(4.0, -1.0), OutOfDomainError);
}

TEST_CASE("images below 4x4 are rejected") {
    CHECK_THROWS_AS(Interpolant::make(GrayImage(3, 8, 0.5)), Error);
    CHECK_THROWS_AS(Interpolant::make(GrayImage(8, 3, 0.5)), Error);
}
