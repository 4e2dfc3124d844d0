// The OpenMP kernels must match their serial *_ref twins bitwise.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cdic/kernels.hpp"
#include "cdic/synthetic.hpp"
#include "oracles.hpp"

using namespace cdic;

namespace {

bool bitwise_equal(const Grid2<double>& a, const Grid2<double>& b) {
    if (!a.same_shape(b)) return false;
    for (size_t k = 0; k < a.size(); ++k) {
        const double x = a.v[k], y = b.v[k];
        if (std::isnan(x) != std::isnan(y)) return false;
        if (!std::isnan(x) && x != y) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("prewitt kernel: parallel == serial, several shapes") {
    for (auto [w, h] : {std::pair{3, 3}, {5, 17}, {64, 33}, {128, 128}}) {
        const GrayImage img = oracle::random_image(w, h, 1000 + w);
        Grid2<double> fx1, fy1, fx2, fy2;
        kernels::prewitt(img.px, fx1, fy1);
        kernels::prewitt_ref(img.px, fx2, fy2);
        CHECK(bitwise_equal(fx1, fx2));
        CHECK(bitwise_equal(fy1, fy2));
    }
}

TEST_CASE("bspline prefilter: parallel == serial") {
    for (auto [w, h] : {std::pair{4, 4}, {9, 31}, {100, 41}}) {
        const GrayImage img = oracle::random_image(w, h, 2000 + w);
        Grid2<double> a = img.px, b = img.px;
        kernels::bspline_prefilter(a);
        kernels::bspline_prefilter_ref(b);
        CHECK(bitwise_equal(a, b));
    }
}

TEST_CASE("zncc search: parallel == serial and matches brute argmax") {
    const GrayImage ref = oracle::smooth_random_image(64, 64, 3);
    GrayImage def(64, 64);
    const int sx = 5, sy = -3;
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
            int ux = std::clamp(x - sx, 0, 63), uy = std::clamp(y - sy, 0, 63);
            def.at(x, y) = ref.at(ux, uy);
        }
    const auto a = kernels::zncc_search(ref.px, def.px, 32, 32, 7, 10);
    const auto b = kernels::zncc_search_ref(ref.px, def.px, 32, 32, 7, 10);
    CHECK(a.found);
    CHECK(a.dx == b.dx);
    CHECK(a.dy == b.dy);
    CHECK(a.zncc == b.zncc);
    CHECK(a.dx == sx);
    CHECK(a.dy == sy);
    CHECK(a.zncc == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("rotation render: parallel == serial; identity is bit-exact") {
    const GrayImage img = oracle::smooth_random_image(48, 40, 9);
    const Interpolant ip = Interpolant::make(img);
    Grid2<double> a(48, 40), b(48, 40);

    kernels::render_rotation(ip, 24.0, 1.7, 1.0, a);
    kernels::render_rotation_ref(ip, 24.0, 1.7, 1.0, b);
    CHECK(bitwise_equal(a, b));

    kernels::render_rotation(ip, 24.0, 0.0, 1.0, a);
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 48; ++x) CHECK(a(x, y) == img.at(x, y));
}

TEST_CASE("speckle render: parallel == serial") {
    std::vector<kernels::Blob> blobs;
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> pos(0.0, 96.0), rad(1.0, 4.0);
    for (int i = 0; i < 300; ++i) blobs.push_back({pos(rng), pos(rng), rad(rng)});
    Grid2<double> a(96, 96), b(96, 96);
    kernels::render_speckle(blobs, 1.0, 0.0, a);
    kernels::render_speckle_ref(blobs, 1.0, 0.0, b);
    CHECK(bitwise_equal(a, b));
}

TEST_CASE("thread-count changes do not change kernel results") {
    const GrayImage img = oracle::random_image(50, 37, 4);
    Grid2<double> a = img.px, b = img.px;
    kernels::set_max_threads(1);
    kernels::bspline_prefilter(a);
    kernels::set_max_threads(4);
    kernels::bspline_prefilter(b);
    kernels::set_max_threads(0);
    CHECK(bitwise_equal(a, b));
}
