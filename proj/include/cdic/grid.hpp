#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace cdic {

/// Dense row-major 2D array. x indexes columns, y indexes rows.
template <typename T>
struct Grid2 {
    int w = 0, h = 0;
    std::vector<T> v;

    Grid2() = default;
    Grid2(int width, int height, T fill = T{})
        : w(width), h(height), v(static_cast<size_t>(width) * height, fill) {}

    T& operator()(int x, int y) {
        assert(in_bounds(x, y));
        return v[static_cast<size_t>(y) * w + x];
    }
    const T& operator()(int x, int y) const {
        assert(in_bounds(x, y));
        return v[static_cast<size_t>(y) * w + x];
    }

    bool in_bounds(int x, int y) const { return x >= 0 && x < w && y >= 0 && y < h; }
    size_t size() const { return v.size(); }
    bool same_shape(const Grid2& o) const { return w == o.w && h == o.h; }
};

struct Vec2 {
    double x = 0.0, y = 0.0;
};

}  // namespace cdic
