#pragma once

#include <cstdint>
#include <vector>

#include "bboxlab/errors.hpp"

namespace bboxlab {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    bool operator==(const Rgb&) const = default;
};

// Row-major RGB raster, 8 bits per channel.
struct Rgb8Frame {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // width * height * 3

    Rgb8Frame() = default;
    Rgb8Frame(int w, int h)
        : width(w), height(h),
          pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 0) {
        if (w <= 0 || h <= 0) throw ValidationError("frame dimensions must be positive");
    }

    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }

    std::size_t offset(int x, int y) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                static_cast<std::size_t>(x)) * 3;
    }

    Rgb get(int x, int y) const {
        const std::size_t o = offset(x, y);
        return Rgb{pixels[o], pixels[o + 1], pixels[o + 2]};
    }

    void set(int x, int y, Rgb c) {
        const std::size_t o = offset(x, y);
        pixels[o] = c.r;
        pixels[o + 1] = c.g;
        pixels[o + 2] = c.b;
    }

    bool operator==(const Rgb8Frame&) const = default;
};

}  // namespace bboxlab
