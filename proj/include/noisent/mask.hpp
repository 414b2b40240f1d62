#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "noisent/codec.hpp"

namespace noisent {

/// Inpainting mask; 1 marks the region to regenerate.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;  ///< row-major, values 0 or 1

    BinaryMask() = default;
    BinaryMask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

    std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
    std::size_t count() const noexcept;
    double coverage() const noexcept;

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

struct BrushParams {
    int radius_min = 8;
    int radius_max = 48;
    int stroke_min = 1;
    int stroke_max = 4;
    int segment_min = 3;
    int segment_max = 12;
    int step = 2;  ///< pixels between consecutive disk stamps
    double coverage_min = 0.05;
    double coverage_max = 0.40;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument on empty ranges, step outside
    /// [1, max(1, radius_min)], or coverage bounds outside 0 < min <= max < 1.
    void validate() const;
};

/// Straight runs of a stroke; each run starts where the previous one ended.
struct BrushSegment {
    double angle = 0.0;   ///< radians
    double length = 0.0;  ///< pixels
};

struct BrushStroke {
    double x = 0.0;
    double y = 0.0;
    int radius = 1;
    std::vector<BrushSegment> segments;
};

/// Sets every pixel with (x - cx)^2 + (y - cy)^2 <= r^2; returns newly set pixels.
std::size_t stamp_disk(BinaryMask& mask, int cx, int cy, int radius);

/// Stamps a disk at the start and then every `step` pixels along each
/// segment, clamping the brush center to the image. Stops early (returning
/// false) if a stamp would push the white-pixel count above `max_pixels`.
bool paint_stroke(BinaryMask& mask, const BrushStroke& stroke, int step, std::size_t max_pixels);

struct BrushMaskResult {
    BinaryMask mask;
    int strokes = 0;
    bool coverage_met = false;  ///< coverage landed inside [coverage_min, coverage_max]
};

/// Seeded back-and-forth circular-brush simulation.
///
/// Each stroke draws a start point, radius, heading and segment count; after
/// every segment the heading reverses with up to +/-0.35 rad of jitter.
/// Strokes continue while fewer than stroke_min have been drawn or coverage
/// is below coverage_min, up to stroke_max strokes. A stamp that would exceed
/// coverage_max ends generation.
BrushMaskResult gen_brush_mask(int height, int width, const BrushParams& params);

/// Single-channel PNG with values {0, 255}.
Bytes encode_mask_png(const BinaryMask& mask);
BinaryMask decode_mask_png(std::span<const std::uint8_t> bytes);

}  // namespace noisent
