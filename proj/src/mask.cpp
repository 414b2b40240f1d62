#include "noisent/mask.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "noisent/error.hpp"
#include "noisent/rng.hpp"

namespace noisent {

std::size_t BinaryMask::count() const noexcept {
    std::size_t n = 0;
    for (auto b : bits) {
        n += b;
    }
    return n;
}

double BinaryMask::coverage() const noexcept {
    return bits.empty() ? 0.0 : static_cast<double>(count()) / static_cast<double>(bits.size());
}

void BrushParams::validate() const {
    if (radius_min < 1 || radius_max < radius_min) {
        throw std::invalid_argument("brush: need 1 <= radius_min <= radius_max");
    }
    if (stroke_min < 0 || stroke_max < stroke_min) {
        throw std::invalid_argument("brush: need 0 <= stroke_min <= stroke_max");
    }
    if (segment_min < 1 || segment_max < segment_min) {
        throw std::invalid_argument("brush: need 1 <= segment_min <= segment_max");
    }
    if (step < 1 || step > std::max(1, radius_min)) {
        throw std::invalid_argument("brush: step must be in [1, radius_min] to keep strokes connected");
    }
    if (!(coverage_min > 0.0) || coverage_max < coverage_min || !(coverage_max < 1.0)) {
        throw std::invalid_argument("brush: need 0 < coverage_min <= coverage_max < 1");
    }
}

std::size_t stamp_disk(BinaryMask& mask, int cx, int cy, int radius) {
    std::size_t added = 0;
    const long r2 = static_cast<long>(radius) * radius;
    for (int y = std::max(0, cy - radius); y <= std::min(mask.height - 1, cy + radius); ++y) {
        const long dy = y - cy;
        for (int x = std::max(0, cx - radius); x <= std::min(mask.width - 1, cx + radius); ++x) {
            const long dx = x - cx;
            if (dx * dx + dy * dy <= r2) {
                auto& bit = mask.bits[static_cast<std::size_t>(y) * mask.width + x];
                added += bit == 0 ? 1 : 0;
                bit = 1;
            }
        }
    }
    return added;
}

namespace {

std::size_t disk_gain(const BinaryMask& mask, int cx, int cy, int radius) {
    std::size_t added = 0;
    const long r2 = static_cast<long>(radius) * radius;
    for (int y = std::max(0, cy - radius); y <= std::min(mask.height - 1, cy + radius); ++y) {
        const long dy = y - cy;
        for (int x = std::max(0, cx - radius); x <= std::min(mask.width - 1, cx + radius); ++x) {
            const long dx = x - cx;
            if (dx * dx + dy * dy <= r2 && mask.bits[static_cast<std::size_t>(y) * mask.width + x] == 0) {
                ++added;
            }
        }
    }
    return added;
}

}  // namespace

bool paint_stroke(BinaryMask& mask, const BrushStroke& stroke, int step, std::size_t max_pixels) {
    std::size_t white = mask.count();
    double x = std::clamp(stroke.x, 0.0, mask.width - 1.0);
    double y = std::clamp(stroke.y, 0.0, mask.height - 1.0);
    auto stamp = [&]() {
        const int cx = static_cast<int>(std::lround(x));
        const int cy = static_cast<int>(std::lround(y));
        const std::size_t gain = disk_gain(mask, cx, cy, stroke.radius);
        if (white + gain > max_pixels) {
            return false;
        }
        white += stamp_disk(mask, cx, cy, stroke.radius);
        return true;
    };
    if (!stamp()) {
        return false;
    }
    for (const auto& seg : stroke.segments) {
        const int steps = static_cast<int>(seg.length / step);
        const double ux = std::cos(seg.angle) * step;
        const double uy = std::sin(seg.angle) * step;
        for (int s = 0; s < steps; ++s) {
            x = std::clamp(x + ux, 0.0, mask.width - 1.0);
            y = std::clamp(y + uy, 0.0, mask.height - 1.0);
            if (!stamp()) {
                return false;
            }
        }
    }
    return true;
}

BrushMaskResult gen_brush_mask(int height, int width, const BrushParams& params) {
    params.validate();
    if (height < 2 * params.radius_max || width < 2 * params.radius_max) {
        throw std::invalid_argument("brush: mask " + std::to_string(width) + "x" + std::to_string(height) +
                                    " smaller than twice radius_max");
    }
    constexpr double kPi = 3.14159265358979323846;
    constexpr double kJitter = 0.35;

    Rng rng(params.seed);
    BrushMaskResult result{BinaryMask(width, height), 0, false};
    const double area = static_cast<double>(width) * height;
    const auto max_pixels = static_cast<std::size_t>(std::floor(params.coverage_max * area));
    const double short_side = std::min(width, height);

    bool capped = false;
    while (!capped && result.strokes < params.stroke_max &&
           (result.strokes < params.stroke_min || result.mask.coverage() < params.coverage_min)) {
        BrushStroke stroke;
        stroke.x = rng.uniform(0.0, width - 1.0);
        stroke.y = rng.uniform(0.0, height - 1.0);
        stroke.radius = static_cast<int>(rng.uniform_int(params.radius_min, params.radius_max));
        double angle = rng.uniform(0.0, 2.0 * kPi);
        const auto segments = rng.uniform_int(params.segment_min, params.segment_max);
        const double length = rng.uniform(0.2, 0.6) * short_side;
        for (std::int64_t s = 0; s < segments; ++s) {
            stroke.segments.push_back({angle, length * rng.uniform(0.8, 1.2)});
            angle += kPi + rng.uniform(-kJitter, kJitter);
        }
        capped = !paint_stroke(result.mask, stroke, params.step, max_pixels);
        ++result.strokes;
    }
    const double coverage = result.mask.coverage();
    result.coverage_met = coverage >= params.coverage_min && coverage <= params.coverage_max;
    return result;
}

Bytes encode_mask_png(const BinaryMask& mask) {
    std::vector<std::uint8_t> gray(mask.bits.size());
    for (std::size_t i = 0; i < gray.size(); ++i) {
        gray[i] = mask.bits[i] != 0 ? 255 : 0;
    }
    return encode_png_gray(mask.width, mask.height, gray);
}

BinaryMask decode_mask_png(std::span<const std::uint8_t> bytes) {
    const ImageU8 img = decode_image(bytes);
    BinaryMask mask(img.width(), img.height());
    const auto plane = img.plane(0);
    for (std::size_t i = 0; i < plane.size(); ++i) {
        if (plane[i] != 0 && plane[i] != 255) {
            throw FormatError("mask PNG contains values other than 0 and 255");
        }
        mask.bits[i] = plane[i] != 0 ? 1 : 0;
    }
    return mask;
}

}  // namespace noisent
