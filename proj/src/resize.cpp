#include "noisent/resize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace noisent {

double catmull_rom(double distance) noexcept {
    constexpr double a = -0.5;
    const double t = std::abs(distance);
    if (t <= 1.0) {
        return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
    }
    if (t < 2.0) {
        return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
    }
    return 0.0;
}

namespace {

struct Taps {
    std::array<int, 4> index;
    std::array<double, 4> weight;
};

std::vector<Taps> plan_axis(int in, int out) {
    std::vector<Taps> plan(out);
    const double scale = static_cast<double>(in) / out;
    for (int d = 0; d < out; ++d) {
        const double src = (d + 0.5) * scale - 0.5;
        const double base = std::floor(src);
        const double frac = src - base;
        for (int k = 0; k < 4; ++k) {
            const int idx = static_cast<int>(base) - 1 + k;
            plan[d].index[k] = std::clamp(idx, 0, in - 1);
            plan[d].weight[k] = catmull_rom(frac - (k - 1));
        }
    }
    return plan;
}

}  // namespace

ImageF32 resize_bicubic(const ImageF32& img, int out_h, int out_w) {
    if (out_h < 1 || out_w < 1) {
        throw std::invalid_argument("resize_bicubic: target size must be positive, got " + std::to_string(out_h) +
                                    "x" + std::to_string(out_w));
    }
    const int in_h = img.height();
    const int in_w = img.width();
    const auto cols = plan_axis(in_w, out_w);
    const auto rows = plan_axis(in_h, out_h);

    ImageF32 out(out_w, out_h);
    std::vector<double> horizontal(static_cast<std::size_t>(in_h) * out_w);
    for (int c = 0; c < ImageF32::kChannels; ++c) {
        const auto src = img.plane(c);
        for (int y = 0; y < in_h; ++y) {
            const float* row = src.data() + static_cast<std::size_t>(y) * in_w;
            double* dst = horizontal.data() + static_cast<std::size_t>(y) * out_w;
            for (int x = 0; x < out_w; ++x) {
                const Taps& t = cols[x];
                dst[x] = t.weight[0] * row[t.index[0]] + t.weight[1] * row[t.index[1]] +
                         t.weight[2] * row[t.index[2]] + t.weight[3] * row[t.index[3]];
            }
        }
        auto plane = out.plane(c);
        for (int y = 0; y < out_h; ++y) {
            const Taps& t = rows[y];
            const double* r0 = horizontal.data() + static_cast<std::size_t>(t.index[0]) * out_w;
            const double* r1 = horizontal.data() + static_cast<std::size_t>(t.index[1]) * out_w;
            const double* r2 = horizontal.data() + static_cast<std::size_t>(t.index[2]) * out_w;
            const double* r3 = horizontal.data() + static_cast<std::size_t>(t.index[3]) * out_w;
            float* dst = plane.data() + static_cast<std::size_t>(y) * out_w;
            for (int x = 0; x < out_w; ++x) {
                dst[x] = static_cast<float>(t.weight[0] * r0[x] + t.weight[1] * r1[x] + t.weight[2] * r2[x] +
                                            t.weight[3] * r3[x]);
            }
        }
    }
    return out;
}

}  // namespace noisent
