#include "noisent/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "noisent/resize.hpp"
#include "noisent/rng.hpp"

namespace noisent {

void SynthParams::validate() const {
    if (size < 16 || size % 2 != 0) {
        throw std::invalid_argument("synth: size must be an even number >= 16");
    }
    if (count_per_class < 1) {
        throw std::invalid_argument("synth: count_per_class must be >= 1");
    }
    if (!(sigma_min > 0.0) || sigma_max < sigma_min) {
        throw std::invalid_argument("synth: need 0 < sigma_min <= sigma_max");
    }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Wave {
    double fx, fy, phase;
    std::array<double, 3> amplitude;
};

struct Blob {
    double cx, cy, radius;
    std::array<double, 3> amplitude;
};

/// Continuous scene over the unit square.
class Scene {
public:
    explicit Scene(Rng& rng) {
        for (auto& b : base_) {
            b = rng.uniform(80.0, 170.0);
        }
        waves_.resize(static_cast<std::size_t>(rng.uniform_int(3, 5)));
        for (auto& w : waves_) {
            const double cycles = rng.uniform(0.5, 3.0);
            const double angle = rng.uniform(0.0, 2.0 * kPi);
            w.fx = cycles * std::cos(angle);
            w.fy = cycles * std::sin(angle);
            w.phase = rng.uniform(0.0, 2.0 * kPi);
            const double shared = rng.uniform(8.0, 22.0);
            for (auto& a : w.amplitude) {
                a = shared * rng.uniform(0.6, 1.2);
            }
        }
        blobs_.resize(static_cast<std::size_t>(rng.uniform_int(1, 3)));
        for (auto& b : blobs_) {
            b.cx = rng.uniform(0.1, 0.9);
            b.cy = rng.uniform(0.1, 0.9);
            b.radius = rng.uniform(0.08, 0.3);
            const double shared = rng.uniform(-40.0, 40.0);
            for (auto& a : b.amplitude) {
                a = shared * rng.uniform(0.6, 1.2);
            }
        }
    }

    double operator()(int c, double u, double v) const {
        double value = base_[c];
        for (const auto& w : waves_) {
            value += w.amplitude[c] * std::sin(2.0 * kPi * (w.fx * u + w.fy * v) + w.phase);
        }
        for (const auto& b : blobs_) {
            const double du = u - b.cx;
            const double dv = v - b.cy;
            value += b.amplitude[c] * std::exp(-(du * du + dv * dv) / (2.0 * b.radius * b.radius));
        }
        return std::clamp(value, 20.0, 235.0);
    }

private:
    std::array<double, 3> base_{};
    std::vector<Wave> waves_;
    std::vector<Blob> blobs_;
};

ImageF32 sample_scene(const Scene& scene, int side) {
    ImageF32 img(side, side);
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < side; ++y) {
            const double v = (y + 0.5) / side;
            for (int x = 0; x < side; ++x) {
                img.at(c, y, x) = static_cast<float>(scene(c, (x + 0.5) / side, v));
            }
        }
    }
    return img;
}

}  // namespace

SynthPair render_synthetic_pair(const SynthParams& params, int scene_index) {
    params.validate();
    Rng rng(mix_seed(params.seed, static_cast<std::uint64_t>(scene_index)));
    const Scene scene(rng);
    const double sigma = rng.uniform(params.sigma_min, params.sigma_max);

    ImageF32 noisy = sample_scene(scene, params.size);
    for (float& v : noisy.samples()) {
        v = static_cast<float>(v + rng.normal(0.0, sigma));
    }

    const ImageU8 half = to_u8(sample_scene(scene, params.size / 2));
    const ImageF32 upsampled = resize_bicubic(to_float(half), params.size, params.size);

    return SynthPair{to_u8(noisy), to_u8(upsampled), sigma};
}

}  // namespace noisent
