#pragma once

// Test helpers and reference implementations. The oracles here are written
// straight from the definitions, without the integral images, pair symmetry
// or rank tricks used by the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "noisent/entropy.hpp"
#include "noisent/image.hpp"
#include "noisent/nlm.hpp"

namespace testing_support {

inline std::filesystem::path fixture(const std::string& name) {
    return std::filesystem::path(NOISENT_FIXTURE_DIR) / name;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("noisent-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline noisent::ImageU8 random_u8(int w, int h, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<int> dist(0, 255);
    noisent::ImageU8 img(w, h);
    for (auto& v : img.samples()) {
        v = static_cast<std::uint8_t>(dist(gen));
    }
    return img;
}

inline noisent::ImageF32 random_f32(int w, int h, std::uint64_t seed, double lo = 0.0, double hi = 255.0) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    noisent::ImageF32 img(w, h);
    for (auto& v : img.samples()) {
        v = static_cast<float>(dist(gen));
    }
    return img;
}

// Whole-sample symmetric reflection by repeated folding.
inline int reflect(int i, int n) {
    if (n == 1) {
        return 0;
    }
    while (i < 0 || i >= n) {
        if (i < 0) {
            i = -i - 1;
        }
        if (i >= n) {
            i = 2 * n - 1 - i;
        }
    }
    return i;
}

// Direct NLM: for every pixel, every candidate in the clipped search window,
// mean squared patch difference over the compared samples, weight exp(-d / h^2).
inline noisent::ImageF32 brute_nlm(const noisent::ImageF32& img, const noisent::NlmParams& p) {
    const int w = img.width();
    const int h = img.height();
    const bool joint = p.channel_mode == noisent::ChannelMode::Joint;
    noisent::ImageF32 out(w, h);
    auto sample = [&](int c, int y, int x) { return static_cast<double>(img.at(c, reflect(y, h), reflect(x, w))); };
    for (int c0 = 0; c0 < 3; ++c0) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double num = 0.0;
                double den = 0.0;
                for (int qy = std::max(0, y - p.search_radius); qy <= std::min(h - 1, y + p.search_radius); ++qy) {
                    for (int qx = std::max(0, x - p.search_radius); qx <= std::min(w - 1, x + p.search_radius); ++qx) {
                        double ss = 0.0;
                        int compared = 0;
                        for (int c = joint ? 0 : c0; c <= (joint ? 2 : c0); ++c) {
                            for (int dy = -p.patch_radius; dy <= p.patch_radius; ++dy) {
                                for (int dx = -p.patch_radius; dx <= p.patch_radius; ++dx) {
                                    const double d = sample(c, y + dy, x + dx) - sample(c, qy + dy, qx + dx);
                                    ss += d * d;
                                    ++compared;
                                }
                            }
                        }
                        const double weight = std::exp(-(ss / compared) / (p.h * p.h));
                        num += weight * img.at(c0, qy, qx);
                        den += weight;
                    }
                }
                out.at(c0, y, x) = static_cast<float>(num / den);
            }
        }
    }
    return out;
}

// Block entropies straight from the histogram definition: B equal intervals
// over [lo, hi], the last one closed, entropy in bits.
inline std::vector<double> brute_block_entropy(const noisent::NoiseMap& m, const noisent::EntropyParams& ep) {
    const int n = ep.grid;
    const int side = ep.canvas / n;
    std::vector<double> lo(3), hi(3);
    for (int c = 0; c < 3; ++c) {
        lo[c] = hi[c] = m.values.at(c, 0, 0);
        for (int y = 0; y < ep.canvas; ++y) {
            for (int x = 0; x < ep.canvas; ++x) {
                lo[c] = std::min<double>(lo[c], m.values.at(c, y, x));
                hi[c] = std::max<double>(hi[c], m.values.at(c, y, x));
            }
        }
    }
    if (ep.range_mode == noisent::RangeMode::Global) {
        const double glo = std::min({lo[0], lo[1], lo[2]});
        const double ghi = std::max({hi[0], hi[1], hi[2]});
        lo.assign(3, glo);
        hi.assign(3, ghi);
    }
    std::vector<double> out;
    for (int c = 0; c < 3; ++c) {
        const double width = (hi[c] - lo[c]) / ep.bins;
        for (int bi = 0; bi < n; ++bi) {
            for (int bj = 0; bj < n; ++bj) {
                std::vector<double> count(ep.bins, 0.0);
                for (int y = bi * side; y < (bi + 1) * side; ++y) {
                    for (int x = bj * side; x < (bj + 1) * side; ++x) {
                        const double v = m.values.at(c, y, x);
                        int k = 0;
                        if (width > 0.0) {
                            // first interval whose upper edge lies above v
                            while (k < ep.bins - 1 && v >= lo[c] + (k + 1) * width) {
                                ++k;
                            }
                        }
                        count[k] += 1.0;
                    }
                }
                double e = 0.0;
                for (double cnt : count) {
                    if (cnt > 0.0) {
                        const double pk = cnt / (static_cast<double>(side) * side);
                        e -= pk * std::log2(pk);
                    }
                }
                out.push_back(e);
            }
        }
    }
    return out;
}

inline double catmull_rom_ref(double t) {
    t = std::abs(t);
    if (t < 1.0) {
        return 1.5 * t * t * t - 2.5 * t * t + 1.0;
    }
    if (t < 2.0) {
        return -0.5 * t * t * t + 2.5 * t * t - 4.0 * t + 2.0;
    }
    return 0.0;
}

// One output sample of the separable bicubic resize, evaluated directly.
inline double bicubic_at(const noisent::ImageF32& img, int c, int oy, int ox, int out_h, int out_w) {
    const double sy = (oy + 0.5) * img.height() / out_h - 0.5;
    const double sx = (ox + 0.5) * img.width() / out_w - 0.5;
    const int fy = static_cast<int>(std::floor(sy));
    const int fx = static_cast<int>(std::floor(sx));
    double acc = 0.0;
    for (int ky = fy - 1; ky <= fy + 2; ++ky) {
        for (int kx = fx - 1; kx <= fx + 2; ++kx) {
            const int cy = std::clamp(ky, 0, img.height() - 1);
            const int cx = std::clamp(kx, 0, img.width() - 1);
            acc += catmull_rom_ref(sy - ky) * catmull_rom_ref(sx - kx) * img.at(c, cy, cx);
        }
    }
    return acc;
}

// AUC by enumerating every (positive, negative) pair.
inline double pair_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) {
            continue;
        }
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) {
                continue;
            }
            pairs += 1.0;
            if (scores[i] > scores[j]) {
                wins += 1.0;
            } else if (scores[i] == scores[j]) {
                wins += 0.5;
            }
        }
    }
    return wins / pairs;
}

}  // namespace testing_support
