#include "noisent/nlm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "noisent/binio.hpp"

namespace noisent {

void NlmParams::validate() const {
    if (patch_radius < 1) {
        throw std::invalid_argument("nlm: patch_radius must be >= 1");
    }
    if (search_radius < patch_radius) {
        throw std::invalid_argument("nlm: search_radius must be >= patch_radius");
    }
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw std::invalid_argument("nlm: h must be positive and finite");
    }
}

int mirror_index(int i, int n) noexcept {
    if (n == 1) {
        return 0;
    }
    const int period = 2 * n;
    int m = i % period;
    if (m < 0) {
        m += period;
    }
    return m < n ? m : period - 1 - m;
}

namespace {

/// Mirror-padded copy of one plane with `pad` extra samples on every side.
std::vector<double> pad_plane(std::span<const float> plane, int width, int height, int pad) {
    const int pw = width + 2 * pad;
    const int ph = height + 2 * pad;
    std::vector<double> out(static_cast<std::size_t>(pw) * ph);
    for (int y = 0; y < ph; ++y) {
        const int sy = mirror_index(y - pad, height);
        for (int x = 0; x < pw; ++x) {
            out[static_cast<std::size_t>(y) * pw + x] = plane[static_cast<std::size_t>(sy) * width + mirror_index(x - pad, width)];
        }
    }
    return out;
}

/// Denoises the channels in `group` with one shared weight per (i, j) pair.
void denoise_group(const ImageF32& img, std::span<const int> group, const NlmParams& p, ImageF32& out) {
    const int w = img.width();
    const int h = img.height();
    const int r = p.patch_radius;
    const int big_r = p.search_radius;
    const int pw = w + 2 * r;
    const double inv_h2 = 1.0 / (p.h * p.h);

    std::vector<std::vector<double>> padded;
    padded.reserve(group.size());
    for (int c : group) {
        padded.push_back(pad_plane(img.plane(c), w, h, r));
    }

    const std::size_t n = static_cast<std::size_t>(w) * h;
    // Self weight is exp(0) = 1.
    std::vector<double> den(n, 1.0);
    std::vector<std::vector<double>> num;
    num.reserve(group.size());
    for (int c : group) {
        const auto plane = img.plane(c);
        num.emplace_back(plane.begin(), plane.end());
    }
    std::vector<double> integral;

    const int side = 2 * r + 1;
    const double inv_norm = inv_h2 / (static_cast<double>(side) * side * static_cast<double>(group.size()));

    // d(i, j) is symmetric, so each unordered pair {i, i + offset} is visited once
    // through the half-window of offsets that come after (0, 0) in raster order.
    for (int dy = 0; dy <= big_r; ++dy) {
        const int y1 = h - dy;
        if (y1 <= 0) {
            continue;
        }
        for (int dx = (dy == 0 ? 1 : -big_r); dx <= big_r; ++dx) {
            const int x0 = std::max(0, -dx);
            const int x1 = std::min(w, w - dx);
            if (x0 >= x1) {
                continue;
            }
            // Squared differences over the padded region covering every patch of
            // the valid centers, accumulated into an integral image.
            const int rh = y1 + 2 * r;
            const int rw = (x1 - x0) + 2 * r;
            const int stride = rw + 1;
            integral.assign(static_cast<std::size_t>(rh + 1) * stride, 0.0);
            for (int py = 0; py < rh; ++py) {
                double row_sum = 0.0;
                for (int lx = 0; lx < rw; ++lx) {
                    const int px = x0 + lx;
                    double e = 0.0;
                    for (const auto& plane : padded) {
                        const double diff = plane[static_cast<std::size_t>(py) * pw + px] -
                                            plane[static_cast<std::size_t>(py + dy) * pw + px + dx];
                        e += diff * diff;
                    }
                    row_sum += e;
                    integral[static_cast<std::size_t>(py + 1) * stride + lx + 1] =
                        integral[static_cast<std::size_t>(py) * stride + lx + 1] + row_sum;
                }
            }
            for (int y = 0; y < y1; ++y) {
                const std::size_t top = static_cast<std::size_t>(y) * stride;
                const std::size_t bottom = static_cast<std::size_t>(y + side) * stride;
                for (int x = x0; x < x1; ++x) {
                    const int lx = x - x0;
                    const double dist = integral[bottom + lx + side] - integral[top + lx + side] -
                                        integral[bottom + lx] + integral[top + lx];
                    const double weight = std::exp(-dist * inv_norm);
                    const std::size_t i = static_cast<std::size_t>(y) * w + x;
                    const std::size_t j = static_cast<std::size_t>(y + dy) * w + x + dx;
                    den[i] += weight;
                    den[j] += weight;
                    for (std::size_t g = 0; g < group.size(); ++g) {
                        const auto plane = img.plane(group[g]);
                        num[g][i] += weight * plane[j];
                        num[g][j] += weight * plane[i];
                    }
                }
            }
        }
    }

    for (std::size_t g = 0; g < group.size(); ++g) {
        auto dst = out.plane(group[g]);
        for (std::size_t i = 0; i < n; ++i) {
            dst[i] = static_cast<float>(num[g][i] / den[i]);
        }
    }
}

}  // namespace

ImageF32 nlm_denoise(const ImageF32& img, const NlmParams& params) {
    params.validate();
    ImageF32 out(img.width(), img.height());
    if (params.channel_mode == ChannelMode::Joint) {
        static constexpr int kAll[] = {0, 1, 2};
        denoise_group(img, kAll, params, out);
    } else {
        for (int c = 0; c < ImageF32::kChannels; ++c) {
            const int single[] = {c};
            denoise_group(img, single, params, out);
        }
    }
    return out;
}

ImageF32 nlm_denoise(const ImageU8& img, const NlmParams& params) { return nlm_denoise(to_float(img), params); }

NoiseMap residual_noise(const ImageF32& img, const ImageF32& denoised) {
    if (!img.same_shape(denoised)) {
        throw std::invalid_argument("residual_noise: shape mismatch");
    }
    ImageF32 out(img.width(), img.height());
    const auto a = img.samples();
    const auto b = denoised.samples();
    auto dst = out.samples();
    for (std::size_t i = 0; i < a.size(); ++i) {
        dst[i] = a[i] - b[i];
    }
    return NoiseMap{std::move(out)};
}

NoiseMap residual_noise(const ImageU8& img, const ImageF32& denoised) {
    return residual_noise(to_float(img), denoised);
}

Bytes encode_noise_map(const NoiseMap& noise) {
    Bytes out;
    out.reserve(15 + noise.values.samples().size() * 4);
    binio::put_tag(out, "NOIZ");
    binio::put_u16(out, kNoiseMapVersion);
    binio::put_u32(out, static_cast<std::uint32_t>(noise.height()));
    binio::put_u32(out, static_cast<std::uint32_t>(noise.width()));
    binio::put_u8(out, 3);
    for (float v : noise.values.samples()) {
        binio::put_f32(out, v);
    }
    return out;
}

NoiseMap decode_noise_map(std::span<const std::uint8_t> bytes) {
    binio::Reader in(bytes);
    in.expect_tag("NOIZ", "noise map");
    const auto version = in.u16();
    if (version != kNoiseMapVersion) {
        throw FormatError("noise map: unsupported version " + std::to_string(version));
    }
    const auto height = in.u32();
    const auto width = in.u32();
    const auto channels = in.u8();
    if (channels != 3 || width == 0 || height == 0 || width > (1U << 30) || height > (1U << 30)) {
        throw FormatError("noise map: invalid header");
    }
    const std::size_t count = static_cast<std::size_t>(width) * height * 3;
    if (in.remaining() != count * 4) {
        throw FormatError("noise map: payload size does not match header");
    }
    std::vector<float> samples(count);
    for (auto& v : samples) {
        v = in.f32();
    }
    return NoiseMap{ImageF32(static_cast<int>(width), static_cast<int>(height), std::move(samples))};
}

void write_noise_map(const std::filesystem::path& path, const NoiseMap& noise) {
    write_file(path, encode_noise_map(noise));
}

NoiseMap read_noise_map(const std::filesystem::path& path) { return decode_noise_map(read_file(path)); }

}  // namespace noisent
