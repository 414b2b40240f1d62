#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace noisent {

/// Three-channel raster stored planar (channel-major, then row-major):
/// sample (c, y, x) lives at index (c * height + y) * width + x.
template <typename T>
class Image {
public:
    static constexpr int kChannels = 3;

    Image() = default;

    Image(int width, int height, T fill = T{}) : width_(width), height_(height) {
        if (width < 1 || height < 1) {
            throw std::invalid_argument("image dimensions must be positive, got " + std::to_string(width) +
                                        "x" + std::to_string(height));
        }
        samples_.assign(static_cast<std::size_t>(width) * height * kChannels, fill);
    }

    Image(int width, int height, std::vector<T> samples) : width_(width), height_(height), samples_(std::move(samples)) {
        if (width < 1 || height < 1) {
            throw std::invalid_argument("image dimensions must be positive");
        }
        if (samples_.size() != static_cast<std::size_t>(width) * height * kChannels) {
            throw std::invalid_argument("sample count does not match width*height*3");
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return kChannels; }
    std::size_t plane_size() const noexcept { return static_cast<std::size_t>(width_) * height_; }
    bool empty() const noexcept { return samples_.empty(); }

    T& at(int c, int y, int x) { return samples_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x]; }
    const T& at(int c, int y, int x) const {
        return samples_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
    }

    std::span<T> plane(int c) { return {samples_.data() + c * plane_size(), plane_size()}; }
    std::span<const T> plane(int c) const { return {samples_.data() + c * plane_size(), plane_size()}; }

    std::span<T> samples() noexcept { return samples_; }
    std::span<const T> samples() const noexcept { return samples_; }

    bool same_shape(const auto& other) const noexcept {
        return width_ == other.width() && height_ == other.height();
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> samples_;
};

using ImageU8 = Image<std::uint8_t>;
using ImageF32 = Image<float>;

/// Exact widening conversion.
inline ImageF32 to_float(const ImageU8& img) {
    std::vector<float> out(img.samples().begin(), img.samples().end());
    return {img.width(), img.height(), std::move(out)};
}

/// Rounds half away from zero and saturates to [0, 255].
inline ImageU8 to_u8(const ImageF32& img) {
    std::vector<std::uint8_t> out(img.samples().size());
    const auto in = img.samples();
    for (std::size_t i = 0; i < in.size(); ++i) {
        const float v = std::round(in[i]);
        out[i] = static_cast<std::uint8_t>(v < 0.0F ? 0.0F : (v > 255.0F ? 255.0F : v));
    }
    return {img.width(), img.height(), std::move(out)};
}

}  // namespace noisent
