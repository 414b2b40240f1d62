#pragma once

#include <algorithm>
#include <vector>

#include "noisent/image.hpp"

namespace noisent {

/// Catmull-Rom cubic convolution kernel (a = -0.5).
double catmull_rom(double distance) noexcept;

/// Separable bicubic resampling with Catmull-Rom weights.
///
/// Output pixel centers map to source coordinates as
/// src = (dst + 0.5) * in / out - 0.5; taps outside the image are clamped to
/// the nearest edge sample. The result is not clamped, so signed inputs keep
/// their sign and overshoot is preserved.
ImageF32 resize_bicubic(const ImageF32& img, int out_h, int out_w);

/// Splits an elongated image into short-edge squares along the long axis.
///
/// Images with long/short below `ratio_threshold` come back unchanged as a
/// single element. Otherwise floor(long/short) squares are cut starting at
/// offset 0 and the remainder is discarded.
template <typename T>
std::vector<Image<T>> crop_square_patches(const Image<T>& img, double ratio_threshold = 2.0) {
    const int w = img.width();
    const int h = img.height();
    const int shorter = std::min(w, h);
    const int longer = std::max(w, h);
    if (static_cast<double>(longer) / shorter < ratio_threshold) {
        return {img};
    }
    const int count = longer / shorter;
    std::vector<Image<T>> patches;
    patches.reserve(count);
    for (int p = 0; p < count; ++p) {
        const int x0 = w >= h ? p * shorter : 0;
        const int y0 = w >= h ? 0 : p * shorter;
        Image<T> patch(shorter, shorter);
        for (int c = 0; c < Image<T>::kChannels; ++c) {
            for (int y = 0; y < shorter; ++y) {
                for (int x = 0; x < shorter; ++x) {
                    patch.at(c, y, x) = img.at(c, y0 + y, x0 + x);
                }
            }
        }
        patches.push_back(std::move(patch));
    }
    return patches;
}

}  // namespace noisent
