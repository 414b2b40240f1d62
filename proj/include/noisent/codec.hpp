#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "noisent/image.hpp"

namespace noisent {

enum class ImageFormat { Png, Jpeg, Unknown };

/// Header-level facts about an image file, read without decoding pixels.
struct ImageInfo {
    ImageFormat format = ImageFormat::Unknown;
    int width = 0;
    int height = 0;

    std::uint64_t pixel_count() const noexcept { return static_cast<std::uint64_t>(width) * height; }
};

using Bytes = std::vector<std::uint8_t>;

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

ImageFormat sniff_format(std::span<const std::uint8_t> bytes) noexcept;

/// Decodes PNG or baseline/progressive JPEG into 3-channel u8.
/// Grayscale is replicated to three channels; alpha is dropped (not composited);
/// 16-bit PNG samples are reduced to their high byte.
ImageU8 decode_image(std::span<const std::uint8_t> bytes);
ImageU8 load_image(const std::filesystem::path& path);

ImageInfo probe_image(std::span<const std::uint8_t> bytes);
ImageInfo probe_image(const std::filesystem::path& path);

/// Lossless 8-bit RGB PNG.
Bytes encode_png(const ImageU8& img);

/// Single-channel 8-bit PNG from row-major samples.
Bytes encode_png_gray(int width, int height, std::span<const std::uint8_t> samples);

/// Baseline JPEG, 4:4:4, IJG-scaled Annex K quantization tables for `quality` in [1, 100].
Bytes encode_jpeg(const ImageU8& img, int quality);

}  // namespace noisent
