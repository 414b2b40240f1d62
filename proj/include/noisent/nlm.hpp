#pragma once

#include <filesystem>
#include <span>

#include "noisent/codec.hpp"
#include "noisent/image.hpp"

namespace noisent {

enum class ChannelMode {
    PerChannel,  ///< each channel denoised independently
    Joint,       ///< patch distance summed over RGB, weights shared by all channels
};

struct NlmParams {
    int patch_radius = 3;    ///< patch side 2r+1
    int search_radius = 10;  ///< search window side 2R+1
    double h = 10.0;         ///< filtering strength in sample units
    ChannelMode channel_mode = ChannelMode::PerChannel;

    /// Throws std::invalid_argument unless 1 <= patch_radius <= search_radius and h > 0.
    void validate() const;
};

/// Signed residual (original minus denoised), same shape as the source image.
struct NoiseMap {
    ImageF32 values;

    int width() const noexcept { return values.width(); }
    int height() const noexcept { return values.height(); }
};

/// Symmetric reflection of an index into [0, n): -1 -> 0, -2 -> 1, n -> n-1.
/// Repeats periodically for offsets beyond one image length.
int mirror_index(int i, int n) noexcept;

/// Non-local means denoising.
///
/// Each output sample is the weighted mean of the samples j inside the
/// (2R+1)^2 search window around i (clipped to the image), with weights
/// exp(-d(i, j) / h^2) normalized to sum to one. P(.) are the (2r+1)^2 patches
/// taken from the mirror-padded image and d(i, j) = |P(i) - P(j)|^2 / |P| is
/// the unweighted squared Euclidean patch distance per sample (|P| counts
/// every sample compared, so joint mode divides by 3 (2r+1)^2). This keeps h
/// in sample units. Output is float and unclamped.
///
/// Patch distances for every search offset are box-summed with an integral
/// image in double precision, which is exact for integer-valued inputs.
ImageF32 nlm_denoise(const ImageF32& img, const NlmParams& params);
ImageF32 nlm_denoise(const ImageU8& img, const NlmParams& params);

/// Elementwise img - denoised; throws std::invalid_argument on shape mismatch.
NoiseMap residual_noise(const ImageF32& img, const ImageF32& denoised);
NoiseMap residual_noise(const ImageU8& img, const ImageF32& denoised);

// Cache file: "NOIZ", u16 version, u32 height, u32 width, u8 channels, then
// little-endian f32 samples in planar channel order.
inline constexpr std::uint16_t kNoiseMapVersion = 1;

Bytes encode_noise_map(const NoiseMap& noise);
NoiseMap decode_noise_map(std::span<const std::uint8_t> bytes);
void write_noise_map(const std::filesystem::path& path, const NoiseMap& noise);
NoiseMap read_noise_map(const std::filesystem::path& path);

}  // namespace noisent
