#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "noisent/codec.hpp"
#include "noisent/nlm.hpp"

namespace noisent {

enum class RangeMode {
    PerChannel,  ///< bin edges from each channel's own min/max
    Global,      ///< one min/max over all three channels
};

std::string to_string(RangeMode mode);
RangeMode parse_range_mode(const std::string& text);

struct EntropyParams {
    int canvas = 1024;  ///< side of the resized noise map
    int grid = 64;      ///< blocks per side (n); must divide canvas
    int bins = 32;      ///< histogram bins (B)
    RangeMode range_mode = RangeMode::PerChannel;

    /// Throws std::invalid_argument on canvas % grid != 0, bins < 2, grid < 1.
    void validate() const;

    int block_side() const noexcept { return canvas / grid; }
    std::size_t feature_dim() const noexcept { return static_cast<std::size_t>(3) * grid * grid; }

    friend bool operator==(const EntropyParams&, const EntropyParams&) = default;
};

/// 3 x n x n block entropies in bits, planar: value (c, i, j) at (c * n + i) * n + j.
class EntropyTensor {
public:
    EntropyTensor() = default;
    explicit EntropyTensor(int grid) : grid_(grid), values_(static_cast<std::size_t>(3) * grid * grid, 0.0F) {}
    EntropyTensor(int grid, std::vector<float> values);

    int grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }

    float& at(int c, int i, int j) { return values_[(static_cast<std::size_t>(c) * grid_ + i) * grid_ + j]; }
    float at(int c, int i, int j) const { return values_[(static_cast<std::size_t>(c) * grid_ + i) * grid_ + j]; }

    std::span<const float> values() const noexcept { return values_; }
    std::span<float> values() noexcept { return values_; }

    double mean() const noexcept;

    friend bool operator==(const EntropyTensor&, const EntropyTensor&) = default;

private:
    int grid_ = 0;
    std::vector<float> values_;
};

/// Bicubic resize of a signed noise map to canvas x canvas.
NoiseMap resize_noise(const NoiseMap& noise, int canvas);

/// Histogram bin of `v` for `bins` equal-width bins over [lo, hi]; the top bin
/// is closed so v == hi lands in bins-1. A degenerate range maps to bin 0.
int histogram_bin(double v, double lo, double hi, int bins) noexcept;

/// Block-wise discretized Shannon entropy of a canvas x canvas noise map.
EntropyTensor block_entropy(const NoiseMap& resized, const EntropyParams& params);

/// NLM residual -> bicubic canvas -> block entropy.
EntropyTensor extract_features(const ImageU8& img, const NlmParams& nlm, const EntropyParams& params);

// Cache file: "NENT", u16 version, u16 n, u16 B, u16 canvas, u8 range_mode,
// then 3*n*n little-endian f32 values, planar.
inline constexpr std::uint16_t kFeatureCacheVersion = 1;

struct FeatureCacheHeader {
    std::uint16_t version = kFeatureCacheVersion;
    EntropyParams params;
};

Bytes encode_feature_cache(const EntropyTensor& tensor, const EntropyParams& params);
EntropyTensor decode_feature_cache(std::span<const std::uint8_t> bytes, FeatureCacheHeader* header = nullptr);
/// Header only; throws FormatError when the file is not a feature cache.
FeatureCacheHeader read_feature_cache_header(const std::filesystem::path& path);
void write_feature_cache(const std::filesystem::path& path, const EntropyTensor& tensor, const EntropyParams& params);
EntropyTensor read_feature_cache(const std::filesystem::path& path, FeatureCacheHeader* header = nullptr);

}  // namespace noisent
