#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "noisent/manifest.hpp"

namespace noisent {

/// Pixel-count histogram over [1e3,1e4), [1e4,1e5), [1e5,1e6), [1e6,inf).
/// Images below 1e3 pixels are counted in the first bin.
struct ResolutionHistogram {
    static constexpr std::array<std::uint64_t, 4> kLowerEdges{1'000, 10'000, 100'000, 1'000'000};

    std::array<std::size_t, 4> counts{};
    std::array<double, 4> fractions{};
    std::vector<Diagnostic> unreadable;

    std::size_t readable() const noexcept { return counts[0] + counts[1] + counts[2] + counts[3]; }
};

/// Bin index for a pixel count.
int resolution_bin(std::uint64_t pixels) noexcept;

ResolutionHistogram resolution_histogram(const std::vector<ManifestRecord>& records, const std::filesystem::path& root,
                                         int threads = 1);

/// IJG-scaled Annex K luminance table (natural order, baseline-clamped to [1, 255]).
std::array<int, 64> scaled_luminance_table(int quality);

/// Luminance (table id 0) quantization table of a JPEG stream in natural order.
/// Throws FormatError when the stream is not a well-formed JPEG header.
std::array<int, 64> read_luminance_table(std::span<const std::uint8_t> bytes);

/// Quality factor whose scaled standard luminance table is closest in L1 to
/// the stream's table (ties resolve to the higher quality). nullopt when the
/// bytes are not JPEG; FormatError when the JPEG header is corrupt.
std::optional<int> estimate_jpeg_quality(std::span<const std::uint8_t> bytes);
std::optional<int> estimate_jpeg_quality(const std::filesystem::path& path);

struct QualityFilterOptions {
    int min_quality = 90;
    std::uint64_t min_pixels = 100'000;
};

struct Rejection {
    ManifestRecord record;
    std::string reason;  ///< unreadable | unsupported-format | resolution | quality
    std::string detail;
};

struct QualityFilterResult {
    std::vector<ManifestRecord> kept;
    std::vector<Rejection> rejected;
};

/// PNGs pass on resolution alone; JPEGs must also reach min_quality.
QualityFilterResult quality_filter(const std::vector<ManifestRecord>& records, const std::filesystem::path& root,
                                   const QualityFilterOptions& options = {}, int threads = 1);

/// Manifest line of the rejected record plus a "reason" field.
std::string to_json_line(const Rejection& rejection);

}  // namespace noisent
