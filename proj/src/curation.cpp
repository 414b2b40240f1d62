#include "noisent/curation.hpp"

#include <json.hpp>

#include <cstdlib>
#include <limits>

#include "noisent/codec.hpp"
#include "noisent/error.hpp"
#include "noisent/parallel.hpp"

namespace noisent {

int resolution_bin(std::uint64_t pixels) noexcept {
    int bin = 0;
    for (int b = 1; b < 4; ++b) {
        if (pixels >= ResolutionHistogram::kLowerEdges[b]) {
            bin = b;
        }
    }
    return bin;
}

ResolutionHistogram resolution_histogram(const std::vector<ManifestRecord>& records, const std::filesystem::path& root,
                                         int threads) {
    std::vector<std::optional<std::uint64_t>> pixels(records.size());
    std::vector<std::string> errors(records.size());
    parallel_for(records.size(), threads, [&](std::size_t i) {
        try {
            pixels[i] = probe_image(root / records[i].path).pixel_count();
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    ResolutionHistogram hist;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (pixels[i]) {
            ++hist.counts[resolution_bin(*pixels[i])];
        } else {
            hist.unreadable.push_back({i, "unreadable-image", errors[i]});
        }
    }
    const std::size_t total = hist.readable();
    for (int b = 0; b < 4; ++b) {
        hist.fractions[b] = total == 0 ? 0.0 : static_cast<double>(hist.counts[b]) / static_cast<double>(total);
    }
    return hist;
}

namespace {

constexpr std::array<int, 64> kAnnexKLuminance{
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,  14, 13, 16, 24,  40,  57,
    69, 56, 14, 17, 22,  29,  51,  87,  80, 62, 18, 22, 37,  56,  68,  109, 103, 77, 24, 35,  55,  64,
    81, 104, 113, 92, 49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

constexpr std::array<int, 64> kZigzagToNatural{0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
                                               12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
                                               35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
                                               58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

}  // namespace

std::array<int, 64> scaled_luminance_table(int quality) {
    if (quality < 1 || quality > 100) {
        throw std::invalid_argument("quality must be in [1, 100]");
    }
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    std::array<int, 64> out{};
    for (int k = 0; k < 64; ++k) {
        const long v = (static_cast<long>(kAnnexKLuminance[k]) * scale + 50) / 100;
        out[k] = static_cast<int>(std::clamp(v, 1L, 255L));
    }
    return out;
}

std::array<int, 64> read_luminance_table(std::span<const std::uint8_t> bytes) {
    if (sniff_format(bytes) != ImageFormat::Jpeg) {
        throw FormatError("JPEG: missing SOI marker");
    }
    std::size_t pos = 2;
    while (true) {
        // Skip fill bytes, then expect a marker.
        if (pos >= bytes.size() || bytes[pos] != 0xFF) {
            throw FormatError("JPEG: expected marker at offset " + std::to_string(pos));
        }
        while (pos < bytes.size() && bytes[pos] == 0xFF) {
            ++pos;
        }
        if (pos >= bytes.size()) {
            throw FormatError("JPEG: truncated before marker code");
        }
        const std::uint8_t marker = bytes[pos++];
        if (marker == 0xD9 || marker == 0xDA) {
            throw FormatError("JPEG: no luminance quantization table before scan data");
        }
        if (marker == 0x01 || (marker >= 0xD0 && marker <= 0xD7)) {
            continue;
        }
        if (pos + 2 > bytes.size()) {
            throw FormatError("JPEG: truncated segment length");
        }
        const std::size_t length = (static_cast<std::size_t>(bytes[pos]) << 8) | bytes[pos + 1];
        if (length < 2 || pos + length > bytes.size()) {
            throw FormatError("JPEG: segment overruns stream");
        }
        if (marker == 0xDB) {
            std::size_t q = pos + 2;
            const std::size_t end = pos + length;
            while (q < end) {
                const int precision = bytes[q] >> 4;
                const int id = bytes[q] & 0x0F;
                ++q;
                const std::size_t entry = precision == 0 ? 1 : 2;
                if (precision > 1 || q + 64 * entry > end) {
                    throw FormatError("JPEG: malformed DQT segment");
                }
                std::array<int, 64> table{};
                for (int k = 0; k < 64; ++k) {
                    const int v = entry == 1 ? bytes[q + k] : (bytes[q + 2 * k] << 8) | bytes[q + 2 * k + 1];
                    table[kZigzagToNatural[k]] = v;
                }
                q += 64 * entry;
                if (id == 0) {
                    return table;
                }
            }
        }
        pos += length;
    }
}

std::optional<int> estimate_jpeg_quality(std::span<const std::uint8_t> bytes) {
    if (sniff_format(bytes) != ImageFormat::Jpeg) {
        return std::nullopt;
    }
    const auto table = read_luminance_table(bytes);
    int best_quality = 100;
    long best_distance = std::numeric_limits<long>::max();
    for (int q = 100; q >= 1; --q) {
        const auto ref = scaled_luminance_table(q);
        long distance = 0;
        for (int k = 0; k < 64; ++k) {
            distance += std::labs(static_cast<long>(table[k]) - ref[k]);
        }
        if (distance < best_distance) {
            best_distance = distance;
            best_quality = q;
        }
    }
    return best_quality;
}

std::optional<int> estimate_jpeg_quality(const std::filesystem::path& path) {
    const Bytes bytes = read_file(path);
    return estimate_jpeg_quality(std::span<const std::uint8_t>(bytes));
}

QualityFilterResult quality_filter(const std::vector<ManifestRecord>& records, const std::filesystem::path& root,
                                   const QualityFilterOptions& options, int threads) {
    struct Verdict {
        std::string reason;
        std::string detail;
    };
    std::vector<Verdict> verdicts(records.size());
    parallel_for(records.size(), threads, [&](std::size_t i) {
        Verdict& v = verdicts[i];
        try {
            const Bytes bytes = read_file(root / records[i].path);
            const ImageFormat format = sniff_format(bytes);
            if (format == ImageFormat::Unknown) {
                v = {"unsupported-format", "not PNG or JPEG"};
                return;
            }
            const ImageInfo info = probe_image(std::span<const std::uint8_t>(bytes));
            if (info.pixel_count() < options.min_pixels) {
                v = {"resolution", std::to_string(info.width) + "x" + std::to_string(info.height) + " below " +
                                       std::to_string(options.min_pixels) + " px"};
                return;
            }
            if (format == ImageFormat::Jpeg) {
                const int quality = *estimate_jpeg_quality(std::span<const std::uint8_t>(bytes));
                if (quality < options.min_quality) {
                    v = {"quality", "estimated JPEG quality " + std::to_string(quality) + " below " +
                                        std::to_string(options.min_quality)};
                }
            }
        } catch (const std::exception& e) {
            v = {"unreadable", e.what()};
        }
    });
    QualityFilterResult result;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (verdicts[i].reason.empty()) {
            result.kept.push_back(records[i]);
        } else {
            result.rejected.push_back({records[i], verdicts[i].reason, verdicts[i].detail});
        }
    }
    return result;
}

std::string to_json_line(const Rejection& rejection) {
    auto obj = nlohmann::json::parse(to_json_line(rejection.record));
    obj["reason"] = rejection.reason;
    obj["detail"] = rejection.detail;
    return obj.dump();
}

}  // namespace noisent
