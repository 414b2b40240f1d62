#include "noisent/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "noisent/binio.hpp"
#include "noisent/resize.hpp"

namespace noisent {

std::string to_string(RangeMode mode) { return mode == RangeMode::Global ? "global" : "per-channel"; }

RangeMode parse_range_mode(const std::string& text) {
    if (text == "per-channel") {
        return RangeMode::PerChannel;
    }
    if (text == "global") {
        return RangeMode::Global;
    }
    throw std::invalid_argument("unknown range mode '" + text + "' (expected per-channel or global)");
}

void EntropyParams::validate() const {
    if (grid < 1) {
        throw std::invalid_argument("entropy: grid must be >= 1");
    }
    if (canvas < 1 || canvas % grid != 0) {
        throw std::invalid_argument("entropy: canvas (" + std::to_string(canvas) + ") must be a positive multiple of grid (" +
                                    std::to_string(grid) + ")");
    }
    if (bins < 2) {
        throw std::invalid_argument("entropy: bins must be >= 2");
    }
    if (canvas > 65535 || bins > 65535) {
        throw std::invalid_argument("entropy: canvas and bins must fit in 16 bits");
    }
}

EntropyTensor::EntropyTensor(int grid, std::vector<float> values) : grid_(grid), values_(std::move(values)) {
    if (grid < 1 || values_.size() != static_cast<std::size_t>(3) * grid * grid) {
        throw std::invalid_argument("entropy tensor: value count does not match 3*n*n");
    }
}

double EntropyTensor::mean() const noexcept {
    if (values_.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (float v : values_) {
        sum += v;
    }
    return sum / static_cast<double>(values_.size());
}

NoiseMap resize_noise(const NoiseMap& noise, int canvas) {
    return NoiseMap{resize_bicubic(noise.values, canvas, canvas)};
}

int histogram_bin(double v, double lo, double hi, int bins) noexcept {
    if (!(hi > lo)) {
        return 0;
    }
    const double width = (hi - lo) / bins;
    const double k = std::floor((v - lo) / width);
    if (k < 0.0) {
        return 0;
    }
    return k >= bins - 1 ? bins - 1 : static_cast<int>(k);
}

EntropyTensor block_entropy(const NoiseMap& resized, const EntropyParams& params) {
    params.validate();
    if (resized.width() != params.canvas || resized.height() != params.canvas) {
        throw std::invalid_argument("block_entropy: noise map must be " + std::to_string(params.canvas) + "x" +
                                    std::to_string(params.canvas));
    }
    const int n = params.grid;
    const int side = params.block_side();
    const double samples_per_block = static_cast<double>(side) * side;

    double lo[3];
    double hi[3];
    for (int c = 0; c < 3; ++c) {
        const auto [mn, mx] = std::minmax_element(resized.values.plane(c).begin(), resized.values.plane(c).end());
        lo[c] = *mn;
        hi[c] = *mx;
    }
    if (params.range_mode == RangeMode::Global) {
        const double glo = std::min({lo[0], lo[1], lo[2]});
        const double ghi = std::max({hi[0], hi[1], hi[2]});
        std::fill(std::begin(lo), std::end(lo), glo);
        std::fill(std::begin(hi), std::end(hi), ghi);
    }

    EntropyTensor out(n);
    std::vector<int> counts(params.bins);
    for (int c = 0; c < 3; ++c) {
        const auto plane = resized.values.plane(c);
        for (int bi = 0; bi < n; ++bi) {
            for (int bj = 0; bj < n; ++bj) {
                std::fill(counts.begin(), counts.end(), 0);
                for (int y = bi * side; y < (bi + 1) * side; ++y) {
                    const float* row = plane.data() + static_cast<std::size_t>(y) * params.canvas;
                    for (int x = bj * side; x < (bj + 1) * side; ++x) {
                        ++counts[histogram_bin(row[x], lo[c], hi[c], params.bins)];
                    }
                }
                double entropy = 0.0;
                for (int count : counts) {
                    if (count > 0) {
                        const double p = count / samples_per_block;
                        entropy -= p * std::log2(p);
                    }
                }
                out.at(c, bi, bj) = static_cast<float>(entropy);
            }
        }
    }
    return out;
}

EntropyTensor extract_features(const ImageU8& img, const NlmParams& nlm, const EntropyParams& params) {
    params.validate();
    const ImageF32 x = to_float(img);
    const NoiseMap noise = residual_noise(x, nlm_denoise(x, nlm));
    return block_entropy(resize_noise(noise, params.canvas), params);
}

namespace {

void put_header(Bytes& out, const EntropyParams& params) {
    binio::put_tag(out, "NENT");
    binio::put_u16(out, kFeatureCacheVersion);
    binio::put_u16(out, static_cast<std::uint16_t>(params.grid));
    binio::put_u16(out, static_cast<std::uint16_t>(params.bins));
    binio::put_u16(out, static_cast<std::uint16_t>(params.canvas));
    binio::put_u8(out, params.range_mode == RangeMode::Global ? 1 : 0);
}

FeatureCacheHeader get_header(binio::Reader& in) {
    in.expect_tag("NENT", "feature cache");
    FeatureCacheHeader header;
    header.version = in.u16();
    if (header.version != kFeatureCacheVersion) {
        throw FormatError("feature cache: unsupported version " + std::to_string(header.version));
    }
    header.params.grid = in.u16();
    header.params.bins = in.u16();
    header.params.canvas = in.u16();
    const auto mode = in.u8();
    if (mode > 1) {
        throw FormatError("feature cache: invalid range mode");
    }
    header.params.range_mode = mode == 1 ? RangeMode::Global : RangeMode::PerChannel;
    try {
        header.params.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("feature cache: ") + e.what());
    }
    return header;
}

constexpr std::size_t kFeatureHeaderBytes = 4 + 2 + 2 + 2 + 2 + 1;

}  // namespace

Bytes encode_feature_cache(const EntropyTensor& tensor, const EntropyParams& params) {
    if (tensor.grid() != params.grid) {
        throw std::invalid_argument("feature cache: tensor grid does not match params");
    }
    Bytes out;
    out.reserve(kFeatureHeaderBytes + tensor.size() * 4);
    put_header(out, params);
    for (float v : tensor.values()) {
        binio::put_f32(out, v);
    }
    return out;
}

EntropyTensor decode_feature_cache(std::span<const std::uint8_t> bytes, FeatureCacheHeader* header) {
    binio::Reader in(bytes);
    const FeatureCacheHeader h = get_header(in);
    const std::size_t count = h.params.feature_dim();
    if (in.remaining() != count * 4) {
        throw FormatError("feature cache: payload size does not match header");
    }
    std::vector<float> values(count);
    for (auto& v : values) {
        v = in.f32();
    }
    if (header != nullptr) {
        *header = h;
    }
    return EntropyTensor(h.params.grid, std::move(values));
}

FeatureCacheHeader read_feature_cache_header(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::uint8_t raw[kFeatureHeaderBytes];
    in.read(reinterpret_cast<char*>(raw), sizeof(raw));
    if (in.gcount() != static_cast<std::streamsize>(sizeof(raw))) {
        throw FormatError(path.string() + ": truncated feature cache header");
    }
    binio::Reader reader(raw);
    return get_header(reader);
}

void write_feature_cache(const std::filesystem::path& path, const EntropyTensor& tensor, const EntropyParams& params) {
    write_file(path, encode_feature_cache(tensor, params));
}

EntropyTensor read_feature_cache(const std::filesystem::path& path, FeatureCacheHeader* header) {
    return decode_feature_cache(read_file(path), header);
}

}  // namespace noisent
