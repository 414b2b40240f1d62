#pragma once

#include <cstdint>

#include "noisent/image.hpp"

namespace noisent {

/// Controlled two-class corpus used to exercise the detector end to end.
///
/// Every scene is a smooth seeded RGB field (low-frequency sinusoids plus soft
/// blobs). The "real-like" rendering samples it at full resolution and adds
/// i.i.d. Gaussian sensor noise; the "generated-like" rendering samples the
/// same scene at half resolution and bicubic-upsamples it without noise.
struct SynthParams {
    int size = 128;             ///< output side in pixels (even)
    int count_per_class = 200;  ///< scenes; each yields one image per class
    double sigma_min = 3.0;
    double sigma_max = 8.0;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SynthPair {
    ImageU8 real;
    ImageU8 generated;
    double sigma = 0.0;  ///< sensor-noise level used for `real`
};

/// splitmix64 step; used to derive independent per-scene seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept;

SynthPair render_synthetic_pair(const SynthParams& params, int scene_index);

}  // namespace noisent
