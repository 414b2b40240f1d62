#pragma once

#include <cstddef>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "noisent/config.hpp"
#include "noisent/eval.hpp"

namespace noisent {

// Subcommand bodies. Each validates its configuration, echoes it into every
// artifact it writes and collects error diagnostics; exit code 0 iff none.
// Primary text output goes to cfg.out when set, else to `out`.

struct CommandStatus {
    std::vector<std::string> errors;
    int exit_code() const noexcept { return errors.empty() ? 0 : 1; }
};

struct ExtractStatus : CommandStatus {
    std::size_t computed = 0;
    std::size_t reused = 0;
};

/// Name of the sidecar holding the fingerprint of a feature directory.
inline constexpr const char* kFeatureSidecar = "features.config";

/// Cache file of one record inside a feature directory.
std::filesystem::path feature_cache_path(const std::filesystem::path& dir, const ManifestRecord& record);

/// Throws std::runtime_error unless `dir` carries a sidecar with the config's feature fingerprint.
void check_feature_dir(const std::filesystem::path& dir, const RunConfig& cfg);

/// Loads cached tensors for every record; throws if any is missing or mismatched.
std::vector<EntropyTensor> load_cached_features(const std::vector<ManifestRecord>& records, const RunConfig& cfg);

ExtractStatus cmd_extract(const RunConfig& cfg, std::ostream& out);
CommandStatus cmd_train(const RunConfig& cfg, std::ostream& out);
CommandStatus cmd_eval(const RunConfig& cfg, std::ostream& out);
CommandStatus cmd_robustness(const RunConfig& cfg, std::ostream& out);
/// Writes stats.txt, rejections.jsonl and entropy_summary.tsv into cfg.out (a directory)
/// or prints them when cfg.out is empty.
CommandStatus cmd_stats(const RunConfig& cfg, std::ostream& out);
/// Writes mask_NNNN.png, masks.jsonl and masks.config into cfg.out.
CommandStatus cmd_maskgen(const RunConfig& cfg, std::ostream& out);
CommandStatus cmd_prompts(const RunConfig& cfg, std::ostream& out);

/// Writes real/NNNN.png, generated/NNNN.png, manifest.jsonl, train.jsonl,
/// test.jsonl and corpus.config into cfg.out. The 80/20 split is by scene, so
/// both renderings of a scene land on the same side.
CommandStatus cmd_synthcorpus(const RunConfig& cfg, std::ostream& out);

/// Baseline feature: the image bicubic-resized to side x side, scaled to [0, 1], planar.
std::vector<float> raw_pixel_features(const ImageU8& img, int side);

}  // namespace noisent
