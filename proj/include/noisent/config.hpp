#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "noisent/classifier.hpp"
#include "noisent/curation.hpp"
#include "noisent/entropy.hpp"
#include "noisent/mask.hpp"
#include "noisent/nlm.hpp"
#include "noisent/promptgen.hpp"
#include "noisent/synth.hpp"

namespace noisent {

enum class ClientMode { None, Identity, Suffix };

std::string to_string(ClientMode mode);
ClientMode parse_client_mode(std::string_view text);

/// Everything a subcommand needs. Loaded from "key = value" text ('#'
/// comments) and then overridden by command-line settings; see README for
/// the key list.
struct RunConfig {
    NlmParams nlm;
    EntropyParams entropy;
    TrainConfig train;
    double threshold = 0.5;
    std::vector<int> qualities{90, 75, 50};
    std::uint64_t seed = 1;
    int threads = 1;

    SynthParams synth;
    BrushParams brush;
    int mask_count = 100;
    int mask_height = 512;
    int mask_width = 512;
    QualityFilterOptions curation;

    std::size_t prompt_count = 100;
    ClientMode client = ClientMode::None;
    bool demographics = true;
    std::map<Category, double> mixture;  ///< empty: equal weights

    std::filesystem::path manifest;
    std::filesystem::path root;  ///< image root; empty means the manifest's directory
    std::filesystem::path features;
    std::filesystem::path model;
    std::filesystem::path out;
    std::filesystem::path templates;
    std::filesystem::path corpus;

    RunConfig();

    /// Throws std::invalid_argument for unknown keys or unparsable values.
    void set(std::string_view key, std::string_view value);
    /// Applies every assignment in `text`; errors carry the line number (ParseError).
    void apply_text(std::string_view text);
    void apply_file(const std::filesystem::path& path);

    /// Re-validates every component.
    void validate() const;

    /// Canonical "key=value" lines for all parameters (paths excluded).
    std::vector<std::string> echo() const;

    /// FNV-1a over the feature-extraction parameters (nlm.*, entropy.*).
    std::string feature_fingerprint() const;
    /// feature_fingerprint() + ":" + FNV-1a over the train.* parameters.
    std::string model_fingerprint() const;

    std::filesystem::path image_root() const;
};

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view text);

}  // namespace noisent
