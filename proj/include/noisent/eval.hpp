#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "noisent/classifier.hpp"
#include "noisent/entropy.hpp"
#include "noisent/manifest.hpp"
#include "noisent/nlm.hpp"

namespace noisent {

// Positive class is "generated" (label 1); an item is predicted positive when
// score >= threshold.

struct Confusion {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const noexcept { return tp + fp + tn + fn; }
    friend bool operator==(const Confusion&, const Confusion&) = default;
};

Confusion confusion(std::span<const double> scores, std::span<const int> labels, double threshold);
double accuracy(std::span<const double> scores, std::span<const int> labels, double threshold);
double accuracy(const Confusion& c);
double f1(std::span<const double> scores, std::span<const int> labels, double threshold);
/// 2tp / (2tp + fp + fn), 0 when the denominator is 0.
double f1(const Confusion& c);

/// Mann-Whitney statistic via midranks; equals pair counting with ties as 0.5.
double auc(std::span<const double> scores, std::span<const int> labels);

/// Standardized mean difference (a - b) / pooled sample std.
/// Returns 0 when both groups are constant and equal, +-inf when only the means differ.
double cohen_d(std::span<const double> a, std::span<const double> b);

/// Linear-interpolated quantile (R type 7) of ascending `sorted`.
double quantile_sorted(std::span<const double> sorted, double p);

struct DistributionSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double std = 0.0;  ///< sample standard deviation, 0 for a single value
    double min = 0.0;
    double max = 0.0;
    std::array<double, 3> quartiles{};
    std::array<double, 9> deciles{};
};

DistributionSummary summarize(std::span<const double> values);

struct EvalReport {
    double acc = 0.0;
    double f1 = 0.0;
    double auc = 0.0;
    Confusion confusion;
    double threshold = 0.5;
    std::size_t count = 0;
    std::size_t skipped = 0;
    std::vector<Diagnostic> skipped_items;
    std::vector<double> scores;  ///< per evaluated item, manifest order
};

/// Metrics for precomputed scores; both labels must be present.
EvalReport make_report(std::span<const double> scores, std::span<const int> labels, double threshold);

/// Optional image transform applied after decoding (e.g. a JPEG round trip).
using ImageTransform = std::function<ImageU8(const ImageU8&)>;

struct FeatureBatch {
    std::vector<std::optional<EntropyTensor>> features;  ///< nullopt for failed items
    std::vector<Diagnostic> failures;
};

/// Decodes and extracts features for every record, keyed by manifest index.
/// Items that fail to load are reported, not thrown.
FeatureBatch extract_batch(const std::vector<ManifestRecord>& records, const std::filesystem::path& root,
                           const NlmParams& nlm, const EntropyParams& ep, int threads,
                           const ImageTransform& transform = {});

/// Scores a batch with `model`; unreadable items are counted in `skipped`.
EvalReport evaluate_batch(const LinearModel& model, const std::vector<ManifestRecord>& records,
                          const FeatureBatch& batch, double threshold);

EvalReport evaluate(const LinearModel& model, const std::vector<ManifestRecord>& records,
                    const std::filesystem::path& root, const NlmParams& nlm, const EntropyParams& ep,
                    double threshold = 0.5, int threads = 1);

struct RobustnessRow {
    std::optional<int> quality;  ///< nullopt for the original-quality baseline
    EvalReport report;
};

ImageU8 jpeg_round_trip(const ImageU8& img, int quality);

/// Baseline row first, then one row per quality in the given order.
std::vector<RobustnessRow> jpeg_robustness(const LinearModel& model, const std::vector<ManifestRecord>& records,
                                           const std::filesystem::path& root, const std::vector<int>& qualities,
                                           const NlmParams& nlm, const EntropyParams& ep, double threshold = 0.5,
                                           int threads = 1);

struct ClassSummary {
    Label label = Label::Real;
    DistributionSummary summary;  ///< over per-image mean entropy
};

struct EntropySummary {
    std::array<ClassSummary, 2> classes;  ///< real, generated
    double cohen_d = 0.0;                 ///< generated minus real
};

/// Throws std::invalid_argument if a class is empty.
EntropySummary entropy_distribution_summary(const std::vector<EntropyTensor>& real,
                                            const std::vector<EntropyTensor>& generated);

/// "key=value" lines; `config` lines are echoed first verbatim.
std::string format_report(const EvalReport& report, const std::vector<std::string>& config = {});
/// Tab-separated table with a header row; quality column is "original" for the baseline.
std::string format_robustness_tsv(const std::vector<RobustnessRow>& rows);
std::string format_entropy_summary_tsv(const EntropySummary& summary);

}  // namespace noisent
