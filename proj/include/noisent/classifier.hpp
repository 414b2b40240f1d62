#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "noisent/codec.hpp"
#include "noisent/entropy.hpp"

namespace noisent {

struct TrainConfig {
    double learning_rate = 0.01;
    int epochs = 50;
    int batch_size = 32;
    double l2 = 1e-4;  ///< coefficient of (l2 / 2) * |w|^2; the bias is not penalized
    std::uint64_t seed = 0;
    bool shuffle = true;

    void validate() const;
};

/// Logistic model over standardized, flattened features.
struct LinearModel {
    std::vector<float> weights;
    float bias = 0.0F;
    std::vector<float> feat_mean;
    std::vector<float> feat_std;  ///< > 0; zero-variance dimensions store 1
    EntropyParams params;         ///< feature configuration the model was trained on
    std::uint64_t seed = 0;
    std::string config_fingerprint;  ///< free-form provenance, "-" when absent

    std::size_t dim() const noexcept { return weights.size(); }

    /// Zero weights and bias with identity normalization.
    static LinearModel identity(std::size_t dim);

    friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

/// Trainable parameters in double precision; gradient layout is
/// [dL/dw_0 .. dL/dw_{dim-1}, dL/db].
struct LogisticParams {
    std::vector<double> weights;
    double bias = 0.0;
};

/// Row-major standardized design matrix with 0/1 labels.
struct DesignMatrix {
    std::size_t dim = 0;
    std::vector<double> values;
    std::vector<int> labels;

    std::size_t rows() const noexcept { return labels.size(); }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
};

double sigmoid(double s) noexcept;

/// Mean binary cross-entropy over `indices` plus (l2 / 2) |w|^2.
double objective(const LogisticParams& params, const DesignMatrix& data, std::span<const std::size_t> indices, double l2);

/// Exact analytic gradient of `objective`; size dim + 1.
std::vector<double> gradient(const LogisticParams& params, const DesignMatrix& data, std::span<const std::size_t> indices,
                             double l2);

/// Gradient for a trained model on raw (unstandardized) feature rows.
std::vector<double> gradient(const LinearModel& model, std::span<const std::vector<float>> batch,
                             std::span<const int> labels, double l2);

struct TrainResult {
    LinearModel model;
    std::vector<double> epoch_losses;  ///< full-training-set objective after each epoch
    double final_loss = 0.0;
    std::vector<std::string> log;
};

/// Mini-batch gradient descent on mean BCE + L2.
///
/// Features are z-scored with training statistics that are stored in the
/// model. If an epoch raises the training objective by more than 1e-6 the
/// epoch is rolled back and the learning rate is halved for the following
/// epochs, so epoch_losses is non-increasing. Deterministic for fixed inputs
/// and seed.
TrainResult train(std::span<const std::vector<float>> features, std::span<const int> labels, const TrainConfig& cfg);
TrainResult train(std::span<const EntropyTensor> features, std::span<const int> labels, const TrainConfig& cfg);

/// Per-dimension mean and population std; zero-variance dimensions get std 1.
void fit_standardization(std::span<const std::vector<float>> features, std::vector<float>& mean,
                         std::vector<float>& stddev);

double predict_score(const LinearModel& model, std::span<const float> features);
double predict_score(const LinearModel& model, const EntropyTensor& features);

// Model file: text header terminated by "end\n", then little-endian f32
// weights[dim], bias, mean[dim], std[dim].
Bytes encode_model(const LinearModel& model);
LinearModel decode_model(std::span<const std::uint8_t> bytes);
void save_model(const std::filesystem::path& path, const LinearModel& model);
LinearModel load_model(const std::filesystem::path& path);

}  // namespace noisent
