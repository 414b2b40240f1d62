#include "noisent/classifier.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "noisent/binio.hpp"
#include "noisent/rng.hpp"

namespace noisent {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("train: learning_rate must be positive");
    }
    if (epochs < 1) {
        throw std::invalid_argument("train: epochs must be >= 1");
    }
    if (batch_size < 1) {
        throw std::invalid_argument("train: batch_size must be >= 1");
    }
    if (!(l2 >= 0.0)) {
        throw std::invalid_argument("train: l2 must be non-negative");
    }
}

LinearModel LinearModel::identity(std::size_t dim) {
    LinearModel m;
    m.weights.assign(dim, 0.0F);
    m.feat_mean.assign(dim, 0.0F);
    m.feat_std.assign(dim, 1.0F);
    m.config_fingerprint = "-";
    return m;
}

double sigmoid(double s) noexcept {
    if (s >= 0.0) {
        return 1.0 / (1.0 + std::exp(-s));
    }
    const double e = std::exp(s);
    return e / (1.0 + e);
}

namespace {

double dot_score(const LogisticParams& p, std::span<const double> z) {
    double s = p.bias;
    for (std::size_t k = 0; k < z.size(); ++k) {
        s += p.weights[k] * z[k];
    }
    return s;
}

// log(1 + e^s) - y s without overflow.
double bce_from_logit(double s, int label) {
    const double softplus = std::max(s, 0.0) + std::log1p(std::exp(-std::abs(s)));
    return softplus - (label != 0 ? s : 0.0);
}

void require_indices(std::span<const std::size_t> indices) {
    if (indices.empty()) {
        throw std::invalid_argument("gradient: batch must be non-empty");
    }
}

}  // namespace

double objective(const LogisticParams& params, const DesignMatrix& data, std::span<const std::size_t> indices, double l2) {
    require_indices(indices);
    double loss = 0.0;
    for (std::size_t i : indices) {
        loss += bce_from_logit(dot_score(params, data.row(i)), data.labels[i]);
    }
    loss /= static_cast<double>(indices.size());
    double norm2 = 0.0;
    for (double w : params.weights) {
        norm2 += w * w;
    }
    return loss + 0.5 * l2 * norm2;
}

std::vector<double> gradient(const LogisticParams& params, const DesignMatrix& data, std::span<const std::size_t> indices,
                             double l2) {
    require_indices(indices);
    const std::size_t dim = data.dim;
    std::vector<double> g(dim + 1, 0.0);
    for (std::size_t i : indices) {
        const auto z = data.row(i);
        const double residual = sigmoid(dot_score(params, z)) - data.labels[i];
        for (std::size_t k = 0; k < dim; ++k) {
            g[k] += residual * z[k];
        }
        g[dim] += residual;
    }
    const double inv_m = 1.0 / static_cast<double>(indices.size());
    for (std::size_t k = 0; k < dim; ++k) {
        g[k] = g[k] * inv_m + l2 * params.weights[k];
    }
    g[dim] *= inv_m;
    return g;
}

namespace {

DesignMatrix standardize_rows(std::span<const std::vector<float>> features, std::span<const int> labels,
                              std::span<const float> mean, std::span<const float> stddev) {
    DesignMatrix data;
    data.dim = mean.size();
    data.values.resize(features.size() * data.dim);
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].size() != data.dim) {
            throw std::invalid_argument("feature dimension mismatch at row " + std::to_string(i));
        }
        for (std::size_t k = 0; k < data.dim; ++k) {
            data.values[i * data.dim + k] =
                (static_cast<double>(features[i][k]) - mean[k]) / static_cast<double>(stddev[k]);
        }
    }
    data.labels.assign(labels.begin(), labels.end());
    return data;
}

LogisticParams params_of(const LinearModel& model) {
    return {std::vector<double>(model.weights.begin(), model.weights.end()), model.bias};
}

}  // namespace

std::vector<double> gradient(const LinearModel& model, std::span<const std::vector<float>> batch,
                             std::span<const int> labels, double l2) {
    if (batch.size() != labels.size()) {
        throw std::invalid_argument("gradient: batch and labels differ in length");
    }
    const DesignMatrix data = standardize_rows(batch, labels, model.feat_mean, model.feat_std);
    std::vector<std::size_t> all(batch.size());
    std::iota(all.begin(), all.end(), 0);
    return gradient(params_of(model), data, all, l2);
}

void fit_standardization(std::span<const std::vector<float>> features, std::vector<float>& mean,
                         std::vector<float>& stddev) {
    const std::size_t dim = features.empty() ? 0 : features.front().size();
    std::vector<double> sum(dim, 0.0);
    for (const auto& row : features) {
        for (std::size_t k = 0; k < dim; ++k) {
            sum[k] += row[k];
        }
    }
    const double m = static_cast<double>(features.size());
    mean.resize(dim);
    stddev.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
        const double mu = sum[k] / m;
        double ss = 0.0;
        for (const auto& row : features) {
            const double d = row[k] - mu;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / m);
        mean[k] = static_cast<float>(mu);
        // A float std that rounds to zero is treated like zero variance.
        stddev[k] = sd > 0.0 && static_cast<float>(sd) > 0.0F ? static_cast<float>(sd) : 1.0F;
    }
}

TrainResult train(std::span<const std::vector<float>> features, std::span<const int> labels, const TrainConfig& cfg) {
    cfg.validate();
    if (features.size() != labels.size()) {
        throw std::invalid_argument("train: features and labels differ in length");
    }
    if (features.size() < 2) {
        throw std::invalid_argument("train: need at least two examples");
    }
    bool has_real = false;
    bool has_generated = false;
    for (int y : labels) {
        if (y != 0 && y != 1) {
            throw std::invalid_argument("train: labels must be 0 (real) or 1 (generated)");
        }
        (y == 0 ? has_real : has_generated) = true;
    }
    if (!has_real || !has_generated) {
        throw std::invalid_argument("train: both classes must be present");
    }
    const std::size_t dim = features.front().size();
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].size() != dim || dim == 0) {
            throw std::invalid_argument("train: inconsistent feature shapes at row " + std::to_string(i));
        }
    }

    TrainResult result;
    LinearModel& model = result.model;
    fit_standardization(features, model.feat_mean, model.feat_std);
    model.seed = cfg.seed;
    model.config_fingerprint = "-";
    const DesignMatrix data = standardize_rows(features, labels, model.feat_mean, model.feat_std);

    LogisticParams params{std::vector<double>(dim, 0.0), 0.0};
    std::vector<std::size_t> order(data.rows());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(cfg.seed);

    double lr = cfg.learning_rate;
    double previous = objective(params, data, order, cfg.l2);
    char line[160];
    std::snprintf(line, sizeof line, "epoch 0 loss %.9g lr %.6g", previous, lr);
    result.log.emplace_back(line);

    const auto batch = static_cast<std::size_t>(cfg.batch_size);
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const LogisticParams snapshot = params;
        if (cfg.shuffle) {
            rng.shuffle(std::span<std::size_t>(order));
        }
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t end = std::min(order.size(), start + batch);
            const auto g = gradient(params, data, std::span<const std::size_t>(order).subspan(start, end - start), cfg.l2);
            for (std::size_t k = 0; k < dim; ++k) {
                params.weights[k] -= lr * g[k];
            }
            params.bias -= lr * g[dim];
        }
        double loss = objective(params, data, order, cfg.l2);
        if (!std::isfinite(loss) || loss > previous + 1e-6) {
            std::snprintf(line, sizeof line, "epoch %d loss %.9g exceeds %.9g: rolled back, lr %.6g -> %.6g", epoch,
                          loss, previous, lr, lr * 0.5);
            result.log.emplace_back(line);
            params = snapshot;
            lr *= 0.5;
            loss = previous;
        } else {
            std::snprintf(line, sizeof line, "epoch %d loss %.9g lr %.6g", epoch, loss, lr);
            result.log.emplace_back(line);
        }
        result.epoch_losses.push_back(loss);
        previous = loss;
    }

    model.weights.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
        model.weights[k] = static_cast<float>(params.weights[k]);
    }
    model.bias = static_cast<float>(params.bias);
    result.final_loss = previous;
    return result;
}

TrainResult train(std::span<const EntropyTensor> features, std::span<const int> labels, const TrainConfig& cfg) {
    std::vector<std::vector<float>> rows;
    rows.reserve(features.size());
    for (const auto& t : features) {
        if (!rows.empty() && t.grid() != features.front().grid()) {
            throw std::invalid_argument("train: entropy tensors have different grid sizes");
        }
        rows.emplace_back(t.values().begin(), t.values().end());
    }
    return train(std::span<const std::vector<float>>(rows), labels, cfg);
}

double predict_score(const LinearModel& model, std::span<const float> features) {
    if (features.size() != model.dim()) {
        throw std::invalid_argument("predict_score: feature dimension " + std::to_string(features.size()) +
                                    " does not match model dimension " + std::to_string(model.dim()));
    }
    double s = model.bias;
    for (std::size_t k = 0; k < features.size(); ++k) {
        s += static_cast<double>(model.weights[k]) * ((static_cast<double>(features[k]) - model.feat_mean[k]) /
                                                      static_cast<double>(model.feat_std[k]));
    }
    return sigmoid(s);
}

double predict_score(const LinearModel& model, const EntropyTensor& features) {
    return predict_score(model, features.values());
}

namespace {

constexpr const char* kModelMagic = "noisent-linear-model";
constexpr int kModelVersion = 1;

}  // namespace

Bytes encode_model(const LinearModel& model) {
    if (model.feat_mean.size() != model.dim() || model.feat_std.size() != model.dim()) {
        throw std::invalid_argument("encode_model: normalization vectors do not match dim");
    }
    std::ostringstream header;
    header << kModelMagic << '\n'
           << "version " << kModelVersion << '\n'
           << "dim " << model.dim() << '\n'
           << "n " << model.params.grid << '\n'
           << "B " << model.params.bins << '\n'
           << "canvas " << model.params.canvas << '\n'
           << "range_mode " << to_string(model.params.range_mode) << '\n'
           << "seed " << model.seed << '\n'
           << "config " << (model.config_fingerprint.empty() ? "-" : model.config_fingerprint) << '\n'
           << "end\n";
    const std::string text = header.str();
    Bytes out(text.begin(), text.end());
    for (float w : model.weights) {
        binio::put_f32(out, w);
    }
    binio::put_f32(out, model.bias);
    for (float v : model.feat_mean) {
        binio::put_f32(out, v);
    }
    for (float v : model.feat_std) {
        binio::put_f32(out, v);
    }
    return out;
}

LinearModel decode_model(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 0;
    auto next_line = [&]() {
        const std::size_t start = pos;
        while (pos < bytes.size() && bytes[pos] != '\n') {
            ++pos;
        }
        if (pos >= bytes.size()) {
            throw FormatError("model: truncated header");
        }
        std::string line(bytes.begin() + static_cast<std::ptrdiff_t>(start), bytes.begin() + static_cast<std::ptrdiff_t>(pos));
        ++pos;
        return line;
    };
    if (next_line() != kModelMagic) {
        throw FormatError("model: bad magic line");
    }
    LinearModel model;
    std::size_t dim = 0;
    bool have_version = false;
    bool have_dim = false;
    for (std::string line = next_line(); line != "end"; line = next_line()) {
        std::istringstream fields(line);
        std::string key;
        std::string value;
        fields >> key >> value;
        try {
            if (key == "version") {
                if (std::stoi(value) != kModelVersion) {
                    throw FormatError("model: unsupported version " + value);
                }
                have_version = true;
            } else if (key == "dim") {
                dim = std::stoull(value);
                have_dim = true;
            } else if (key == "n") {
                model.params.grid = std::stoi(value);
            } else if (key == "B") {
                model.params.bins = std::stoi(value);
            } else if (key == "canvas") {
                model.params.canvas = std::stoi(value);
            } else if (key == "range_mode") {
                model.params.range_mode = parse_range_mode(value);
            } else if (key == "seed") {
                model.seed = std::stoull(value);
            } else if (key == "config") {
                model.config_fingerprint = value;
            } else {
                throw FormatError("model: unknown header key '" + key + "'");
            }
        } catch (const std::logic_error&) {
            throw FormatError("model: bad header line '" + line + "'");
        }
    }
    if (!have_version || !have_dim || dim == 0) {
        throw FormatError("model: header lacks version or dim");
    }
    binio::Reader in(bytes.subspan(pos));
    if (in.remaining() != (3 * dim + 1) * 4) {
        throw FormatError("model: payload size does not match dim");
    }
    model.weights.resize(dim);
    for (auto& w : model.weights) {
        w = in.f32();
    }
    model.bias = in.f32();
    model.feat_mean.resize(dim);
    for (auto& v : model.feat_mean) {
        v = in.f32();
    }
    model.feat_std.resize(dim);
    for (auto& v : model.feat_std) {
        v = in.f32();
        if (!(v > 0.0F)) {
            throw FormatError("model: non-positive feature std");
        }
    }
    return model;
}

void save_model(const std::filesystem::path& path, const LinearModel& model) { write_file(path, encode_model(model)); }

LinearModel load_model(const std::filesystem::path& path) { return decode_model(read_file(path)); }

}  // namespace noisent
