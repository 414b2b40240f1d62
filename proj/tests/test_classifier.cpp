#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "noisent/classifier.hpp"
#include "noisent/error.hpp"
#include "noisent/eval.hpp"
#include "noisent/rng.hpp"
#include "support.hpp"

using namespace noisent;

namespace {

struct Dataset {
    std::vector<std::vector<float>> rows;
    std::vector<int> labels;
};

// Two Gaussian clouds whose means differ along every coordinate.
Dataset clouds(std::size_t per_class, std::size_t dim, double gap, std::uint64_t seed) {
    Rng rng(seed);
    Dataset d;
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const int y = i % 2;
        std::vector<float> row(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            row[k] = static_cast<float>(rng.normal(3.0 + (y ? gap : 0.0) + 0.1 * k, 1.0));
        }
        d.rows.push_back(std::move(row));
        d.labels.push_back(y);
    }
    return d;
}

DesignMatrix random_design(Rng& rng, std::size_t rows, std::size_t dim) {
    DesignMatrix m;
    m.dim = dim;
    for (std::size_t i = 0; i < rows * dim; ++i) {
        m.values.push_back(rng.normal(0.0, 1.5));
    }
    for (std::size_t i = 0; i < rows; ++i) {
        m.labels.push_back(static_cast<int>(rng.uniform_int(0, 1)));
    }
    return m;
}

std::vector<double> scores_of(const LinearModel& model, const Dataset& d) {
    std::vector<double> out;
    for (const auto& r : d.rows) {
        out.push_back(predict_score(model, r));
    }
    return out;
}

}  // namespace

TEST(TrainConfig, Validation) {
    EXPECT_NO_THROW(TrainConfig{}.validate());
    TrainConfig c;
    c.learning_rate = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.epochs = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.batch_size = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Predict, FixedModels) {
    LinearModel m = LinearModel::identity(4);
    const std::vector<float> x{2.0F, -1.0F, 5.0F, 0.5F};
    EXPECT_EQ(predict_score(m, x), 0.5);
    m.bias = 30.0F;
    EXPECT_GT(predict_score(m, x), 1.0 - 1e-9);
    m.bias = 0.0F;
    m.weights[0] = 1.0F;
    EXPECT_NEAR(predict_score(m, x), 1.0 / (1.0 + std::exp(-2.0)), 1e-12);
    EXPECT_NEAR(predict_score(m, x), 0.8808, 1e-4);
    EXPECT_THROW(predict_score(m, std::vector<float>(3)), std::invalid_argument);
}

TEST(Predict, IsPureValue) {
    const Dataset d = clouds(20, 5, 1.0, 3);
    const TrainResult r = train(std::span<const std::vector<float>>(d.rows), d.labels, TrainConfig{});
    const double first = predict_score(r.model, d.rows[7]);
    for (std::size_t i = d.rows.size(); i-- > 0;) {
        predict_score(r.model, d.rows[i]);
    }
    EXPECT_EQ(predict_score(r.model, d.rows[7]), first);
}

TEST(Train, TwoSeparablePoints) {
    const std::vector<std::vector<float>> rows{{0.0F, 1.0F}, {1.0F, 0.0F}};
    const std::vector<int> labels{0, 1};
    TrainConfig cfg;
    cfg.epochs = 200;
    const TrainResult r = train(std::span<const std::vector<float>>(rows), labels, cfg);
    EXPECT_LT(predict_score(r.model, rows[0]), 0.5);
    EXPECT_GE(predict_score(r.model, rows[1]), 0.5);
}

TEST(Train, DeterministicPerSeed) {
    const Dataset d = clouds(30, 6, 0.8, 4);
    TrainConfig cfg;
    cfg.seed = 99;
    const auto a = train(std::span<const std::vector<float>>(d.rows), d.labels, cfg);
    const auto b = train(std::span<const std::vector<float>>(d.rows), d.labels, cfg);
    EXPECT_EQ(a.model, b.model);
    EXPECT_EQ(encode_model(a.model), encode_model(b.model));
}

TEST(Train, FlippedLabelsReverseRanking) {
    const Dataset d = clouds(40, 4, 0.7, 5);
    Dataset flipped = d;
    for (auto& y : flipped.labels) {
        y = 1 - y;
    }
    TrainConfig cfg;
    const auto a = train(std::span<const std::vector<float>>(d.rows), d.labels, cfg);
    const auto b = train(std::span<const std::vector<float>>(flipped.rows), flipped.labels, cfg);
    const double auc_a = auc(scores_of(a.model, d), d.labels);
    const double auc_b = auc(scores_of(b.model, d), d.labels);
    EXPECT_GT(auc_a, 0.7);
    EXPECT_NEAR(auc_b, 1.0 - auc_a, 0.02);
}

TEST(Train, LossNeverIncreases) {
    const Dataset d = clouds(50, 8, 0.5, 6);
    TrainConfig cfg;
    cfg.batch_size = 8;
    const auto r = train(std::span<const std::vector<float>>(d.rows), d.labels, cfg);
    ASSERT_EQ(r.epoch_losses.size(), 50U);
    for (std::size_t e = 1; e < r.epoch_losses.size(); ++e) {
        EXPECT_LE(r.epoch_losses[e], r.epoch_losses[e - 1] + 1e-6);
    }
    EXPECT_TRUE(std::isfinite(r.final_loss));
}

TEST(Train, LargeStepTriggersHalving) {
    const Dataset d = clouds(30, 10, 2.0, 8);
    TrainConfig cfg;
    cfg.learning_rate = 50.0;
    cfg.epochs = 30;
    cfg.batch_size = 1;
    const auto r = train(std::span<const std::vector<float>>(d.rows), d.labels, cfg);
    for (std::size_t e = 1; e < r.epoch_losses.size(); ++e) {
        EXPECT_LE(r.epoch_losses[e], r.epoch_losses[e - 1] + 1e-6);
    }
    bool halved = false;
    for (const auto& line : r.log) {
        halved = halved || line.find("rolled back") != std::string::npos;
    }
    EXPECT_TRUE(halved);
}

TEST(Train, Preconditions) {
    const std::vector<std::vector<float>> rows{{1.0F}, {2.0F}};
    EXPECT_THROW(train(std::span<const std::vector<float>>(rows), std::vector<int>{1, 1}, TrainConfig{}),
                 std::invalid_argument);
    EXPECT_THROW(train(std::span<const std::vector<float>>(rows), std::vector<int>{1}, TrainConfig{}),
                 std::invalid_argument);
    const std::vector<std::vector<float>> ragged{{1.0F}, {2.0F, 3.0F}};
    EXPECT_THROW(train(std::span<const std::vector<float>>(ragged), std::vector<int>{0, 1}, TrainConfig{}),
                 std::invalid_argument);
    const std::vector<EntropyTensor> tensors{EntropyTensor(2), EntropyTensor(3)};
    EXPECT_THROW(train(std::span<const EntropyTensor>(tensors), std::vector<int>{0, 1}, TrainConfig{}),
                 std::invalid_argument);
}

TEST(Standardization, ZeroMeanUnitStd) {
    Dataset d = clouds(60, 5, 1.0, 9);
    for (auto& r : d.rows) {
        r.push_back(4.0F);  // constant dimension
    }
    std::vector<float> mean, sd;
    fit_standardization(d.rows, mean, sd);
    EXPECT_EQ(sd.back(), 1.0F);
    for (std::size_t k = 0; k + 1 < mean.size(); ++k) {
        double m = 0.0, ss = 0.0;
        for (const auto& r : d.rows) {
            m += (r[k] - static_cast<double>(mean[k])) / sd[k];
        }
        m /= static_cast<double>(d.rows.size());
        for (const auto& r : d.rows) {
            const double z = (r[k] - static_cast<double>(mean[k])) / sd[k];
            ss += (z - m) * (z - m);
        }
        EXPECT_LT(std::abs(m), 1e-6);
        EXPECT_NEAR(std::sqrt(ss / static_cast<double>(d.rows.size())), 1.0, 1e-6);
    }
}

TEST(Gradient, MatchesCentralDifferences) {
    Rng rng(10);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t dim = static_cast<std::size_t>(rng.uniform_int(1, 12));
        const DesignMatrix data = random_design(rng, static_cast<std::size_t>(rng.uniform_int(1, 16)), dim);
        LogisticParams p{std::vector<double>(dim), rng.normal(0.0, 0.5)};
        for (auto& w : p.weights) {
            w = rng.normal(0.0, 0.5);
        }
        const double l2 = rng.uniform(0.0, 0.1);
        std::vector<std::size_t> idx(data.rows());
        std::iota(idx.begin(), idx.end(), 0);
        const auto g = gradient(p, data, idx, l2);
        ASSERT_EQ(g.size(), dim + 1);
        const double eps = 1e-4;
        for (std::size_t k = 0; k <= dim; ++k) {
            LogisticParams up = p, down = p;
            (k < dim ? up.weights[k] : up.bias) += eps;
            (k < dim ? down.weights[k] : down.bias) -= eps;
            const double numeric = (objective(up, data, idx, l2) - objective(down, data, idx, l2)) / (2 * eps);
            const double rel = std::abs(numeric - g[k]) / std::max({std::abs(numeric), std::abs(g[k]), 1e-6});
            EXPECT_LT(rel, 1e-4) << "trial " << trial << " coord " << k;
        }
    }
}

TEST(Gradient, VanishesAtFitAndIgnoresDuplication) {
    LinearModel m = LinearModel::identity(3);
    m.weights = {20.0F, 0.0F, 0.0F};
    const std::vector<std::vector<float>> batch{{1.0F, 0.0F, 0.0F}};
    const std::vector<int> labels{1};
    const double l2 = 1e-4;
    const auto g = gradient(m, batch, labels, l2);
    double norm = 0.0;
    for (double v : g) norm += v * v;
    EXPECT_LT(std::sqrt(norm), l2 * 20.0 + 1e-6);

    Rng rng(11);
    LinearModel r = LinearModel::identity(4);
    for (auto& w : r.weights) w = static_cast<float>(rng.normal());
    std::vector<std::vector<float>> rows;
    std::vector<int> ys;
    for (int i = 0; i < 5; ++i) {
        rows.push_back({static_cast<float>(rng.normal()), static_cast<float>(rng.normal()),
                        static_cast<float>(rng.normal()), static_cast<float>(rng.normal())});
        ys.push_back(i % 2);
    }
    auto rows2 = rows;
    rows2.insert(rows2.end(), rows.begin(), rows.end());
    auto ys2 = ys;
    ys2.insert(ys2.end(), ys.begin(), ys.end());
    const auto g1 = gradient(r, rows, ys, 0.01);
    const auto g2 = gradient(r, rows2, ys2, 0.01);
    for (std::size_t k = 0; k < g1.size(); ++k) {
        EXPECT_NEAR(g1[k], g2[k], 1e-12);
    }
}

TEST(ModelFile, RoundTripAndCorruption) {
    const Dataset d = clouds(10, 12, 1.0, 12);
    auto r = train(std::span<const std::vector<float>>(d.rows), d.labels, TrainConfig{});
    r.model.params = EntropyParams{8, 2, 16, RangeMode::Global};
    r.model.config_fingerprint = "abc:def";
    const Bytes bytes = encode_model(r.model);
    EXPECT_EQ(decode_model(bytes), r.model);
    const std::string text(bytes.begin(), bytes.end());
    EXPECT_EQ(text.rfind("noisent-linear-model\nversion 1\ndim 12\n", 0), 0U);

    testing_support::TempDir dir("model");
    save_model(dir / "m.bin", r.model);
    EXPECT_EQ(load_model(dir / "m.bin"), r.model);

    Bytes truncated(bytes.begin(), bytes.end() - 3);
    EXPECT_THROW(decode_model(truncated), FormatError);
    Bytes wrong = bytes;
    wrong[0] = 'X';
    EXPECT_THROW(decode_model(wrong), FormatError);
}
