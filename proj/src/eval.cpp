#include "noisent/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "noisent/codec.hpp"
#include "noisent/parallel.hpp"

namespace noisent {

namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) {
        throw std::invalid_argument("scores and labels differ in length");
    }
    if (scores.empty()) {
        throw std::invalid_argument("no scores");
    }
    for (int l : labels) {
        if (l != 0 && l != 1) {
            throw std::invalid_argument("labels must be 0 or 1");
        }
    }
}

std::string fmt(double v) {
    std::ostringstream out;
    out << std::setprecision(10) << v;
    return out.str();
}

}  // namespace

Confusion confusion(std::span<const double> scores, std::span<const int> labels, double threshold) {
    check_inputs(scores, labels);
    Confusion c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] >= threshold;
        if (labels[i] == 1) {
            ++(predicted ? c.tp : c.fn);
        } else {
            ++(predicted ? c.fp : c.tn);
        }
    }
    return c;
}

double accuracy(const Confusion& c) {
    if (c.total() == 0) {
        throw std::invalid_argument("empty confusion matrix");
    }
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

double accuracy(std::span<const double> scores, std::span<const int> labels, double threshold) {
    return accuracy(confusion(scores, labels, threshold));
}

double f1(const Confusion& c) {
    const std::size_t denom = 2 * c.tp + c.fp + c.fn;
    return denom == 0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

double f1(std::span<const double> scores, std::span<const int> labels, double threshold) {
    return f1(confusion(scores, labels, threshold));
}

double auc(std::span<const double> scores, std::span<const int> labels) {
    check_inputs(scores, labels);
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Ranks are 1-based; ties share the doubled midrank so the sum stays integral.
    std::uint64_t rank_sum_x2 = 0;
    std::uint64_t positives = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) {
            ++j;
        }
        const std::uint64_t midrank_x2 = (i + 1) + j;
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) {
                rank_sum_x2 += midrank_x2;
                ++positives;
            }
        }
        i = j;
    }
    const std::uint64_t negatives = n - positives;
    if (positives == 0 || negatives == 0) {
        throw std::invalid_argument("auc needs both classes");
    }
    // U = R+ - m(m+1)/2, everything doubled.
    const std::uint64_t u_x2 = rank_sum_x2 - positives * (positives + 1);
    return static_cast<double>(u_x2) / (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

namespace {

void mean_var(std::span<const double> v, double& mean, double& var) {
    mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) {
        ss += (x - mean) * (x - mean);
    }
    var = v.size() > 1 ? ss / static_cast<double>(v.size() - 1) : 0.0;
}

}  // namespace

double cohen_d(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("cohen_d needs non-empty groups");
    }
    double ma = 0.0, va = 0.0, mb = 0.0, vb = 0.0;
    mean_var(a, ma, va);
    mean_var(b, mb, vb);
    const double dof = static_cast<double>(a.size() + b.size()) - 2.0;
    const double pooled = dof > 0.0 ? std::sqrt(((a.size() - 1.0) * va + (b.size() - 1.0) * vb) / dof) : 0.0;
    const double diff = ma - mb;
    if (pooled == 0.0) {
        if (diff == 0.0) {
            return 0.0;
        }
        return diff > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    }
    return diff / pooled;
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) {
        throw std::invalid_argument("quantile of empty sequence");
    }
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

DistributionSummary summarize(std::span<const double> values) {
    if (values.empty()) {
        throw std::invalid_argument("summarize: empty sequence");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    DistributionSummary s;
    s.count = sorted.size();
    double var = 0.0;
    mean_var(sorted, s.mean, var);
    s.std = std::sqrt(var);
    s.min = sorted.front();
    s.max = sorted.back();
    for (int q = 0; q < 3; ++q) {
        s.quartiles[q] = quantile_sorted(sorted, 0.25 * (q + 1));
    }
    for (int d = 0; d < 9; ++d) {
        s.deciles[d] = quantile_sorted(sorted, 0.1 * (d + 1));
    }
    return s;
}

EvalReport make_report(std::span<const double> scores, std::span<const int> labels, double threshold) {
    EvalReport r;
    r.threshold = threshold;
    r.confusion = confusion(scores, labels, threshold);
    r.count = r.confusion.total();
    r.acc = accuracy(r.confusion);
    r.f1 = f1(r.confusion);
    r.auc = auc(scores, labels);
    r.scores.assign(scores.begin(), scores.end());
    return r;
}

FeatureBatch extract_batch(const std::vector<ManifestRecord>& records, const std::filesystem::path& root,
                           const NlmParams& nlm, const EntropyParams& ep, int threads,
                           const ImageTransform& transform) {
    nlm.validate();
    ep.validate();
    FeatureBatch batch;
    batch.features.resize(records.size());
    std::vector<std::string> errors(records.size());
    parallel_for(records.size(), threads, [&](std::size_t i) {
        ImageU8 img;
        try {
            img = load_image(root / records[i].path);
        } catch (const std::exception& e) {
            errors[i] = e.what();
            return;
        }
        if (transform) {
            img = transform(img);
        }
        batch.features[i] = extract_features(img, nlm, ep);
    });
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!batch.features[i]) {
            batch.failures.push_back({i, "unreadable-image", records[i].path + ": " + errors[i]});
        }
    }
    return batch;
}

EvalReport evaluate_batch(const LinearModel& model, const std::vector<ManifestRecord>& records,
                          const FeatureBatch& batch, double threshold) {
    if (batch.features.size() != records.size()) {
        throw std::invalid_argument("feature batch does not match the manifest");
    }
    std::vector<double> scores;
    std::vector<int> labels;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (batch.features[i]) {
            scores.push_back(predict_score(model, *batch.features[i]));
            labels.push_back(records[i].label_value());
        }
    }
    const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
    const bool has_neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
    if (!has_pos || !has_neg) {
        throw std::invalid_argument("evaluation needs readable items of both labels (" +
                                    std::to_string(batch.failures.size()) + " skipped)");
    }
    EvalReport r = make_report(scores, labels, threshold);
    r.skipped = batch.failures.size();
    r.skipped_items = batch.failures;
    return r;
}

EvalReport evaluate(const LinearModel& model, const std::vector<ManifestRecord>& records,
                    const std::filesystem::path& root, const NlmParams& nlm, const EntropyParams& ep,
                    double threshold, int threads) {
    if (records.empty()) {
        throw std::invalid_argument("evaluate: empty manifest");
    }
    return evaluate_batch(model, records, extract_batch(records, root, nlm, ep, threads), threshold);
}

ImageU8 jpeg_round_trip(const ImageU8& img, int quality) { return decode_image(encode_jpeg(img, quality)); }

std::vector<RobustnessRow> jpeg_robustness(const LinearModel& model, const std::vector<ManifestRecord>& records,
                                           const std::filesystem::path& root, const std::vector<int>& qualities,
                                           const NlmParams& nlm, const EntropyParams& ep, double threshold,
                                           int threads) {
    for (int q : qualities) {
        if (q < 1 || q > 100) {
            throw std::invalid_argument("JPEG quality must be in 1..100, got " + std::to_string(q));
        }
    }
    std::vector<RobustnessRow> rows;
    rows.push_back({std::nullopt, evaluate(model, records, root, nlm, ep, threshold, threads)});
    for (int q : qualities) {
        const auto batch = extract_batch(records, root, nlm, ep, threads,
                                         [q](const ImageU8& img) { return jpeg_round_trip(img, q); });
        rows.push_back({q, evaluate_batch(model, records, batch, threshold)});
    }
    return rows;
}

EntropySummary entropy_distribution_summary(const std::vector<EntropyTensor>& real,
                                            const std::vector<EntropyTensor>& generated) {
    if (real.empty() || generated.empty()) {
        throw std::invalid_argument("entropy summary needs at least one tensor per class");
    }
    auto means = [](const std::vector<EntropyTensor>& tensors) {
        std::vector<double> out;
        out.reserve(tensors.size());
        for (const auto& t : tensors) {
            out.push_back(t.mean());
        }
        return out;
    };
    const auto real_means = means(real);
    const auto gen_means = means(generated);
    EntropySummary s;
    s.classes[0] = {Label::Real, summarize(real_means)};
    s.classes[1] = {Label::Generated, summarize(gen_means)};
    s.cohen_d = cohen_d(gen_means, real_means);
    return s;
}

std::string format_report(const EvalReport& r, const std::vector<std::string>& config) {
    std::ostringstream out;
    for (const auto& line : config) {
        out << line << '\n';
    }
    out << "count=" << r.count << '\n'
        << "skipped=" << r.skipped << '\n'
        << "threshold=" << fmt(r.threshold) << '\n'
        << "acc=" << fmt(r.acc) << '\n'
        << "f1=" << fmt(r.f1) << '\n'
        << "auc=" << fmt(r.auc) << '\n'
        << "tp=" << r.confusion.tp << '\n'
        << "fp=" << r.confusion.fp << '\n'
        << "tn=" << r.confusion.tn << '\n'
        << "fn=" << r.confusion.fn << '\n';
    for (const auto& d : r.skipped_items) {
        out << "skipped_item=" << d.index << ' ' << d.message << '\n';
    }
    return out.str();
}

std::string format_robustness_tsv(const std::vector<RobustnessRow>& rows) {
    std::ostringstream out;
    out << "quality\tcount\tskipped\tacc\tf1\tauc\ttp\tfp\ttn\tfn\n";
    for (const auto& row : rows) {
        const auto& r = row.report;
        out << (row.quality ? std::to_string(*row.quality) : std::string("original")) << '\t' << r.count << '\t'
            << r.skipped << '\t' << fmt(r.acc) << '\t' << fmt(r.f1) << '\t' << fmt(r.auc) << '\t' << r.confusion.tp
            << '\t' << r.confusion.fp << '\t' << r.confusion.tn << '\t' << r.confusion.fn << '\n';
    }
    return out.str();
}

std::string format_entropy_summary_tsv(const EntropySummary& s) {
    std::ostringstream out;
    out << "class\tcount\tmean\tstd\tmin\tq1\tmedian\tq3\tmax";
    for (int d = 1; d <= 9; ++d) {
        out << "\td" << d;
    }
    out << '\n';
    for (const auto& c : s.classes) {
        const auto& d = c.summary;
        out << to_string(c.label) << '\t' << d.count << '\t' << fmt(d.mean) << '\t' << fmt(d.std) << '\t'
            << fmt(d.min) << '\t' << fmt(d.quartiles[0]) << '\t' << fmt(d.quartiles[1]) << '\t' << fmt(d.quartiles[2])
            << '\t' << fmt(d.max);
        for (double v : d.deciles) {
            out << '\t' << fmt(v);
        }
        out << '\n';
    }
    out << "# cohen_d=" << fmt(s.cohen_d) << '\n';
    return out.str();
}

}  // namespace noisent
