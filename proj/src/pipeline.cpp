#include "noisent/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "noisent/codec.hpp"
#include "noisent/error.hpp"
#include "noisent/parallel.hpp"
#include "noisent/resize.hpp"

namespace noisent {

namespace {

std::string text_of(const std::vector<std::string>& lines, const char* prefix = "") {
    std::string out;
    for (const auto& l : lines) {
        out += prefix;
        out += l;
        out += '\n';
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text(const std::filesystem::path& path) {
    const Bytes bytes = read_file(path);
    return {bytes.begin(), bytes.end()};
}

void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
    if (cfg.out.empty()) {
        out << text;
    } else {
        write_text(cfg.out, text);
        out << "wrote " << cfg.out.string() << '\n';
    }
}

void require(const std::filesystem::path& p, const char* what) {
    if (p.empty()) {
        throw std::invalid_argument(std::string("missing required setting: ") + what);
    }
}

std::vector<ManifestRecord> load_checked_manifest(const RunConfig& cfg) {
    require(cfg.manifest, "manifest");
    auto records = load_manifest(cfg.manifest);
    if (records.empty()) {
        throw std::invalid_argument("manifest " + cfg.manifest.string() + " has no records");
    }
    return records;
}

std::string sidecar_fingerprint(const std::filesystem::path& sidecar) {
    std::istringstream in(read_text(sidecar));
    std::string line;
    while (std::getline(in, line)) {
        if (line.starts_with("fingerprint=")) {
            return line.substr(12);
        }
    }
    throw FormatError(sidecar.string() + " has no fingerprint line");
}

std::string header_lines(const RunConfig& cfg, const std::string& command) {
    std::vector<std::string> lines{"command=" + command};
    const auto echo = cfg.echo();
    lines.insert(lines.end(), echo.begin(), echo.end());
    lines.push_back("feature_fingerprint=" + cfg.feature_fingerprint());
    return text_of(lines, "# ");
}

std::vector<std::string> report_config(const RunConfig& cfg, const std::string& command, const LinearModel& model) {
    std::vector<std::string> lines{"command=" + command};
    const auto echo = cfg.echo();
    lines.insert(lines.end(), echo.begin(), echo.end());
    lines.push_back("feature_fingerprint=" + cfg.feature_fingerprint());
    lines.push_back("model_fingerprint=" + model.config_fingerprint);
    return lines;
}

LinearModel load_matching_model(const RunConfig& cfg) {
    require(cfg.model, "model");
    LinearModel model = load_model(cfg.model);
    const std::string expected = cfg.feature_fingerprint();
    if (!model.config_fingerprint.starts_with(expected + ":")) {
        throw std::runtime_error("model " + cfg.model.string() + " was trained on features with fingerprint '" +
                                 model.config_fingerprint.substr(0, model.config_fingerprint.find(':')) +
                                 "', current configuration gives '" + expected + "'");
    }
    if (!(model.params == cfg.entropy)) {
        throw std::runtime_error("model entropy parameters differ from the configuration");
    }
    return model;
}

FeatureBatch batch_from_cache(const std::vector<ManifestRecord>& records, const RunConfig& cfg) {
    FeatureBatch batch;
    const auto tensors = load_cached_features(records, cfg);
    batch.features.assign(tensors.begin(), tensors.end());
    return batch;
}

void collect_failures(CommandStatus& status, const std::vector<Diagnostic>& failures) {
    for (const auto& d : failures) {
        status.errors.push_back("record " + std::to_string(d.index) + ": " + d.code + ": " + d.message);
    }
}

}  // namespace

std::filesystem::path feature_cache_path(const std::filesystem::path& dir, const ManifestRecord& record) {
    const std::filesystem::path rel(record.path);
    if (rel.is_absolute() || rel.empty()) {
        throw std::invalid_argument("record path must be relative: '" + record.path + "'");
    }
    for (const auto& part : rel) {
        if (part == "..") {
            throw std::invalid_argument("record path may not leave the root: '" + record.path + "'");
        }
    }
    return dir / (record.path + ".nent");
}

void check_feature_dir(const std::filesystem::path& dir, const RunConfig& cfg) {
    const auto sidecar = dir / kFeatureSidecar;
    if (!std::filesystem::exists(sidecar)) {
        throw std::runtime_error("feature directory " + dir.string() + " has no " + kFeatureSidecar);
    }
    const std::string found = sidecar_fingerprint(sidecar);
    if (found != cfg.feature_fingerprint()) {
        throw std::runtime_error("feature directory " + dir.string() + " was produced with fingerprint " + found +
                                 ", current configuration gives " + cfg.feature_fingerprint());
    }
}

std::vector<EntropyTensor> load_cached_features(const std::vector<ManifestRecord>& records, const RunConfig& cfg) {
    check_feature_dir(cfg.features, cfg);
    std::vector<EntropyTensor> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        const auto path = feature_cache_path(cfg.features, r);
        if (!std::filesystem::exists(path)) {
            throw std::runtime_error("missing feature cache " + path.string() + " (run extract first)");
        }
        FeatureCacheHeader header;
        out.push_back(read_feature_cache(path, &header));
        if (!(header.params == cfg.entropy)) {
            throw std::runtime_error("feature cache " + path.string() + " does not match the entropy parameters");
        }
    }
    return out;
}

ExtractStatus cmd_extract(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    require(cfg.features, "features (output directory)");
    const auto records = load_checked_manifest(cfg);
    const auto root = cfg.image_root();
    const auto sidecar = cfg.features / kFeatureSidecar;
    if (std::filesystem::exists(sidecar)) {
        check_feature_dir(cfg.features, cfg);
    } else {
        write_text(sidecar, header_lines(cfg, "extract") + "fingerprint=" + cfg.feature_fingerprint() + "\n");
    }

    std::vector<std::size_t> pending;
    ExtractStatus status;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto path = feature_cache_path(cfg.features, records[i]);
        bool reusable = false;
        if (std::filesystem::exists(path)) {
            try {
                reusable = read_feature_cache_header(path).params == cfg.entropy;
            } catch (const std::exception&) {
                reusable = false;
            }
        }
        if (reusable) {
            ++status.reused;
        } else {
            pending.push_back(i);
        }
    }

    std::vector<std::string> errors(pending.size());
    parallel_for(pending.size(), cfg.threads, [&](std::size_t k) {
        const auto& record = records[pending[k]];
        try {
            const ImageU8 img = load_image(root / record.path);
            write_feature_cache(feature_cache_path(cfg.features, record), extract_features(img, cfg.nlm, cfg.entropy),
                                cfg.entropy);
        } catch (const std::exception& e) {
            errors[k] = "record " + std::to_string(pending[k]) + ": " + record.path + ": " + e.what();
        }
    });
    for (const auto& e : errors) {
        if (e.empty()) {
            ++status.computed;
        } else {
            status.errors.push_back(e);
        }
    }
    out << "extract: computed=" << status.computed << " reused=" << status.reused
        << " failed=" << status.errors.size() << " fingerprint=" << cfg.feature_fingerprint() << '\n';
    return status;
}

CommandStatus cmd_train(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    require(cfg.model, "model (output path)");
    require(cfg.features, "features");
    const auto records = load_checked_manifest(cfg);
    const auto features = load_cached_features(records, cfg);
    std::vector<int> labels;
    labels.reserve(records.size());
    for (const auto& r : records) {
        labels.push_back(r.label_value());
    }
    TrainResult result = train(std::span<const EntropyTensor>(features), labels, cfg.train);
    result.model.params = cfg.entropy;
    result.model.config_fingerprint = cfg.model_fingerprint();
    save_model(cfg.model, result.model);

    std::string log = header_lines(cfg, "train");
    log += "# model_fingerprint=" + result.model.config_fingerprint + "\n";
    log += "records=" + std::to_string(records.size()) + "\n";
    for (const auto& line : result.log) {
        log += line + "\n";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "final_loss=%.9g\n", result.final_loss);
    log += buf;
    write_text(cfg.model.string() + ".log", log);
    out << "train: " << records.size() << " records, " << buf << "wrote " << cfg.model.string() << '\n';
    return {};
}

CommandStatus cmd_eval(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    const auto records = load_checked_manifest(cfg);
    const LinearModel model = load_matching_model(cfg);
    const FeatureBatch batch = cfg.features.empty()
                                   ? extract_batch(records, cfg.image_root(), cfg.nlm, cfg.entropy, cfg.threads)
                                   : batch_from_cache(records, cfg);
    CommandStatus status;
    collect_failures(status, batch.failures);
    const EvalReport report = evaluate_batch(model, records, batch, cfg.threshold);
    emit(cfg, out, format_report(report, report_config(cfg, "eval", model)));
    return status;
}

CommandStatus cmd_robustness(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    const auto records = load_checked_manifest(cfg);
    const LinearModel model = load_matching_model(cfg);
    const auto rows =
        jpeg_robustness(model, records, cfg.image_root(), cfg.qualities, cfg.nlm, cfg.entropy, cfg.threshold, cfg.threads);
    CommandStatus status;
    collect_failures(status, rows.front().report.skipped_items);
    emit(cfg, out, text_of(report_config(cfg, "robustness", model), "# ") + format_robustness_tsv(rows));
    return status;
}

CommandStatus cmd_stats(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    const auto records = load_checked_manifest(cfg);
    const auto root = cfg.image_root();
    CommandStatus status;

    const auto hist = resolution_histogram(records, root, cfg.threads);
    const auto filtered = quality_filter(records, root, cfg.curation, cfg.threads);
    std::ostringstream stats;
    stats << header_lines(cfg, "stats");
    stats << "records=" << records.size() << '\n';
    static const char* kBins[] = {"1e3-1e4", "1e4-1e5", "1e5-1e6", "1e6+"};
    for (int b = 0; b < 4; ++b) {
        stats << "resolution." << kBins[b] << ".count=" << hist.counts[b] << '\n';
        stats << "resolution." << kBins[b] << ".fraction=" << hist.fractions[b] << '\n';
    }
    stats << "resolution.unreadable=" << hist.unreadable.size() << '\n';
    stats << "filter.kept=" << filtered.kept.size() << '\n';
    stats << "filter.rejected=" << filtered.rejected.size() << '\n';
    std::map<std::string, std::size_t> by_reason;
    std::string rejections;
    for (const auto& r : filtered.rejected) {
        ++by_reason[r.reason];
        rejections += to_json_line(r) + "\n";
    }
    for (const auto& [reason, n] : by_reason) {
        stats << "filter.rejected." << reason << '=' << n << '\n';
    }

    const FeatureBatch batch = cfg.features.empty() ? extract_batch(records, root, cfg.nlm, cfg.entropy, cfg.threads)
                                                    : batch_from_cache(records, cfg);
    collect_failures(status, batch.failures);
    std::vector<EntropyTensor> real;
    std::vector<EntropyTensor> generated;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (batch.features[i]) {
            (records[i].label == Label::Real ? real : generated).push_back(*batch.features[i]);
        }
    }
    std::string summary;
    if (real.empty() || generated.empty()) {
        status.errors.push_back("entropy summary needs readable images of both labels");
        stats << "entropy_summary=unavailable\n";
    } else {
        const auto s = entropy_distribution_summary(real, generated);
        summary = format_entropy_summary_tsv(s);
        stats << "entropy.cohen_d=" << s.cohen_d << '\n';
    }

    if (cfg.out.empty()) {
        out << stats.str() << rejections << summary;
    } else {
        write_text(cfg.out / "stats.txt", stats.str());
        write_text(cfg.out / "rejections.jsonl", rejections);
        if (!summary.empty()) {
            write_text(cfg.out / "entropy_summary.tsv", header_lines(cfg, "stats") + summary);
        }
        out << "stats: wrote " << cfg.out.string() << '\n';
    }
    return status;
}

CommandStatus cmd_maskgen(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    require(cfg.out, "out (output directory)");
    const auto count = static_cast<std::size_t>(cfg.mask_count);
    std::vector<BrushMaskResult> masks(count);
    std::vector<std::uint64_t> seeds(count);
    parallel_for(count, cfg.threads, [&](std::size_t i) {
        BrushParams p = cfg.brush;
        p.seed = seeds[i] = mix_seed(cfg.seed, i);
        masks[i] = gen_brush_mask(cfg.mask_height, cfg.mask_width, p);
    });
    CommandStatus status;
    std::string fragment;
    for (std::size_t i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "mask_%04zu.png", i);
        write_file(cfg.out / name, encode_mask_png(masks[i].mask));
        nlohmann::json j{{"mask_path", name},
                         {"width", cfg.mask_width},
                         {"height", cfg.mask_height},
                         {"coverage", masks[i].mask.coverage()},
                         {"strokes", masks[i].strokes},
                         {"seed", seeds[i]}};
        fragment += j.dump() + "\n";
        if (!masks[i].coverage_met) {
            status.errors.push_back(std::string(name) + ": coverage " + std::to_string(masks[i].mask.coverage()) +
                                    " below the configured minimum");
        }
    }
    write_text(cfg.out / "masks.jsonl", fragment);
    std::string sidecar = header_lines(cfg, "maskgen");
    sidecar += "fingerprint=" + fnv1a_hex(text_of(cfg.echo())) + "\n";
    write_text(cfg.out / "masks.config", sidecar);
    out << "maskgen: wrote " << count << " masks to " << cfg.out.string() << '\n';
    return status;
}

CommandStatus cmd_prompts(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    require(cfg.templates, "templates");
    require(cfg.corpus, "corpus");
    const auto templates = load_templates(cfg.templates);
    const auto repo = load_repository(cfg.corpus);
    BatchOptions options;
    options.mixture = cfg.mixture;
    if (cfg.demographics) {
        options.targets = DemographicTargets{};
    }
    const BatchResult batch = generate_batch(templates, repo, cfg.prompt_count, cfg.seed, options);

    CommandStatus status;
    if (batch.shortfall > 0) {
        status.errors.push_back(std::to_string(batch.shortfall) + " prompts could not be made unique");
    }
    std::vector<std::string> texts;
    for (const auto& p : batch.prompts) {
        texts.push_back(p.text);
    }
    if (cfg.client != ClientMode::None) {
        IdentityClient identity;
        SuffixEnrichmentClient suffix;
        RefinementClient& client = cfg.client == ClientMode::Suffix ? static_cast<RefinementClient&>(suffix) : identity;
        for (auto* step : {&refine, &enrich}) {
            RefineResult r = (*step)(texts, client);
            for (std::size_t k = 0; k < r.flagged.size(); ++k) {
                status.errors.push_back("prompt " + std::to_string(r.flagged[k]) + ": " + r.errors[k]);
            }
            texts = std::move(r.prompts);
        }
    }
    std::string body = header_lines(cfg, "prompts");
    body += "# fingerprint=" + fnv1a_hex(text_of(cfg.echo())) + "\n";
    for (std::size_t i = 0; i < texts.size(); ++i) {
        body += to_string(batch.prompts[i].category) + "\t" + texts[i] + "\n";
    }
    emit(cfg, out, body);
    return status;
}

CommandStatus cmd_synthcorpus(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    require(cfg.out, "out (output directory)");
    SynthParams params = cfg.synth;
    params.seed = cfg.seed;
    const auto n = static_cast<std::size_t>(params.count_per_class);
    std::vector<SynthPair> pairs(n);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
        const SynthPair pair = render_synthetic_pair(params, static_cast<int>(i));
        char name[32];
        std::snprintf(name, sizeof name, "%04zu.png", i);
        write_file(cfg.out / "real" / name, encode_png(pair.real));
        write_file(cfg.out / "generated" / name, encode_png(pair.generated));
    });

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_seed(params.seed, 0x5eed5eedULL));
    rng.shuffle(std::span<std::size_t>(order));
    const std::size_t n_train = n * 4 / 5;
    std::vector<bool> in_train(n, false);
    for (std::size_t k = 0; k < n_train; ++k) {
        in_train[order[k]] = true;
    }

    std::vector<ManifestRecord> all, train_split, test_split;
    for (std::size_t i = 0; i < n; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "%04zu.png", i);
        ManifestRecord real{std::string("real/") + name, Label::Real, Category::Landscape, Method::None, "", {}, {}};
        ManifestRecord gen{std::string("generated/") + name, Label::Generated, Category::Landscape, Method::T2I,
                           "synthetic-bicubic", {}, {}};
        for (const auto& r : {real, gen}) {
            all.push_back(r);
            (in_train[i] ? train_split : test_split).push_back(r);
        }
    }
    save_manifest(cfg.out / "manifest.jsonl", all);
    save_manifest(cfg.out / "train.jsonl", train_split);
    save_manifest(cfg.out / "test.jsonl", test_split);
    std::string sidecar = header_lines(cfg, "synthcorpus");
    sidecar += "fingerprint=" + fnv1a_hex(text_of(cfg.echo())) + "\n";
    write_text(cfg.out / "corpus.config", sidecar);
    out << "synthcorpus: " << n << " scenes (" << train_split.size() << " train / " << test_split.size()
        << " test images) in " << cfg.out.string() << '\n';
    return {};
}

std::vector<float> raw_pixel_features(const ImageU8& img, int side) {
    const ImageF32 small = resize_bicubic(to_float(img), side, side);
    std::vector<float> out(small.samples().begin(), small.samples().end());
    for (float& v : out) {
        v /= 255.0F;
    }
    return out;
}

}  // namespace noisent
