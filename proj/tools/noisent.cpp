// noisent: command-line front end for the noise-entropy detection toolkit.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "noisent/config.hpp"
#include "noisent/manifest.hpp"
#include "noisent/pipeline.hpp"

namespace {

struct Options {
    std::string config_file;
    std::vector<std::string> sets;
    std::vector<std::pair<std::string, std::string>> flags;  // key, value from dedicated flags
};

// Dedicated flags are sugar for --set key=value and share its precedence.
void add_flag(CLI::App* sub, Options& opts, const std::string& flag, const std::string& key, const std::string& help) {
    sub->add_option_function<std::string>(
        flag, [&opts, key](const std::string& v) { opts.flags.emplace_back(key, v); }, help);
}

void add_common(CLI::App* sub, Options& opts) {
    sub->add_option("-c,--config", opts.config_file, "key = value configuration file");
    sub->add_option("--set", opts.sets, "override one setting, KEY=VALUE (repeatable)");
    add_flag(sub, opts, "--threads", "threads", "worker threads (default: NOISENT_THREADS or all cores)");
}

noisent::RunConfig resolve(const Options& opts) {
    noisent::RunConfig cfg;
    if (!opts.config_file.empty()) {
        cfg.apply_file(opts.config_file);
    }
    for (const auto& [key, value] : opts.flags) {
        cfg.set(key, value);
    }
    for (const auto& s : opts.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("--set expects KEY=VALUE, got '" + s + "'");
        }
        cfg.set(s.substr(0, eq), s.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

int finish(const noisent::CommandStatus& status) {
    for (const auto& e : status.errors) {
        std::cerr << "error: " << e << '\n';
    }
    return status.exit_code();
}

int run_validate(const noisent::RunConfig& cfg) {
    if (cfg.manifest.empty()) {
        throw std::invalid_argument("missing required setting: manifest");
    }
    const auto records = noisent::load_manifest(cfg.manifest);
    const auto diagnostics = noisent::validate_manifest(records, cfg.image_root(), cfg.threads);
    for (const auto& d : diagnostics) {
        std::cout << "record " << d.index << ": " << d.code << ": " << d.message << '\n';
    }
    std::cout << "validate: " << records.size() << " records, " << diagnostics.size() << " diagnostics\n";
    return diagnostics.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"noisent: AI-generated image detection from NLM noise entropy"};
    app.require_subcommand(1);
    Options opts;

    auto* extract = app.add_subcommand("extract", "extract entropy features for a manifest into a cache directory");
    add_common(extract, opts);
    add_flag(extract, opts, "-m,--manifest", "paths.manifest", "manifest (JSONL)");
    add_flag(extract, opts, "--root", "paths.root", "image root (default: manifest directory)");
    add_flag(extract, opts, "-f,--features", "paths.features", "feature cache directory");

    auto* train = app.add_subcommand("train", "train a linear model from cached features");
    add_common(train, opts);
    add_flag(train, opts, "-m,--manifest", "paths.manifest", "training manifest");
    add_flag(train, opts, "-f,--features", "paths.features", "feature cache directory");
    add_flag(train, opts, "--model", "paths.model", "model output path (a .log is written next to it)");

    auto* eval = app.add_subcommand("eval", "evaluate a model on a manifest");
    add_common(eval, opts);
    add_flag(eval, opts, "-m,--manifest", "paths.manifest", "evaluation manifest");
    add_flag(eval, opts, "--root", "paths.root", "image root (default: manifest directory)");
    add_flag(eval, opts, "-f,--features", "paths.features", "use cached features instead of re-extracting");
    add_flag(eval, opts, "--model", "paths.model", "model file");
    add_flag(eval, opts, "-o,--out", "paths.out", "report path (default: stdout)");

    auto* robust = app.add_subcommand("robustness", "JPEG quality sweep");
    add_common(robust, opts);
    add_flag(robust, opts, "-m,--manifest", "paths.manifest", "evaluation manifest");
    add_flag(robust, opts, "--root", "paths.root", "image root (default: manifest directory)");
    add_flag(robust, opts, "--model", "paths.model", "model file");
    add_flag(robust, opts, "--qualities", "eval.qualities", "comma-separated JPEG qualities");
    add_flag(robust, opts, "-o,--out", "paths.out", "table path (default: stdout)");

    auto* stats = app.add_subcommand("stats", "resolution histogram, quality-filter dry run, entropy summary");
    add_common(stats, opts);
    add_flag(stats, opts, "-m,--manifest", "paths.manifest", "manifest");
    add_flag(stats, opts, "--root", "paths.root", "image root (default: manifest directory)");
    add_flag(stats, opts, "-f,--features", "paths.features", "use cached features instead of re-extracting");
    add_flag(stats, opts, "-o,--out", "paths.out", "output directory (default: stdout)");

    auto* maskgen = app.add_subcommand("maskgen", "generate brush inpainting masks");
    add_common(maskgen, opts);
    add_flag(maskgen, opts, "-n,--count", "mask.count", "number of masks");
    add_flag(maskgen, opts, "--height", "mask.height", "mask height");
    add_flag(maskgen, opts, "--width", "mask.width", "mask width");
    add_flag(maskgen, opts, "--seed", "seed", "base seed");
    add_flag(maskgen, opts, "-o,--out", "paths.out", "output directory");

    auto* prompts = app.add_subcommand("prompts", "generate prompts from templates and a corpus repository");
    add_common(prompts, opts);
    add_flag(prompts, opts, "-t,--templates", "paths.templates", "template file");
    add_flag(prompts, opts, "--corpus", "paths.corpus", "corpus repository file");
    add_flag(prompts, opts, "-n,--count", "prompts.count", "number of prompts");
    add_flag(prompts, opts, "--seed", "seed", "seed");
    add_flag(prompts, opts, "--client", "prompts.client", "refinement client: none, identity, suffix");
    add_flag(prompts, opts, "-o,--out", "paths.out", "prompt file (default: stdout)");

    auto* synth = app.add_subcommand("synthcorpus", "write the synthetic two-class corpus");
    add_common(synth, opts);
    add_flag(synth, opts, "--size", "synth.size", "image side in pixels");
    add_flag(synth, opts, "-n,--count", "synth.count", "scenes (images per class)");
    add_flag(synth, opts, "--seed", "seed", "seed");
    add_flag(synth, opts, "-o,--out", "paths.out", "output directory");

    auto* validate = app.add_subcommand("validate", "check a manifest and the files it references");
    add_common(validate, opts);
    add_flag(validate, opts, "-m,--manifest", "paths.manifest", "manifest");
    add_flag(validate, opts, "--root", "paths.root", "image root (default: manifest directory)");

    CLI11_PARSE(app, argc, argv);

    try {
        const noisent::RunConfig cfg = resolve(opts);
        if (extract->parsed()) return finish(noisent::cmd_extract(cfg, std::cout));
        if (train->parsed()) return finish(noisent::cmd_train(cfg, std::cout));
        if (eval->parsed()) return finish(noisent::cmd_eval(cfg, std::cout));
        if (robust->parsed()) return finish(noisent::cmd_robustness(cfg, std::cout));
        if (stats->parsed()) return finish(noisent::cmd_stats(cfg, std::cout));
        if (maskgen->parsed()) return finish(noisent::cmd_maskgen(cfg, std::cout));
        if (prompts->parsed()) return finish(noisent::cmd_prompts(cfg, std::cout));
        if (synth->parsed()) return finish(noisent::cmd_synthcorpus(cfg, std::cout));
        if (validate->parsed()) return run_validate(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
