#include "noisent/config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "noisent/error.hpp"
#include "noisent/parallel.hpp"

namespace noisent {

namespace {

std::string trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) {
        return {};
    }
    const auto end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

template <typename T>
T parse_int(std::string_view key, std::string_view value) {
    T out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
        throw std::invalid_argument(std::string(key) + ": expected an integer, got '" + std::string(value) + "'");
    }
    return out;
}

double parse_double(std::string_view key, std::string_view value) {
    const std::string s(value);
    char* end = nullptr;
    const double out = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
        throw std::invalid_argument(std::string(key) + ": expected a number, got '" + s + "'");
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "yes") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no") {
        return false;
    }
    throw std::invalid_argument(std::string(key) + ": expected true or false, got '" + std::string(value) + "'");
}

std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find(sep, pos), text.size());
        out.push_back(trim(text.substr(pos, end - pos)));
        pos = end + 1;
    }
    return out;
}

// Shortest representation that round-trips.
std::string num(double v) {
    char buf[40];
    const auto result = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, result.ptr);
}

}  // namespace

std::string to_string(ClientMode mode) {
    switch (mode) {
        case ClientMode::None: return "none";
        case ClientMode::Identity: return "identity";
        case ClientMode::Suffix: return "suffix";
    }
    return "none";
}

ClientMode parse_client_mode(std::string_view text) {
    if (text == "none") return ClientMode::None;
    if (text == "identity") return ClientMode::Identity;
    if (text == "suffix") return ClientMode::Suffix;
    throw std::invalid_argument("unknown client mode '" + std::string(text) + "' (none, identity, suffix)");
}

RunConfig::RunConfig() : threads(default_parallelism()) {}

void RunConfig::set(std::string_view key_in, std::string_view value_in) {
    const std::string key = trim(key_in);
    const std::string value = trim(value_in);
    const auto k = std::string_view(key);
    if (k == "nlm.patch_radius") nlm.patch_radius = parse_int<int>(k, value);
    else if (k == "nlm.search_radius") nlm.search_radius = parse_int<int>(k, value);
    else if (k == "nlm.h") nlm.h = parse_double(k, value);
    else if (k == "nlm.channel_mode") {
        if (value == "per-channel") nlm.channel_mode = ChannelMode::PerChannel;
        else if (value == "joint") nlm.channel_mode = ChannelMode::Joint;
        else throw std::invalid_argument("nlm.channel_mode: expected per-channel or joint, got '" + value + "'");
    }
    else if (k == "entropy.canvas") entropy.canvas = parse_int<int>(k, value);
    else if (k == "entropy.grid") entropy.grid = parse_int<int>(k, value);
    else if (k == "entropy.bins") entropy.bins = parse_int<int>(k, value);
    else if (k == "entropy.range_mode") entropy.range_mode = parse_range_mode(value);
    else if (k == "train.learning_rate") train.learning_rate = parse_double(k, value);
    else if (k == "train.epochs") train.epochs = parse_int<int>(k, value);
    else if (k == "train.batch_size") train.batch_size = parse_int<int>(k, value);
    else if (k == "train.l2") train.l2 = parse_double(k, value);
    else if (k == "train.seed") train.seed = parse_int<std::uint64_t>(k, value);
    else if (k == "train.shuffle") train.shuffle = parse_bool(k, value);
    else if (k == "eval.threshold") threshold = parse_double(k, value);
    else if (k == "eval.qualities") {
        qualities.clear();
        if (!value.empty()) {
            for (const auto& part : split(value, ',')) {
                qualities.push_back(parse_int<int>(k, part));
            }
        }
    }
    else if (k == "seed") seed = parse_int<std::uint64_t>(k, value);
    else if (k == "threads") threads = parse_int<int>(k, value);
    else if (k == "synth.size") synth.size = parse_int<int>(k, value);
    else if (k == "synth.count") synth.count_per_class = parse_int<int>(k, value);
    else if (k == "synth.sigma_min") synth.sigma_min = parse_double(k, value);
    else if (k == "synth.sigma_max") synth.sigma_max = parse_double(k, value);
    else if (k == "mask.count") mask_count = parse_int<int>(k, value);
    else if (k == "mask.height") mask_height = parse_int<int>(k, value);
    else if (k == "mask.width") mask_width = parse_int<int>(k, value);
    else if (k == "mask.radius_min") brush.radius_min = parse_int<int>(k, value);
    else if (k == "mask.radius_max") brush.radius_max = parse_int<int>(k, value);
    else if (k == "mask.stroke_min") brush.stroke_min = parse_int<int>(k, value);
    else if (k == "mask.stroke_max") brush.stroke_max = parse_int<int>(k, value);
    else if (k == "mask.segment_min") brush.segment_min = parse_int<int>(k, value);
    else if (k == "mask.segment_max") brush.segment_max = parse_int<int>(k, value);
    else if (k == "mask.step") brush.step = parse_int<int>(k, value);
    else if (k == "mask.coverage_min") brush.coverage_min = parse_double(k, value);
    else if (k == "mask.coverage_max") brush.coverage_max = parse_double(k, value);
    else if (k == "curation.min_quality") curation.min_quality = parse_int<int>(k, value);
    else if (k == "curation.min_pixels") curation.min_pixels = parse_int<std::uint64_t>(k, value);
    else if (k == "prompts.count") prompt_count = parse_int<std::size_t>(k, value);
    else if (k == "prompts.client") client = parse_client_mode(value);
    else if (k == "prompts.demographics") demographics = parse_bool(k, value);
    else if (k == "prompts.mixture") {
        mixture.clear();
        if (!value.empty()) {
            for (const auto& part : split(value, ',')) {
                const auto colon = part.find(':');
                const auto category = parse_category(trim(std::string_view(part).substr(0, colon)));
                if (colon == std::string::npos || !category) {
                    throw std::invalid_argument("prompts.mixture: expected category:weight pairs, got '" + part + "'");
                }
                mixture[*category] = parse_double(k, trim(std::string_view(part).substr(colon + 1)));
            }
        }
    }
    else if (k == "paths.manifest") manifest = value;
    else if (k == "paths.root") root = value;
    else if (k == "paths.features") features = value;
    else if (k == "paths.model") model = value;
    else if (k == "paths.out") out = value;
    else if (k == "paths.templates") templates = value;
    else if (k == "paths.corpus") corpus = value;
    else throw std::invalid_argument("unknown configuration key '" + key + "'");
}

void RunConfig::apply_text(std::string_view text) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        ++line_no;
        const std::string line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(line_no, "expected 'key = value'");
        }
        try {
            set(std::string_view(line).substr(0, eq), std::string_view(line).substr(eq + 1));
        } catch (const std::invalid_argument& e) {
            throw ParseError(line_no, e.what());
        }
    }
}

void RunConfig::apply_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open config " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    apply_text(text.str());
}

void RunConfig::validate() const {
    nlm.validate();
    entropy.validate();
    train.validate();
    synth.validate();
    brush.validate();
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw std::invalid_argument("eval.threshold must be in [0, 1]");
    }
    for (int q : qualities) {
        if (q < 1 || q > 100) {
            throw std::invalid_argument("eval.qualities entries must be in 1..100");
        }
    }
    if (threads < 1) {
        throw std::invalid_argument("threads must be >= 1");
    }
    if (mask_count < 0 || mask_height < 1 || mask_width < 1) {
        throw std::invalid_argument("mask.count must be >= 0 and mask dimensions >= 1");
    }
    if (curation.min_quality < 1 || curation.min_quality > 100) {
        throw std::invalid_argument("curation.min_quality must be in 1..100");
    }
    for (const auto& [c, w] : mixture) {
        if (!(w >= 0.0)) {
            throw std::invalid_argument("prompts.mixture weights must be non-negative");
        }
    }
}

namespace {

std::vector<std::string> feature_lines(const RunConfig& c) {
    return {
        "nlm.patch_radius=" + std::to_string(c.nlm.patch_radius),
        "nlm.search_radius=" + std::to_string(c.nlm.search_radius),
        "nlm.h=" + num(c.nlm.h),
        std::string("nlm.channel_mode=") + (c.nlm.channel_mode == ChannelMode::Joint ? "joint" : "per-channel"),
        "entropy.canvas=" + std::to_string(c.entropy.canvas),
        "entropy.grid=" + std::to_string(c.entropy.grid),
        "entropy.bins=" + std::to_string(c.entropy.bins),
        "entropy.range_mode=" + to_string(c.entropy.range_mode),
    };
}

std::vector<std::string> train_lines(const RunConfig& c) {
    return {
        "train.learning_rate=" + num(c.train.learning_rate),
        "train.epochs=" + std::to_string(c.train.epochs),
        "train.batch_size=" + std::to_string(c.train.batch_size),
        "train.l2=" + num(c.train.l2),
        "train.seed=" + std::to_string(c.train.seed),
        std::string("train.shuffle=") + (c.train.shuffle ? "true" : "false"),
    };
}

std::string joined(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) {
        out += l;
        out += '\n';
    }
    return out;
}

}  // namespace

std::vector<std::string> RunConfig::echo() const {
    std::vector<std::string> lines = feature_lines(*this);
    const auto t = train_lines(*this);
    lines.insert(lines.end(), t.begin(), t.end());
    lines.push_back("eval.threshold=" + num(threshold));
    std::string qs;
    for (std::size_t i = 0; i < qualities.size(); ++i) {
        qs += (i ? "," : "") + std::to_string(qualities[i]);
    }
    lines.push_back("eval.qualities=" + qs);
    lines.push_back("seed=" + std::to_string(seed));
    lines.push_back("synth.size=" + std::to_string(synth.size));
    lines.push_back("synth.count=" + std::to_string(synth.count_per_class));
    lines.push_back("synth.sigma_min=" + num(synth.sigma_min));
    lines.push_back("synth.sigma_max=" + num(synth.sigma_max));
    lines.push_back("mask.count=" + std::to_string(mask_count));
    lines.push_back("mask.height=" + std::to_string(mask_height));
    lines.push_back("mask.width=" + std::to_string(mask_width));
    lines.push_back("mask.radius_min=" + std::to_string(brush.radius_min));
    lines.push_back("mask.radius_max=" + std::to_string(brush.radius_max));
    lines.push_back("mask.stroke_min=" + std::to_string(brush.stroke_min));
    lines.push_back("mask.stroke_max=" + std::to_string(brush.stroke_max));
    lines.push_back("mask.segment_min=" + std::to_string(brush.segment_min));
    lines.push_back("mask.segment_max=" + std::to_string(brush.segment_max));
    lines.push_back("mask.step=" + std::to_string(brush.step));
    lines.push_back("mask.coverage_min=" + num(brush.coverage_min));
    lines.push_back("mask.coverage_max=" + num(brush.coverage_max));
    lines.push_back("curation.min_quality=" + std::to_string(curation.min_quality));
    lines.push_back("curation.min_pixels=" + std::to_string(curation.min_pixels));
    lines.push_back("prompts.count=" + std::to_string(prompt_count));
    lines.push_back("prompts.client=" + to_string(client));
    lines.push_back(std::string("prompts.demographics=") + (demographics ? "true" : "false"));
    std::string mix;
    for (const auto& [c, w] : mixture) {
        mix += (mix.empty() ? "" : ",") + to_string(c) + ":" + num(w);
    }
    lines.push_back("prompts.mixture=" + mix);
    return lines;
}

std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string RunConfig::feature_fingerprint() const { return fnv1a_hex(joined(feature_lines(*this))); }

std::string RunConfig::model_fingerprint() const {
    return feature_fingerprint() + ":" + fnv1a_hex(joined(train_lines(*this)));
}

std::filesystem::path RunConfig::image_root() const {
    if (!root.empty()) {
        return root;
    }
    return manifest.has_parent_path() ? manifest.parent_path() : std::filesystem::path(".");
}

}  // namespace noisent
