#include "noisent/manifest.hpp"

#include <json.hpp>

#include <array>
#include <fstream>
#include <sstream>

#include "noisent/codec.hpp"
#include "noisent/error.hpp"
#include "noisent/parallel.hpp"

namespace noisent {

namespace {

using nlohmann::json;

constexpr std::array<std::pair<Label, std::string_view>, 2> kLabels{{{Label::Real, "real"}, {Label::Generated, "generated"}}};
constexpr std::array<std::pair<Category, std::string_view>, 5> kCategories{{{Category::Art, "art"},
                                                                             {Category::Landscape, "landscape"},
                                                                             {Category::Portrait, "portrait"},
                                                                             {Category::News, "news"},
                                                                             {Category::Animal, "animal"}}};
constexpr std::array<std::pair<Method, std::string_view>, 5> kMethods{{{Method::T2I, "T2I"},
                                                                        {Method::INP, "INP"},
                                                                        {Method::REF, "REF"},
                                                                        {Method::FS, "FS"},
                                                                        {Method::None, "none"}}};

template <typename E, std::size_t N>
std::string name_of(const std::array<std::pair<E, std::string_view>, N>& table, E v) {
    for (const auto& [e, s] : table) {
        if (e == v) {
            return std::string(s);
        }
    }
    return "?";
}

template <typename E, std::size_t N>
std::optional<E> value_of(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view s) {
    for (const auto& [e, name] : table) {
        if (name == s) {
            return e;
        }
    }
    return std::nullopt;
}

}  // namespace

std::string to_string(Label v) { return name_of(kLabels, v); }
std::string to_string(Category v) { return name_of(kCategories, v); }
std::string to_string(Method v) { return name_of(kMethods, v); }
std::optional<Label> parse_label(std::string_view s) { return value_of(kLabels, s); }
std::optional<Category> parse_category(std::string_view s) { return value_of(kCategories, s); }
std::optional<Method> parse_method(std::string_view s) { return value_of(kMethods, s); }

namespace {

std::string required_string(const json& obj, const char* key, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
        throw ParseError(line, std::string("missing or non-string field '") + key + "'");
    }
    return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        return std::nullopt;
    }
    if (!it->is_string()) {
        throw ParseError(line, std::string("field '") + key + "' must be a string");
    }
    auto s = it->get<std::string>();
    if (s.empty()) {
        return std::nullopt;
    }
    return s;
}

template <typename E>
E required_enum(const json& obj, const char* key, std::size_t line, std::optional<E> (*parse)(std::string_view)) {
    const std::string text = required_string(obj, key, line);
    const auto v = parse(text);
    if (!v) {
        throw ParseError(line, std::string("unknown ") + key + " '" + text + "'");
    }
    return *v;
}

}  // namespace

std::vector<ManifestRecord> parse_manifest(std::string_view text) {
    std::vector<ManifestRecord> records;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.find_first_not_of(" \t") == std::string_view::npos) {
            continue;
        }
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!obj.is_object()) {
            throw ParseError(line_no, "record must be a JSON object");
        }
        ManifestRecord r;
        r.path = required_string(obj, "path", line_no);
        if (r.path.empty()) {
            throw ParseError(line_no, "empty path");
        }
        r.label = required_enum<Label>(obj, "label", line_no, parse_label);
        r.category = required_enum<Category>(obj, "category", line_no, parse_category);
        r.method = required_enum<Method>(obj, "method", line_no, parse_method);
        r.generator = optional_string(obj, "generator", line_no).value_or("");
        r.mask_path = optional_string(obj, "mask_path", line_no);
        r.source_path = optional_string(obj, "source_path", line_no);
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open manifest " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_manifest(buffer.str());
}

std::string to_json_line(const ManifestRecord& r) {
    json obj = json::object();
    obj["path"] = r.path;
    obj["label"] = to_string(r.label);
    obj["category"] = to_string(r.category);
    obj["method"] = to_string(r.method);
    obj["generator"] = r.generator;
    obj["mask_path"] = r.mask_path ? json(*r.mask_path) : json(nullptr);
    obj["source_path"] = r.source_path ? json(*r.source_path) : json(nullptr);
    return obj.dump();
}

void save_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records) {
    std::string text;
    for (const auto& r : records) {
        text += to_json_line(r);
        text += '\n';
    }
    write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<Diagnostic> check_records(const std::vector<ManifestRecord>& records) {
    std::vector<Diagnostic> out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.label == Label::Real && r.method != Method::None) {
            out.push_back({i, "real-with-method", "real item must have method none, got " + to_string(r.method)});
        }
        if (r.label == Label::Real && !r.generator.empty()) {
            out.push_back({i, "real-with-generator", "real item must not name a generator"});
        }
        if (r.label == Label::Generated && r.method == Method::None) {
            out.push_back({i, "generated-without-method", "generated item needs a generation method"});
        }
        if (r.method == Method::INP && !r.mask_path) {
            out.push_back({i, "missing-mask", "missing mask: INP item requires mask_path"});
        }
        if (r.method == Method::REF && !r.source_path) {
            out.push_back({i, "missing-source", "missing source: REF item requires source_path"});
        }
    }
    return out;
}

std::vector<Diagnostic> validate_manifest(const std::vector<ManifestRecord>& records, const std::filesystem::path& root,
                                          int threads) {
    std::vector<std::vector<Diagnostic>> per_record(records.size());
    parallel_for(records.size(), threads, [&](std::size_t i) {
        const auto& r = records[i];
        auto& diags = per_record[i];
        std::optional<ImageInfo> image;
        try {
            image = probe_image(root / r.path);
        } catch (const std::exception& e) {
            diags.push_back({i, "unreadable-image", e.what()});
        }
        if (r.mask_path) {
            try {
                const ImageU8 mask = load_image(root / *r.mask_path);
                if (image && (mask.width() != image->width || mask.height() != image->height)) {
                    diags.push_back({i, "mask-size", "mask " + std::to_string(mask.width()) + "x" +
                                                         std::to_string(mask.height()) + " does not match image " +
                                                         std::to_string(image->width) + "x" +
                                                         std::to_string(image->height)});
                }
                for (auto v : mask.plane(0)) {
                    if (v != 0 && v != 255) {
                        diags.push_back({i, "mask-not-binary", "mask contains values other than 0 and 255"});
                        break;
                    }
                }
            } catch (const std::exception& e) {
                diags.push_back({i, "unreadable-mask", e.what()});
            }
        }
        if (r.source_path && !std::filesystem::exists(root / *r.source_path)) {
            diags.push_back({i, "missing-source-file", "source file not found: " + *r.source_path});
        }
    });
    std::vector<Diagnostic> out = check_records(records);
    for (auto& d : per_record) {
        out.insert(out.end(), d.begin(), d.end());
    }
    std::stable_sort(out.begin(), out.end(), [](const Diagnostic& a, const Diagnostic& b) { return a.index < b.index; });
    return out;
}

}  // namespace noisent
