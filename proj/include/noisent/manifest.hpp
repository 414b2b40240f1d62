#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace noisent {

enum class Label { Real = 0, Generated = 1 };
enum class Category { Art, Landscape, Portrait, News, Animal };
enum class Method { T2I, INP, REF, FS, None };

std::string to_string(Label v);
std::string to_string(Category v);
std::string to_string(Method v);
std::optional<Label> parse_label(std::string_view s);
std::optional<Category> parse_category(std::string_view s);
std::optional<Method> parse_method(std::string_view s);

/// One dataset item. Serialized as one JSON object per line with the keys
/// path, label, category, method, generator, mask_path, source_path.
struct ManifestRecord {
    std::string path;  ///< relative to the manifest root
    Label label = Label::Real;
    Category category = Category::Art;
    Method method = Method::None;
    std::string generator;
    std::optional<std::string> mask_path;    ///< required iff method == INP
    std::optional<std::string> source_path;  ///< required iff method == REF

    int label_value() const noexcept { return label == Label::Generated ? 1 : 0; }

    friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

struct Diagnostic {
    std::size_t index = 0;  ///< 0-based record index
    std::string code;       ///< short machine-readable tag, e.g. "missing-mask"
    std::string message;
};

/// Parses line-delimited JSON; blank lines are skipped. Unknown keys are
/// ignored. Throws ParseError (with line number) on malformed JSON, missing
/// path/label/category/method, or unknown enum values. Record-level
/// invariants are not checked here; see check_records.
std::vector<ManifestRecord> parse_manifest(std::string_view text);
std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path);

std::string to_json_line(const ManifestRecord& record);
void save_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records);

/// Record invariants: real items carry method none and no generator; INP
/// needs mask_path; REF needs source_path.
std::vector<Diagnostic> check_records(const std::vector<ManifestRecord>& records);

/// check_records plus: referenced files exist under `root`, images decode
/// headers, masks are readable and match their image's dimensions.
std::vector<Diagnostic> validate_manifest(const std::vector<ManifestRecord>& records, const std::filesystem::path& root,
                                          int threads = 1);

}  // namespace noisent
