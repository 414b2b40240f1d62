#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "noisent/manifest.hpp"
#include "noisent/rng.hpp"

namespace noisent {

/// The fourteen distinct sub-corpus names; "location" serves both the animal
/// and the news category, giving fifteen category bindings in total.
inline constexpr std::array<std::string_view, 14> kStandardSubCorpora{
    "ethnic group", "gender",   "age group", "facial expression", "clothing",      "appearance", "genre",
    "artist",       "landform", "environment", "location",        "animal species", "figure",    "body movement"};

/// Sub-corpora that feed each category's templates.
const std::vector<std::pair<Category, std::vector<std::string_view>>>& category_bindings();

/// Named expression pools. A pool may be split by qualifier ("age group:0-12");
/// a slot naming the base pool then draws from the union of its qualified parts,
/// or from the part chosen by demographic targets.
class CorpusRepository {
public:
    /// Adds or extends a pool; expressions are trimmed, empty ones rejected.
    void add(const std::string& name, const std::vector<std::string>& expressions);

    bool covers(const std::string& slot) const;
    /// Expressions for a slot (plain pool, else union of qualified pools in name order).
    std::vector<std::string> expressions(const std::string& slot) const;
    /// Expressions of one qualified part, or nullptr.
    const std::vector<std::string>* part(const std::string& slot, const std::string& qualifier) const;

    std::vector<std::string> names() const;
    std::size_t expression_count() const noexcept;
    /// Standard names with no pool (plain or qualified).
    std::vector<std::string> missing_standard() const;

private:
    std::map<std::string, std::vector<std::string>> pools_;
};

/// "[name]" section headers, one expression per line, '#' comments.
CorpusRepository parse_repository(std::string_view text);
CorpusRepository load_repository(const std::filesystem::path& path);

struct TemplateToken {
    enum class Kind { Fixed, Slot };
    Kind kind = Kind::Fixed;
    std::string text;  ///< fixed text, or the sub-corpus name for a slot

    static TemplateToken fixed(std::string t) { return {Kind::Fixed, std::move(t)}; }
    static TemplateToken slot(std::string name) { return {Kind::Slot, std::move(name)}; }
};

struct Template {
    Category category = Category::Art;
    std::vector<TemplateToken> tokens;
};

/// Blocks of "category: <name>" followed by "fix: <text>" / "slot: <name>" lines.
std::vector<Template> parse_templates(std::string_view text);
std::vector<Template> load_templates(const std::filesystem::path& path);

/// Throws std::invalid_argument if the template is empty or a slot is not covered.
void check_template(const Template& t, const CorpusRepository& repo);

/// Weighted region and age targets for portrait prompts.
struct DemographicTargets {
    std::vector<std::pair<std::string, double>> regions{
        {"Eurasia", 0.475}, {"Africa", 0.067}, {"Americas", 0.376}, {"Oceania", 0.082}};
    std::vector<std::pair<std::string, double>> ages{
        {"0-12", 0.113}, {"13-18", 0.176}, {"19-60", 0.603}, {">60", 0.108}};

    /// Each weight set must be non-negative and sum to 1 within 1e-9.
    void validate() const;
};

inline constexpr std::string_view kRegionSlot = "ethnic group";
inline constexpr std::string_view kAgeSlot = "age group";

struct DemographicDraw {
    std::size_t region = 0;  ///< index into DemographicTargets::regions
    std::size_t age = 0;     ///< index into DemographicTargets::ages
};

/// Independent categorical draws: region first, then age.
DemographicDraw sample_demographics(const DemographicTargets& targets, Rng& rng);

/// Pearson chi-square of observed counts against expected probabilities.
double chi_square(std::span<const std::size_t> observed, std::span<const double> expected_probabilities);

struct FilledPrompt {
    std::string text;
    std::vector<std::string> expressions;  ///< slot draws in token order
};

/// Joins token texts with single spaces, drops spaces before , . ; : ! ?,
/// and closes the sentence with "." when the template ends on a slot.
std::string join_tokens(const std::vector<std::string>& parts, bool ends_with_slot);

/// Fills slots in token order with uniform draws from `rng`. With `targets`,
/// the region / age-group slots first draw a demographic bucket and then an
/// expression from the matching qualified pool.
FilledPrompt fill_template(const Template& t, const CorpusRepository& repo, Rng& rng,
                           const DemographicTargets* targets = nullptr);

struct BatchOptions {
    /// Relative weight per category; empty means equal weight for every
    /// category that has templates.
    std::map<Category, double> mixture;
    std::optional<DemographicTargets> targets;
    /// Expression pairs that may not co-occur in one prompt.
    std::vector<std::pair<std::string, std::string>> blocklist;
    int max_retries = 200;
};

struct GeneratedPrompt {
    Category category = Category::Art;
    std::string text;
};

struct BatchResult {
    std::vector<GeneratedPrompt> prompts;
    std::map<Category, std::size_t> requested;
    std::size_t shortfall = 0;  ///< prompts dropped after exhausting retries
};

/// Deterministic per seed. Category quotas come from largest-remainder
/// apportionment of `count`; each prompt is redrawn until unique and not
/// blocklisted, up to max_retries.
BatchResult generate_batch(const std::vector<Template>& templates, const CorpusRepository& repo, std::size_t count,
                           std::uint64_t seed, const BatchOptions& options = {});

double average_token_count(const std::vector<std::string>& prompts);

inline constexpr std::string_view kRefineInstruction = "Please improve the fluency and naturalness of this sentence.";
inline constexpr std::string_view kEnrichInstruction = "Please enrich this sentence with more content-specific details.";

/// Text rewriting backend (an LLM in production). Failures are signalled by throwing.
class RefinementClient {
public:
    virtual ~RefinementClient() = default;
    virtual std::string transform(std::string_view instruction, std::string_view text) = 0;
};

class IdentityClient final : public RefinementClient {
public:
    std::string transform(std::string_view, std::string_view text) override { return std::string(text); }
};

/// Appends a fixed suffix on enrichment; refinement is the identity.
class SuffixEnrichmentClient final : public RefinementClient {
public:
    static constexpr std::string_view kDefaultSuffix =
        " The scene is shown in fine detail with natural lighting and a coherent background.";

    explicit SuffixEnrichmentClient(std::string suffix = std::string(kDefaultSuffix)) : suffix_(std::move(suffix)) {}
    std::string transform(std::string_view instruction, std::string_view text) override;

private:
    std::string suffix_;
};

struct RefineResult {
    std::vector<std::string> prompts;  ///< same length and order as the input
    std::vector<std::size_t> flagged;  ///< indices passed through unchanged after a client failure
    std::vector<std::string> errors;   ///< one message per flagged index
};

RefineResult refine(const std::vector<std::string>& prompts, RefinementClient& client);
RefineResult enrich(const std::vector<std::string>& prompts, RefinementClient& client);

}  // namespace noisent
