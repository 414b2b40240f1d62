#include "noisent/promptgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "noisent/error.hpp"

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

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        ++line_no;
        fn(line_no, trim(text.substr(pos, end - pos)));
        pos = end + 1;
    }
}

}  // namespace

const std::vector<std::pair<Category, std::vector<std::string_view>>>& category_bindings() {
    static const std::vector<std::pair<Category, std::vector<std::string_view>>> bindings{
        {Category::Portrait,
         {"ethnic group", "gender", "age group", "facial expression", "clothing", "appearance"}},
        {Category::Art, {"genre", "artist"}},
        {Category::Landscape, {"landform", "environment"}},
        {Category::Animal, {"location", "animal species"}},
        {Category::News, {"location", "figure", "body movement"}},
    };
    return bindings;
}

// ------------------------------------------------------------ repository

void CorpusRepository::add(const std::string& name, const std::vector<std::string>& expressions) {
    const std::string key = trim(name);
    if (key.empty()) {
        throw std::invalid_argument("sub-corpus name must be non-empty");
    }
    auto& pool = pools_[key];
    for (const auto& e : expressions) {
        std::string t = trim(e);
        if (t.empty()) {
            throw std::invalid_argument("sub-corpus '" + key + "' contains an empty expression");
        }
        pool.push_back(std::move(t));
    }
    if (pool.empty()) {
        pools_.erase(key);
        throw std::invalid_argument("sub-corpus '" + key + "' is empty");
    }
}

bool CorpusRepository::covers(const std::string& slot) const {
    if (pools_.contains(slot)) {
        return true;
    }
    const auto it = pools_.lower_bound(slot + ":");
    return it != pools_.end() && it->first.starts_with(slot + ":");
}

std::vector<std::string> CorpusRepository::expressions(const std::string& slot) const {
    if (const auto it = pools_.find(slot); it != pools_.end()) {
        return it->second;
    }
    std::vector<std::string> merged;
    const std::string prefix = slot + ":";
    for (auto it = pools_.lower_bound(prefix); it != pools_.end() && it->first.starts_with(prefix); ++it) {
        merged.insert(merged.end(), it->second.begin(), it->second.end());
    }
    if (merged.empty()) {
        throw std::invalid_argument("missing sub-corpus '" + slot + "'");
    }
    return merged;
}

const std::vector<std::string>* CorpusRepository::part(const std::string& slot, const std::string& qualifier) const {
    const auto it = pools_.find(slot + ":" + qualifier);
    return it == pools_.end() ? nullptr : &it->second;
}

std::vector<std::string> CorpusRepository::names() const {
    std::vector<std::string> out;
    for (const auto& [name, pool] : pools_) {
        out.push_back(name);
    }
    return out;
}

std::size_t CorpusRepository::expression_count() const noexcept {
    std::size_t n = 0;
    for (const auto& [name, pool] : pools_) {
        n += pool.size();
    }
    return n;
}

std::vector<std::string> CorpusRepository::missing_standard() const {
    std::vector<std::string> out;
    for (auto name : kStandardSubCorpora) {
        if (!covers(std::string(name))) {
            out.emplace_back(name);
        }
    }
    return out;
}

CorpusRepository parse_repository(std::string_view text) {
    CorpusRepository repo;
    std::string section;
    std::size_t section_line = 0;
    std::vector<std::string> pending;
    auto flush = [&]() {
        if (section.empty()) {
            return;
        }
        if (pending.empty()) {
            throw ParseError(section_line, "sub-corpus '" + section + "' has no expressions");
        }
        repo.add(section, pending);
        pending.clear();
    };
    for_each_line(text, [&](std::size_t line_no, const std::string& line) {
        if (line.empty() || line.front() == '#') {
            return;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ParseError(line_no, "unterminated section header");
            }
            flush();
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            section_line = line_no;
            if (section.empty()) {
                throw ParseError(line_no, "empty section name");
            }
            return;
        }
        if (section.empty()) {
            throw ParseError(line_no, "expression outside of any [section]");
        }
        pending.push_back(line);
    });
    flush();
    return repo;
}

CorpusRepository load_repository(const std::filesystem::path& path) { return parse_repository(read_text(path)); }

// ------------------------------------------------------------- templates

std::vector<Template> parse_templates(std::string_view text) {
    std::vector<Template> out;
    std::size_t open_line = 0;
    auto close = [&]() {
        if (!out.empty() && out.back().tokens.empty()) {
            throw ParseError(open_line, "template has no tokens");
        }
    };
    for_each_line(text, [&](std::size_t line_no, const std::string& line) {
        if (line.empty() || line.front() == '#') {
            return;
        }
        const auto colon = line.find(':');
        if (colon == std::string::npos) {
            throw ParseError(line_no, "expected 'category:', 'fix:' or 'slot:'");
        }
        const std::string key = trim(std::string_view(line).substr(0, colon));
        const std::string value = trim(std::string_view(line).substr(colon + 1));
        if (key == "category") {
            close();
            const auto category = parse_category(value);
            if (!category) {
                throw ParseError(line_no, "unknown category '" + value + "'");
            }
            out.push_back({*category, {}});
            open_line = line_no;
            return;
        }
        if (out.empty()) {
            throw ParseError(line_no, "token before the first 'category:' header");
        }
        if (value.empty()) {
            throw ParseError(line_no, "empty token");
        }
        if (key == "fix") {
            out.back().tokens.push_back(TemplateToken::fixed(value));
        } else if (key == "slot") {
            out.back().tokens.push_back(TemplateToken::slot(value));
        } else {
            throw ParseError(line_no, "unknown token kind '" + key + "'");
        }
    });
    close();
    return out;
}

std::vector<Template> load_templates(const std::filesystem::path& path) { return parse_templates(read_text(path)); }

void check_template(const Template& t, const CorpusRepository& repo) {
    if (t.tokens.empty()) {
        throw std::invalid_argument("template has no tokens");
    }
    for (const auto& token : t.tokens) {
        if (token.kind == TemplateToken::Kind::Slot && !repo.covers(token.text)) {
            throw std::invalid_argument("missing sub-corpus '" + token.text + "' for " + to_string(t.category) +
                                        " template");
        }
    }
}

// ----------------------------------------------------------- demographics

namespace {

void check_weights(const std::vector<std::pair<std::string, double>>& weights, const char* what) {
    if (weights.empty()) {
        throw std::invalid_argument(std::string(what) + " weights are empty");
    }
    double sum = 0.0;
    for (const auto& [name, w] : weights) {
        if (!(w >= 0.0)) {
            throw std::invalid_argument(std::string(what) + " weight for '" + name + "' is negative");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument(std::string(what) + " weights sum to " + std::to_string(sum) + ", not 1");
    }
}

std::size_t draw_weighted(const std::vector<std::pair<std::string, double>>& weights, Rng& rng) {
    std::vector<double> w;
    w.reserve(weights.size());
    for (const auto& entry : weights) {
        w.push_back(entry.second);
    }
    return rng.categorical(w);
}

}  // namespace

void DemographicTargets::validate() const {
    check_weights(regions, "region");
    check_weights(ages, "age");
}

DemographicDraw sample_demographics(const DemographicTargets& targets, Rng& rng) {
    DemographicDraw draw;
    draw.region = draw_weighted(targets.regions, rng);
    draw.age = draw_weighted(targets.ages, rng);
    return draw;
}

double chi_square(std::span<const std::size_t> observed, std::span<const double> expected_probabilities) {
    if (observed.size() != expected_probabilities.size()) {
        throw std::invalid_argument("chi_square: length mismatch");
    }
    double total = 0.0;
    for (auto o : observed) {
        total += static_cast<double>(o);
    }
    double stat = 0.0;
    for (std::size_t k = 0; k < observed.size(); ++k) {
        const double expected = total * expected_probabilities[k];
        if (expected > 0.0) {
            const double d = static_cast<double>(observed[k]) - expected;
            stat += d * d / expected;
        }
    }
    return stat;
}

// ---------------------------------------------------------------- filling

std::string join_tokens(const std::vector<std::string>& parts, bool ends_with_slot) {
    std::string joined;
    for (const auto& p : parts) {
        const std::string t = trim(p);
        if (t.empty()) {
            continue;
        }
        if (!joined.empty()) {
            joined += ' ';
        }
        joined += t;
    }
    std::string out;
    out.reserve(joined.size() + 1);
    for (char ch : joined) {
        const bool punct = ch == '.' || ch == ',' || ch == ';' || ch == ':' || ch == '!' || ch == '?';
        if ((ch == ' ' || punct) && !out.empty() && out.back() == ' ') {
            out.pop_back();
        }
        out += ch;
    }
    if (ends_with_slot && !out.empty() && out.back() != '.' && out.back() != '!' && out.back() != '?') {
        out += '.';
    }
    return out;
}

FilledPrompt fill_template(const Template& t, const CorpusRepository& repo, Rng& rng, const DemographicTargets* targets) {
    check_template(t, repo);
    FilledPrompt result;
    std::vector<std::string> parts;
    parts.reserve(t.tokens.size());
    for (const auto& token : t.tokens) {
        if (token.kind == TemplateToken::Kind::Fixed) {
            parts.push_back(token.text);
            continue;
        }
        std::vector<std::string> pool;
        if (targets != nullptr && (token.text == kRegionSlot || token.text == kAgeSlot)) {
            const auto& weights = token.text == kRegionSlot ? targets->regions : targets->ages;
            const auto& bucket = weights[draw_weighted(weights, rng)].first;
            if (const auto* qualified = repo.part(token.text, bucket)) {
                pool = *qualified;
            }
        }
        if (pool.empty()) {
            pool = repo.expressions(token.text);
        }
        const auto pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1));
        result.expressions.push_back(pool[pick]);
        parts.push_back(pool[pick]);
    }
    const bool ends_with_slot = t.tokens.back().kind == TemplateToken::Kind::Slot;
    result.text = join_tokens(parts, ends_with_slot);
    return result;
}

namespace {

constexpr std::array<Category, 5> kCategoryOrder{Category::Portrait, Category::Art, Category::Landscape,
                                                  Category::Animal, Category::News};

std::map<Category, std::size_t> apportion(const std::map<Category, double>& weights, std::size_t count) {
    double total = 0.0;
    for (const auto& [c, w] : weights) {
        if (!(w >= 0.0)) {
            throw std::invalid_argument("mixture weights must be non-negative");
        }
        total += w;
    }
    std::map<Category, std::size_t> quotas;
    if (total <= 0.0) {
        throw std::invalid_argument("mixture weights sum to zero");
    }
    std::vector<std::pair<double, int>> remainders;
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < kCategoryOrder.size(); ++k) {
        const auto it = weights.find(kCategoryOrder[k]);
        if (it == weights.end()) {
            continue;
        }
        const double exact = static_cast<double>(count) * it->second / total;
        const auto base = static_cast<std::size_t>(std::floor(exact));
        quotas[kCategoryOrder[k]] = base;
        assigned += base;
        remainders.emplace_back(exact - static_cast<double>(base), static_cast<int>(k));
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < count && i < remainders.size(); ++i, ++assigned) {
        ++quotas[kCategoryOrder[remainders[i].second]];
    }
    return quotas;
}

bool blocked(const std::vector<std::string>& drawn, const std::vector<std::pair<std::string, std::string>>& blocklist) {
    for (const auto& [a, b] : blocklist) {
        const bool has_a = std::find(drawn.begin(), drawn.end(), a) != drawn.end();
        const bool has_b = std::find(drawn.begin(), drawn.end(), b) != drawn.end();
        if (has_a && has_b) {
            return true;
        }
    }
    return false;
}

}  // namespace

BatchResult generate_batch(const std::vector<Template>& templates, const CorpusRepository& repo, std::size_t count,
                           std::uint64_t seed, const BatchOptions& options) {
    if (options.targets) {
        options.targets->validate();
    }
    std::map<Category, std::vector<const Template*>> by_category;
    for (const auto& t : templates) {
        check_template(t, repo);
        by_category[t.category].push_back(&t);
    }
    BatchResult result;
    if (count == 0) {
        return result;
    }
    if (by_category.empty()) {
        throw std::invalid_argument("generate_batch: no templates");
    }
    std::map<Category, double> mixture = options.mixture;
    if (mixture.empty()) {
        for (const auto& [c, list] : by_category) {
            mixture[c] = 1.0;
        }
    }
    for (const auto& [c, w] : mixture) {
        if (w > 0.0 && !by_category.contains(c)) {
            throw std::invalid_argument("generate_batch: mixture requests category '" + to_string(c) +
                                        "' with no templates");
        }
    }
    result.requested = apportion(mixture, count);

    Rng rng(seed);
    const DemographicTargets* targets = options.targets ? &*options.targets : nullptr;
    std::set<std::string> seen;
    for (Category category : kCategoryOrder) {
        const auto quota_it = result.requested.find(category);
        if (quota_it == result.requested.end()) {
            continue;
        }
        const auto& pool = by_category[category];
        for (std::size_t n = 0; n < quota_it->second; ++n) {
            bool placed = false;
            for (int attempt = 0; attempt <= options.max_retries && !placed; ++attempt) {
                const auto pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1));
                FilledPrompt filled = fill_template(*pool[pick], repo, rng, category == Category::Portrait ? targets : nullptr);
                if (blocked(filled.expressions, options.blocklist) || seen.contains(filled.text)) {
                    continue;
                }
                seen.insert(filled.text);
                result.prompts.push_back({category, std::move(filled.text)});
                placed = true;
            }
            if (!placed) {
                ++result.shortfall;
            }
        }
    }
    return result;
}

double average_token_count(const std::vector<std::string>& prompts) {
    if (prompts.empty()) {
        return 0.0;
    }
    std::size_t tokens = 0;
    for (const auto& p : prompts) {
        std::istringstream words(p);
        std::string w;
        while (words >> w) {
            ++tokens;
        }
    }
    return static_cast<double>(tokens) / static_cast<double>(prompts.size());
}

// ------------------------------------------------------------- refinement

std::string SuffixEnrichmentClient::transform(std::string_view instruction, std::string_view text) {
    if (instruction == kEnrichInstruction) {
        return std::string(text) + suffix_;
    }
    return std::string(text);
}

namespace {

RefineResult apply_client(const std::vector<std::string>& prompts, RefinementClient& client, std::string_view instruction) {
    RefineResult result;
    result.prompts.reserve(prompts.size());
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        try {
            result.prompts.push_back(client.transform(instruction, prompts[i]));
        } catch (const std::exception& e) {
            result.prompts.push_back(prompts[i]);
            result.flagged.push_back(i);
            result.errors.emplace_back(e.what());
        }
    }
    return result;
}

}  // namespace

RefineResult refine(const std::vector<std::string>& prompts, RefinementClient& client) {
    return apply_client(prompts, client, kRefineInstruction);
}

RefineResult enrich(const std::vector<std::string>& prompts, RefinementClient& client) {
    return apply_client(prompts, client, kEnrichInstruction);
}

}  // namespace noisent
