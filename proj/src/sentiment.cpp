#include "buzzcast/sentiment.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <sstream>

#include "buzzcast/csv.hpp"
#include "buzzcast/error.hpp"

namespace buzzcast {

namespace {

bool is_ascii_space(unsigned char c) { return c == ' ' || (c >= '\t' && c <= '\r'); }

// Length of a Unicode whitespace sequence starting at `pos`, 0 if none.
std::size_t whitespace_length(std::string_view s, std::size_t pos) {
    auto byte = [&](std::size_t k) -> unsigned char { return pos + k < s.size() ? static_cast<unsigned char>(s[pos + k]) : 0; };
    unsigned char b0 = byte(0);
    if (is_ascii_space(b0)) return 1;
    if (b0 == 0xC2 && (byte(1) == 0xA0 || byte(1) == 0x85)) return 2;
    if (b0 == 0xE1 && byte(1) == 0x9A && byte(2) == 0x80) return 3;
    if (b0 == 0xE2 && byte(1) == 0x80) {
        unsigned char b2 = byte(2);
        if ((b2 >= 0x80 && b2 <= 0x8A) || b2 == 0xA8 || b2 == 0xA9 || b2 == 0xAF) return 3;
    }
    if (b0 == 0xE2 && byte(1) == 0x81 && byte(2) == 0x9F) return 3;
    if (b0 == 0xE3 && byte(1) == 0x80 && byte(2) == 0x80) return 3;
    return 0;
}

std::vector<std::string_view> split_whitespace(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        if (auto len = whitespace_length(text, i)) {
            if (i > start) out.push_back(text.substr(start, i - start));
            i += len;
            start = i;
        } else {
            ++i;
        }
    }
    if (start < text.size()) out.push_back(text.substr(start));
    return out;
}

bool is_ascii_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string normalize_apostrophes(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        // U+2019 RIGHT SINGLE QUOTATION MARK
        if (i + 2 < text.size() && static_cast<unsigned char>(text[i]) == 0xE2 &&
            static_cast<unsigned char>(text[i + 1]) == 0x80 && static_cast<unsigned char>(text[i + 2]) == 0x99) {
            out.push_back('\'');
            i += 2;
        } else {
            out.push_back(text[i]);
        }
    }
    return out;
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_basic_negator(std::string_view t) { return t == "not" || t == "no" || t == "never" || ends_with(t, "n't"); }

bool is_booster(std::string_view t) {
    static constexpr std::array<std::string_view, 7> kBoosters = {
        "very", "extremely", "really", "absolutely", "incredibly", "totally", "so"};
    return std::find(kBoosters.begin(), kBoosters.end(), t) != kBoosters.end();
}

double sign_of(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

void check_token(const std::string& token, std::size_t line) {
    if (token.empty()) throw RowError(line, "empty lexicon token");
    for (char c : token) {
        if (is_ascii_space(static_cast<unsigned char>(c))) throw RowError(line, "lexicon token contains whitespace");
        if (std::isupper(static_cast<unsigned char>(c))) throw RowError(line, "lexicon token '" + token + "' is not lowercase");
    }
}

// Splits lexicon content into non-comment rows of tab-separated fields.
template <typename Fn>
void for_each_lexicon_row(std::string_view content, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= content.size()) {
        auto end = content.find('\n', start);
        if (end == std::string_view::npos) end = content.size();
        auto line = content.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') {
            if (end == content.size()) break;
            continue;
        }
        std::vector<std::string> fields;
        std::size_t f = 0;
        for (;;) {
            auto tab = line.find('\t', f);
            fields.emplace_back(line.substr(f, tab == std::string_view::npos ? std::string_view::npos : tab - f));
            if (tab == std::string_view::npos) break;
            f = tab + 1;
        }
        fn(line_no, fields);
        if (end == content.size()) break;
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Lexicons
// ---------------------------------------------------------------------------

PolarityLexicon::PolarityLexicon(std::unordered_map<std::string, PolarityEntry> entries)
    : entries_(std::move(entries)) {}

PolarityLexicon PolarityLexicon::parse(std::string_view content) {
    std::unordered_map<std::string, PolarityEntry> entries;
    for_each_lexicon_row(content, [&](std::size_t line, const std::vector<std::string>& f) {
        if (f.size() != 3) throw RowError(line, "polarity lexicon rows need token, polarity, subjectivity");
        check_token(f[0], line);
        PolarityEntry e{csv::parse_double(f[1], line, "polarity"), csv::parse_double(f[2], line, "subjectivity")};
        if (e.polarity < -1 || e.polarity > 1) throw RowError(line, "polarity outside [-1, 1]");
        if (e.subjectivity < 0 || e.subjectivity > 1) throw RowError(line, "subjectivity outside [0, 1]");
        entries[f[0]] = e;
    });
    return PolarityLexicon(std::move(entries));
}

PolarityLexicon PolarityLexicon::load(const std::filesystem::path& path) { return parse(csv::read_file(path)); }

const PolarityEntry* PolarityLexicon::find(std::string_view token) const {
    auto it = entries_.find(std::string(token));
    return it == entries_.end() ? nullptr : &it->second;
}

PolarityLexicon PolarityLexicon::negated() const {
    auto copy = entries_;
    for (auto& [_, e] : copy) e.polarity = -e.polarity;
    return PolarityLexicon(std::move(copy));
}

ValenceLexicon::ValenceLexicon(std::unordered_map<std::string, double> entries) : entries_(std::move(entries)) {}

ValenceLexicon ValenceLexicon::parse(std::string_view content) {
    std::unordered_map<std::string, double> entries;
    for_each_lexicon_row(content, [&](std::size_t line, const std::vector<std::string>& f) {
        if (f.size() < 2) throw RowError(line, "valence lexicon rows need token and valence");
        check_token(f[0], line);
        double v = csv::parse_double(f[1], line, "valence");
        if (v < -4 || v > 4) throw RowError(line, "valence outside [-4, 4]");
        entries[f[0]] = v;
    });
    return ValenceLexicon(std::move(entries));
}

ValenceLexicon ValenceLexicon::load(const std::filesystem::path& path) { return parse(csv::read_file(path)); }

const double* ValenceLexicon::find(std::string_view token) const {
    auto it = entries_.find(std::string(token));
    return it == entries_.end() ? nullptr : &it->second;
}

ValenceLexicon ValenceLexicon::negated() const {
    auto copy = entries_;
    for (auto& [_, v] : copy) v = -v;
    return ValenceLexicon(std::move(copy));
}

void RuleConfig::validate() const {
    if (!(normalization_alpha > 0)) throw ValidationError("normalization_alpha must be positive");
    if (negation_window < 1) throw ValidationError("negation_window must be at least 1");
    if (exclamation_cap < 0) throw ValidationError("exclamation_cap must be non-negative");
    for (double v : {booster_increment, caps_boost, negation_factor, exclamation_increment}) {
        if (!std::isfinite(v)) throw ValidationError("sentiment rule constants must be finite");
    }
}

// ---------------------------------------------------------------------------
// Polarity scorer
// ---------------------------------------------------------------------------

std::vector<std::string> word_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    auto normalized = normalize_apostrophes(text);
    for (auto chunk : split_whitespace(normalized)) {
        std::string current;
        auto flush = [&] {
            auto first = current.find_first_not_of('\'');
            auto last = current.find_last_not_of('\'');
            if (first != std::string::npos) tokens.push_back(ascii_lower(current.substr(first, last - first + 1)));
            current.clear();
        };
        for (char c : chunk) {
            if (c != '\'' && is_ascii_punct(c)) flush();
            else current.push_back(c);
        }
        flush();
    }
    return tokens;
}

bool is_negator(std::string_view t) {
    static constexpr std::array<std::string_view, 28> kNegators = {
        "not",    "no",      "never",   "none",    "nothing", "nowhere", "neither", "nor",    "cannot", "without",
        "dont",   "cant",    "wont",    "isnt",    "arent",   "wasnt",   "werent",  "didnt",  "doesnt", "aint",
        "havent", "hasnt",   "hadnt",   "shouldnt", "wouldnt", "couldnt", "nope",   "nah"};
    return ends_with(t, "n't") || std::find(kNegators.begin(), kNegators.end(), t) != kNegators.end();
}

Polarity polarity_score(std::string_view text, const PolarityLexicon& lexicon) {
    if (lexicon.empty()) throw ValidationError("polarity lexicon is empty");
    auto tokens = word_tokens(text);
    double polarity_sum = 0.0;
    double subjectivity_sum = 0.0;
    std::size_t matched = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto* entry = lexicon.find(tokens[i]);
        if (!entry) continue;
        double p = entry->polarity;
        for (std::size_t back = 1; back <= 2 && back <= i; ++back) {
            if (is_basic_negator(tokens[i - back])) {
                p *= -0.5;
                break;
            }
        }
        polarity_sum += p;
        subjectivity_sum += entry->subjectivity;
        ++matched;
    }
    if (matched == 0) return {};
    auto n = static_cast<double>(matched);
    return {std::clamp(polarity_sum / n, -1.0, 1.0), std::clamp(subjectivity_sum / n, 0.0, 1.0)};
}

// ---------------------------------------------------------------------------
// Rule-based compound scorer
// ---------------------------------------------------------------------------

double normalize_compound(double sum, double alpha) {
    if (std::isinf(sum)) return sign_of(sum);
    return std::clamp(sum / std::sqrt(sum * sum + alpha), -1.0, 1.0);
}

namespace {

struct RuleToken {
    std::string lower;
    bool all_caps = false;
    bool has_alpha = false;
};

std::vector<RuleToken> rule_tokens(std::string_view text) {
    std::vector<RuleToken> tokens;
    auto normalized = normalize_apostrophes(text);
    for (auto raw : split_whitespace(normalized)) {
        RuleToken t;
        bool has_lower = false;
        for (char c : raw) {
            auto uc = static_cast<unsigned char>(c);
            if (std::isalpha(uc)) {
                t.has_alpha = true;
                if (std::islower(uc)) has_lower = true;
            }
        }
        t.all_caps = t.has_alpha && !has_lower;
        std::size_t b = 0;
        std::size_t e = raw.size();
        while (b < e && is_ascii_punct(raw[b])) ++b;
        while (e > b && is_ascii_punct(raw[e - 1])) --e;
        if (b == e) continue;
        t.lower = ascii_lower(raw.substr(b, e - b));
        tokens.push_back(std::move(t));
    }
    return tokens;
}

int trailing_exclamations(std::string_view text) {
    auto end = text.size();
    while (end > 0 && is_ascii_space(static_cast<unsigned char>(text[end - 1]))) --end;
    int count = 0;
    while (end > 0 && text[end - 1] == '!') {
        ++count;
        --end;
    }
    return count;
}

}  // namespace

SentimentScore rule_based_score(std::string_view text, const ValenceLexicon& lexicon, const RuleConfig& config) {
    if (lexicon.empty()) throw ValidationError("valence lexicon is empty");
    config.validate();
    auto tokens = rule_tokens(text);

    // Emphasis by capitals only counts when the text is not shouting throughout:
    // a lone ALL-CAPS word is emphasis, several ALL-CAPS words and nothing else is not.
    std::size_t alpha_tokens = 0;
    std::size_t caps_tokens = 0;
    for (const auto& t : tokens) {
        alpha_tokens += t.has_alpha;
        caps_tokens += t.all_caps;
    }
    bool caps_emphasis = caps_tokens > 0 && (caps_tokens < alpha_tokens || alpha_tokens == 1);

    double sum = 0.0;
    double pos_mass = 0.0;
    double neg_mass = 0.0;
    double neu_mass = 0.0;
    auto window = static_cast<std::size_t>(config.negation_window);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const double* valence = lexicon.find(tokens[i].lower);
        double adjusted = 0.0;
        if (valence && *valence != 0.0) {
            double v = *valence;
            adjusted = v;
            if (tokens[i].all_caps && caps_emphasis) adjusted += sign_of(v) * config.caps_boost;
            if (i > 0 && is_booster(tokens[i - 1].lower)) adjusted += sign_of(v) * config.booster_increment;
            for (std::size_t back = 1; back <= window && back <= i; ++back) {
                if (is_negator(tokens[i - back].lower)) {
                    adjusted *= config.negation_factor;
                    break;
                }
            }
        }
        sum += adjusted;
        if (adjusted > 0) pos_mass += adjusted + 1.0;
        else if (adjusted < 0) neg_mass += -adjusted + 1.0;
        else neu_mass += 1.0;
    }

    int bangs = std::min(trailing_exclamations(text), config.exclamation_cap);
    double emphasis = config.exclamation_increment * bangs;
    if (sum > 0) sum += emphasis;
    else if (sum < 0) sum -= emphasis;

    SentimentScore score;
    score.compound = normalize_compound(sum, config.normalization_alpha);
    double total = pos_mass + neg_mass + neu_mass;
    if (total > 0) {
        score.pos = pos_mass / total;
        score.neg = neg_mass / total;
        score.neu = neu_mass / total;
    }
    return score;
}

// ---------------------------------------------------------------------------
// Post averages
// ---------------------------------------------------------------------------

std::string post_text(const RawPost& post) {
    if (post.body == "[removed]" || post.body == "[deleted]") return post.title + " ";
    return post.title + " " + post.body;
}

PostSentiment score_posts(std::span<const RawPost> posts, const Analyzers& analyzers) {
    if (posts.empty()) return {};
    double polarity = 0.0;
    double compound = 0.0;
    for (const auto& post : posts) {
        auto text = post_text(post);
        polarity += polarity_score(text, analyzers.polarity).polarity;
        compound += rule_based_score(text, analyzers.valence, analyzers.config).compound;
    }
    auto n = static_cast<double>(posts.size());
    return {polarity / n, compound / n};
}

}  // namespace buzzcast
