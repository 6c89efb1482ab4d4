#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "buzzcast/ingest.hpp"

namespace buzzcast {

struct PolarityEntry {
    double polarity = 0.0;      // [-1, 1]
    double subjectivity = 0.0;  // [0, 1]
};

// Pattern-style lexicon: token -> (polarity, subjectivity).
// File format: token<TAB>polarity<TAB>subjectivity, '#' comments allowed.
class PolarityLexicon {
public:
    PolarityLexicon() = default;
    explicit PolarityLexicon(std::unordered_map<std::string, PolarityEntry> entries);
    static PolarityLexicon load(const std::filesystem::path& path);
    static PolarityLexicon parse(std::string_view content);

    const PolarityEntry* find(std::string_view token) const;
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    // Same tokens with every polarity negated.
    PolarityLexicon negated() const;

private:
    std::unordered_map<std::string, PolarityEntry> entries_;
};

// Social-media lexicon: token -> valence in [-4, 4].
// File format: token<TAB>valence, '#' comments allowed.
class ValenceLexicon {
public:
    ValenceLexicon() = default;
    explicit ValenceLexicon(std::unordered_map<std::string, double> entries);
    static ValenceLexicon load(const std::filesystem::path& path);
    static ValenceLexicon parse(std::string_view content);

    const double* find(std::string_view token) const;
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    ValenceLexicon negated() const;

private:
    std::unordered_map<std::string, double> entries_;
};

struct RuleConfig {
    double booster_increment = 0.293;
    double caps_boost = 0.733;
    int negation_window = 3;
    double negation_factor = -0.74;
    double exclamation_increment = 0.292;
    int exclamation_cap = 4;
    double normalization_alpha = 15.0;

    void validate() const;
};

struct Polarity {
    double polarity = 0.0;
    double subjectivity = 0.0;
};

struct SentimentScore {
    double polarity = 0.0;
    double subjectivity = 0.0;
    double compound = 0.0;
    double pos = 0.0;
    double neu = 0.0;
    double neg = 0.0;
};

// Lowercased word tokens; whitespace and punctuation (apostrophes inside a
// word excepted) separate tokens.
std::vector<std::string> word_tokens(std::string_view text);

bool is_negator(std::string_view lower_token);

// Mean lexicon polarity and subjectivity over matched tokens. A negator within
// the two preceding tokens multiplies a match's polarity by -0.5.
Polarity polarity_score(std::string_view text, const PolarityLexicon& lexicon);

// s / sqrt(s^2 + alpha), clamped to [-1, 1].
double normalize_compound(double sum, double alpha);

SentimentScore rule_based_score(std::string_view text, const ValenceLexicon& lexicon, const RuleConfig& config = {});

struct Analyzers {
    const PolarityLexicon& polarity;
    const ValenceLexicon& valence;
    RuleConfig config;
};

// Title and body joined by one space; a "[removed]" or "[deleted]" body counts as empty.
std::string post_text(const RawPost& post);

struct PostSentiment {
    double avg_polarity = 0.0;
    double avg_compound = 0.0;
};

PostSentiment score_posts(std::span<const RawPost> posts, const Analyzers& analyzers);

}  // namespace buzzcast
