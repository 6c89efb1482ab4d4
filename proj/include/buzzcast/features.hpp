#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "buzzcast/ingest.hpp"
#include "buzzcast/sentiment.hpp"

namespace buzzcast {

struct EventEngagement {
    std::int64_t total_posts = 0;
    std::int64_t total_comments = 0;
    std::int64_t total_scores = 0;
    double avg_polarity = 0.0;
    double avg_compound = 0.0;
    Sport sport = Sport::World_Series;
};

inline constexpr std::size_t kNumericFeatureCount = 5;
inline constexpr std::array<std::string_view, kNumericFeatureCount> kNumericFeatureNames = {
    "total_posts", "total_comments", "total_scores", "avg_polarity", "avg_compound"};

std::array<double, kNumericFeatureCount> numeric_features(const EventEngagement& e);

struct DatasetRow {
    std::string name;
    EventEngagement engagement;
    double avg_viewers_millions = 0.0;
};

// Rows share the fixed column order: the numeric features, then one indicator
// column per sport present, alphabetically.
struct Dataset {
    std::vector<DatasetRow> rows;

    std::size_t size() const noexcept { return rows.size(); }
    bool empty() const noexcept { return rows.empty(); }
    std::vector<std::string> feature_names() const;
    std::vector<double> column(std::size_t numeric_index) const;
    std::vector<double> targets() const;
    Dataset subset(std::span<const std::size_t> indices) const;
};

std::string one_hot_column_name(std::string_view sport);

EventEngagement aggregate_event(const EventSpec& spec, std::span<const RawPost> posts, const Analyzers& analyzers);

struct DropResult {
    Dataset dataset;
    std::size_t removed = 0;
};
DropResult drop_zero_post_events(const Dataset& dataset);

struct CorrelationMatrix {
    std::vector<std::string> names;
    std::vector<std::vector<double>> r;
    std::vector<bool> zero_variance;

    // Largest |r| over distinct pairs.
    double max_off_diagonal() const;
};

// Pearson r for every column pair. Zero-variance columns correlate as 0 with
// everything but themselves and are flagged.
CorrelationMatrix pearson_matrix(const std::vector<std::string>& names, const std::vector<std::vector<double>>& columns);
CorrelationMatrix pearson_matrix(const Dataset& dataset);

// Engagement CSV:
// name,sport,total_posts,total_comments,total_scores,avg_polarity,avg_compound,avg_viewers_millions
Dataset parse_engagement_csv(std::string_view content);
Dataset load_engagement_csv(const std::filesystem::path& path);
std::string format_engagement_csv(const Dataset& dataset);
void write_engagement_csv(const std::filesystem::path& path, const Dataset& dataset);

}  // namespace buzzcast
