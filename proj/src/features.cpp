#include "buzzcast/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "buzzcast/csv.hpp"
#include "buzzcast/error.hpp"

namespace buzzcast {

std::array<double, kNumericFeatureCount> numeric_features(const EventEngagement& e) {
    return {static_cast<double>(e.total_posts), static_cast<double>(e.total_comments),
            static_cast<double>(e.total_scores), e.avg_polarity, e.avg_compound};
}

std::string one_hot_column_name(std::string_view sport) { return "sport_" + std::string(sport); }

std::vector<std::string> Dataset::feature_names() const {
    std::vector<std::string> names(kNumericFeatureNames.begin(), kNumericFeatureNames.end());
    std::set<std::string> sports;
    for (const auto& row : rows) sports.emplace(to_string(row.engagement.sport));
    for (const auto& s : sports) names.push_back(one_hot_column_name(s));
    return names;
}

std::vector<double> Dataset::column(std::size_t numeric_index) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(numeric_features(row.engagement).at(numeric_index));
    return out;
}

std::vector<double> Dataset::targets() const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(row.avg_viewers_millions);
    return out;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.rows.reserve(indices.size());
    for (auto i : indices) out.rows.push_back(rows.at(i));
    return out;
}

EventEngagement aggregate_event(const EventSpec& spec, std::span<const RawPost> posts, const Analyzers& analyzers) {
    EventEngagement e;
    e.sport = spec.sport;
    e.total_posts = static_cast<std::int64_t>(posts.size());
    for (const auto& p : posts) {
        e.total_comments += p.num_comments;
        e.total_scores += p.score;
    }
    auto sentiment = score_posts(posts, analyzers);
    e.avg_polarity = sentiment.avg_polarity;
    e.avg_compound = sentiment.avg_compound;
    return e;
}

DropResult drop_zero_post_events(const Dataset& dataset) {
    DropResult out;
    for (const auto& row : dataset.rows) {
        if (row.engagement.total_posts == 0) ++out.removed;
        else out.dataset.rows.push_back(row);
    }
    if (out.removed > 0) spdlog::info("dropped {} event(s) with zero posts", out.removed);
    if (out.dataset.empty() && !dataset.empty()) spdlog::warn("every event had zero posts; dataset is now empty");
    return out;
}

double CorrelationMatrix::max_off_diagonal() const {
    double best = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = i + 1; j < r.size(); ++j) best = std::max(best, std::abs(r[i][j]));
    return best;
}

CorrelationMatrix pearson_matrix(const std::vector<std::string>& names, const std::vector<std::vector<double>>& columns) {
    if (names.size() != columns.size()) throw ShapeError("pearson_matrix: names and columns differ in length");
    std::size_t n = columns.empty() ? 0 : columns.front().size();
    for (const auto& c : columns) {
        if (c.size() != n) throw ShapeError("pearson_matrix: columns differ in length");
    }
    if (n < 2) throw InsufficientDataError("pearson_matrix needs at least 2 rows");

    std::size_t d = columns.size();
    std::vector<std::vector<double>> centered(d, std::vector<double>(n));
    std::vector<double> norm(d, 0.0);
    CorrelationMatrix m{names, std::vector<std::vector<double>>(d, std::vector<double>(d, 0.0)), std::vector<bool>(d)};
    for (std::size_t k = 0; k < d; ++k) {
        double mean = 0.0;
        for (double v : columns[k]) mean += v;
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            centered[k][i] = columns[k][i] - mean;
            norm[k] += centered[k][i] * centered[k][i];
        }
        norm[k] = std::sqrt(norm[k]);
        m.zero_variance[k] = !(norm[k] > 0.0);
        if (m.zero_variance[k]) spdlog::warn("column '{}' has zero variance; its correlations are reported as 0", names[k]);
    }
    for (std::size_t a = 0; a < d; ++a) {
        m.r[a][a] = 1.0;
        for (std::size_t b = a + 1; b < d; ++b) {
            double value = 0.0;
            if (!m.zero_variance[a] && !m.zero_variance[b]) {
                double dot = 0.0;
                for (std::size_t i = 0; i < n; ++i) dot += centered[a][i] * centered[b][i];
                value = std::clamp(dot / (norm[a] * norm[b]), -1.0, 1.0);
            }
            m.r[a][b] = value;
            m.r[b][a] = value;
        }
    }
    return m;
}

CorrelationMatrix pearson_matrix(const Dataset& dataset) {
    std::vector<std::string> names(kNumericFeatureNames.begin(), kNumericFeatureNames.end());
    std::vector<std::vector<double>> columns;
    for (std::size_t k = 0; k < kNumericFeatureCount; ++k) columns.push_back(dataset.column(k));
    return pearson_matrix(names, columns);
}

// ---------------------------------------------------------------------------
// Engagement CSV
// ---------------------------------------------------------------------------

namespace {
constexpr std::string_view kEngagementHeader =
    "name,sport,total_posts,total_comments,total_scores,avg_polarity,avg_compound,avg_viewers_millions";
}

Dataset parse_engagement_csv(std::string_view content) {
    static const std::vector<std::string_view> kColumns = {"name",         "sport",        "total_posts",
                                                           "total_comments", "total_scores", "avg_polarity",
                                                           "avg_compound", "avg_viewers_millions"};
    auto records = csv::parse(content);
    if (records.empty()) throw SchemaError("name");
    csv::Header header(records.front(), kColumns);
    Dataset ds;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != records.front().fields.size())
            throw RowError(rec.line, "expected " + std::to_string(records.front().fields.size()) + " fields, got " +
                                         std::to_string(rec.fields.size()));
        auto field = [&](std::string_view col) -> const std::string& { return rec.fields[header[col]]; };
        DatasetRow row;
        row.name = field("name");
        auto sport = parse_sport(field("sport"));
        if (!sport) throw RowError(rec.line, "unknown sport '" + field("sport") + "'");
        auto& e = row.engagement;
        e.sport = *sport;
        e.total_posts = csv::parse_int(field("total_posts"), rec.line, "total_posts");
        e.total_comments = csv::parse_int(field("total_comments"), rec.line, "total_comments");
        e.total_scores = csv::parse_int(field("total_scores"), rec.line, "total_scores");
        e.avg_polarity = csv::parse_double(field("avg_polarity"), rec.line, "avg_polarity");
        e.avg_compound = csv::parse_double(field("avg_compound"), rec.line, "avg_compound");
        row.avg_viewers_millions = csv::parse_double(field("avg_viewers_millions"), rec.line, "avg_viewers_millions");
        if (e.total_posts < 0 || e.total_comments < 0) throw RowError(rec.line, "counts must be non-negative");
        if (e.avg_polarity < -1 || e.avg_polarity > 1) throw RowError(rec.line, "avg_polarity outside [-1, 1]");
        if (e.avg_compound < -1 || e.avg_compound > 1) throw RowError(rec.line, "avg_compound outside [-1, 1]");
        if (row.avg_viewers_millions < 0) throw RowError(rec.line, "avg_viewers_millions must be non-negative");
        ds.rows.push_back(std::move(row));
    }
    return ds;
}

Dataset load_engagement_csv(const std::filesystem::path& path) { return parse_engagement_csv(csv::read_file(path)); }

std::string format_engagement_csv(const Dataset& dataset) {
    std::string out(kEngagementHeader);
    out += '\n';
    for (const auto& row : dataset.rows) {
        const auto& e = row.engagement;
        out += fmt::format("{},{},{},{},{},{},{},{}\n", csv::escape(row.name), to_string(e.sport),
                           e.total_posts, e.total_comments, e.total_scores, e.avg_polarity, e.avg_compound,
                           row.avg_viewers_millions);
    }
    return out;
}

void write_engagement_csv(const std::filesystem::path& path, const Dataset& dataset) {
    csv::write_file(path, format_engagement_csv(dataset));
}

}  // namespace buzzcast
