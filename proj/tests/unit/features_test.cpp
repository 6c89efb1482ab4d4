#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "buzzcast/error.hpp"
#include "buzzcast/features.hpp"
#include "support.hpp"

using namespace buzzcast;

namespace {

const PolarityLexicon& polarity() {
    static const PolarityLexicon lex({{"great", {0.8, 0.75}}});
    return lex;
}
const ValenceLexicon& valence() {
    static const ValenceLexicon lex({{"good", 1.9}});
    return lex;
}

DatasetRow row(std::string name, Sport sport, std::int64_t posts, double viewers, double a = 0, double b = 0) {
    DatasetRow r;
    r.name = std::move(name);
    r.engagement.sport = sport;
    r.engagement.total_posts = posts;
    r.engagement.total_comments = posts * 3;
    r.engagement.total_scores = posts * 2 - 5;
    r.engagement.avg_polarity = a;
    r.engagement.avg_compound = b;
    r.avg_viewers_millions = viewers;
    return r;
}

// Two-pass textbook Pearson r.
double oracle_r(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST(Aggregate, TotalsAreSums) {
    EventSpec spec;
    spec.sport = Sport::NBA_Finals;
    RawPost a, b;
    a.score = 3;
    a.num_comments = 2;
    a.title = "good";
    b.score = -1;
    b.num_comments = 5;
    b.title = "great";
    std::vector<RawPost> posts{a, b};
    Analyzers an{polarity(), valence(), {}};
    auto e = aggregate_event(spec, posts, an);
    EXPECT_EQ(e.total_posts, 2);
    EXPECT_EQ(e.total_comments, 7);
    EXPECT_EQ(e.total_scores, 2);
    EXPECT_EQ(e.sport, Sport::NBA_Finals);
    EXPECT_NEAR(e.avg_polarity, 0.4, 1e-15);
    EXPECT_NEAR(e.avg_compound, 1.9 / std::sqrt(1.9 * 1.9 + 15) / 2, 1e-12);
}

TEST(Aggregate, EmptyPostListIsAllZero) {
    EventSpec spec;
    Analyzers an{polarity(), valence(), {}};
    auto e = aggregate_event(spec, {}, an);
    EXPECT_EQ(e.total_posts, 0);
    EXPECT_EQ(e.total_comments, 0);
    EXPECT_EQ(e.total_scores, 0);
    EXPECT_EQ(e.avg_polarity, 0.0);
    EXPECT_EQ(e.avg_compound, 0.0);
}

TEST(Aggregate, RandomPostListsMatchBruteForce) {
    std::mt19937_64 gen(1);
    EventSpec spec;
    Analyzers an{polarity(), valence(), {}};
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<RawPost> posts(gen() % 50);
        std::int64_t comments = 0, scores = 0;
        for (auto& p : posts) {
            p.num_comments = static_cast<std::int64_t>(gen() % 1000);
            p.score = static_cast<std::int64_t>(gen() % 2000) - 1000;
            comments += p.num_comments;
            scores += p.score;
        }
        auto e = aggregate_event(spec, posts, an);
        ASSERT_EQ(e.total_posts, static_cast<std::int64_t>(posts.size()));
        ASSERT_EQ(e.total_comments, comments);
        ASSERT_EQ(e.total_scores, scores);
    }
}

TEST(DropZeroPosts, RemovesOnlyEmptyEvents) {
    Dataset ds;
    for (int i = 0; i < 5; ++i) ds.rows.push_back(row("e" + std::to_string(i), Sport::MLS_Cup, i == 2 ? 0 : 10 + i, 1));
    auto r = drop_zero_post_events(ds);
    EXPECT_EQ(r.removed, 1u);
    ASSERT_EQ(r.dataset.size(), 4u);
    EXPECT_EQ(r.dataset.rows[2].name, "e3");

    auto unchanged = drop_zero_post_events(r.dataset);
    EXPECT_EQ(unchanged.removed, 0u);
    EXPECT_EQ(unchanged.dataset.size(), 4u);

    Dataset zeros;
    zeros.rows.push_back(row("z", Sport::MLS_Cup, 0, 1));
    auto all = drop_zero_post_events(zeros);
    EXPECT_TRUE(all.dataset.empty());
    EXPECT_EQ(all.removed, 1u);
}

TEST(DatasetLayout, FeatureOrderFixed) {
    Dataset ds;
    ds.rows.push_back(row("a", Sport::World_Series, 1, 1));
    ds.rows.push_back(row("b", Sport::MLS_Cup, 1, 1));
    EXPECT_EQ(ds.feature_names(),
              (std::vector<std::string>{"total_posts", "total_comments", "total_scores", "avg_polarity", "avg_compound",
                                        "sport_MLS_Cup", "sport_World_Series"}));
    EXPECT_EQ(ds.targets(), (std::vector<double>{1, 1}));
    std::vector<std::size_t> pick{1};
    EXPECT_EQ(ds.subset(pick).rows[0].name, "b");
}

TEST(Pearson, SelfAndNegation) {
    std::vector<double> x{1, 2, 4, 7, 11};
    std::vector<double> neg;
    for (double v : x) neg.push_back(-v);
    auto m = pearson_matrix({"x", "neg"}, {x, neg});
    EXPECT_EQ(m.r[0][0], 1.0);
    EXPECT_NEAR(m.r[0][1], -1.0, 1e-12);
    EXPECT_NEAR(m.max_off_diagonal(), 1.0, 1e-12);
}

TEST(Pearson, ZeroVarianceFlaggedAsZero) {
    auto m = pearson_matrix({"x", "c"}, {{1, 2, 3}, {5, 5, 5}});
    EXPECT_TRUE(m.zero_variance[1]);
    EXPECT_FALSE(m.zero_variance[0]);
    EXPECT_EQ(m.r[0][1], 0.0);
    EXPECT_EQ(m.r[1][1], 1.0);
}

TEST(Pearson, NeedsTwoRows) {
    EXPECT_THROW(pearson_matrix({"x"}, {{1.0}}), InsufficientDataError);
    Dataset ds;
    ds.rows.push_back(row("a", Sport::MLS_Cup, 1, 1));
    EXPECT_THROW(pearson_matrix(ds), InsufficientDataError);
}

TEST(Pearson, RandomMatricesSymmetricAndMatchOracle) {
    std::mt19937_64 gen(21);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t cols = 2 + gen() % 5, rows = 3 + gen() % 30;
        std::vector<std::vector<double>> data(cols);
        std::vector<std::string> names;
        for (std::size_t c = 0; c < cols; ++c) {
            names.push_back("c" + std::to_string(c));
            for (std::size_t r = 0; r < rows; ++r) data[c].push_back(normal(gen) + (c ? data[0][r] * 0.5 : 0));
        }
        auto m = pearson_matrix(names, data);
        for (std::size_t i = 0; i < cols; ++i) {
            ASSERT_EQ(m.r[i][i], 1.0);
            for (std::size_t j = 0; j < cols; ++j) {
                ASSERT_EQ(m.r[i][j], m.r[j][i]);
                if (i != j) ASSERT_NEAR(m.r[i][j], oracle_r(data[i], data[j]), 1e-12);
            }
        }
        // Positive affine transform of one column leaves r unchanged.
        auto shifted = data;
        for (auto& v : shifted[0]) v = 3.5 * v + 1000.0;
        auto m2 = pearson_matrix(names, shifted);
        for (std::size_t j = 0; j < cols; ++j) ASSERT_NEAR(m2.r[0][j], m.r[0][j], 1e-12);
    }
}

TEST(EngagementCsv, RoundTripsExactly) {
    Dataset ds;
    ds.rows.push_back(row("SB XLVI", Sport::Super_Bowl, 98, 111.35, 0.27, 0.65));
    ds.rows.push_back(row("Name, with comma", Sport::MLS_Cup, 7, 1.03, -0.1 / 3, 1.0 / 7));
    auto text = format_engagement_csv(ds);
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "name,sport,total_posts,total_comments,total_scores,avg_polarity,avg_compound,avg_viewers_millions");
    auto back = parse_engagement_csv(text);
    ASSERT_EQ(back.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(back.rows[i].name, ds.rows[i].name);
        EXPECT_EQ(back.rows[i].engagement.avg_polarity, ds.rows[i].engagement.avg_polarity);
        EXPECT_EQ(back.rows[i].engagement.avg_compound, ds.rows[i].engagement.avg_compound);
        EXPECT_EQ(back.rows[i].engagement.total_scores, ds.rows[i].engagement.total_scores);
        EXPECT_EQ(back.rows[i].avg_viewers_millions, ds.rows[i].avg_viewers_millions);
    }
    EXPECT_EQ(format_engagement_csv(back), text);
}

TEST(EngagementCsv, Errors) {
    const std::string header =
        "name,sport,total_posts,total_comments,total_scores,avg_polarity,avg_compound,avg_viewers_millions\n";
    EXPECT_THROW(parse_engagement_csv("name,sport\n"), SchemaError);
    EXPECT_THROW(parse_engagement_csv(header + "a,Curling,1,1,1,0,0,1\n"), RowError);
    EXPECT_THROW(parse_engagement_csv(header + "a,MLS_Cup,x,1,1,0,0,1\n"), RowError);
    EXPECT_THROW(parse_engagement_csv(header + "a,MLS_Cup,-1,1,1,0,0,1\n"), RowError);
    EXPECT_THROW(parse_engagement_csv(header + "a,MLS_Cup,1,1,1,2,0,1\n"), RowError);
    EXPECT_TRUE(parse_engagement_csv(header).empty());
}
