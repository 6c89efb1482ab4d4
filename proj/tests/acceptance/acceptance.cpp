// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "buzzcast/error.hpp"
#include "buzzcast/explain.hpp"
#include "buzzcast/features.hpp"
#include "buzzcast/ingest.hpp"
#include "buzzcast/model.hpp"
#include "buzzcast/pipeline.hpp"
#include "buzzcast/preprocess.hpp"
#include "buzzcast/report.hpp"
#include "buzzcast/sentiment.hpp"
#include "support.hpp"

using namespace buzzcast;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            notes.push_back("failed: " + what);
        }
    }
    void note(const std::string& what) { notes.push_back(what); }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// Direct scan of the archive for one event's window.
std::vector<RawPost> brute_force(const std::vector<RawPost>& archive, const EventSpec& spec, int window_hours) {
    std::int64_t after = spec.start_time - window_hours * 3600LL;
    std::vector<std::string> terms{lower(spec.event_title)};
    for (const auto& t : spec.teams) terms.push_back(lower(t));
    std::vector<RawPost> out;
    for (const auto& p : archive) {
        if (p.created_utc < after || p.created_utc >= spec.start_time) continue;
        if (lower(p.subreddit) != lower(spec.subreddit)) continue;
        auto title = lower(p.title), body = lower(p.body);
        bool hit = false;
        for (const auto& t : terms) hit |= title.find(t) != std::string::npos || body.find(t) != std::string::npos;
        if (hit) out.push_back(p);
    }
    std::sort(out.begin(), out.end(), [](const RawPost& a, const RawPost& b) {
        return a.created_utc != b.created_utc ? a.created_utc < b.created_utc : a.id < b.id;
    });
    return out;
}

struct Lexicons {
    PolarityLexicon polarity = PolarityLexicon::load(test_support::lexicon_dir() / "polarity.tsv");
    ValenceLexicon valence = ValenceLexicon::load(test_support::lexicon_dir() / "valence.tsv");
};

// Engagement rows for the bundled sample, built in process.
Dataset sample_engagement() {
    auto events = load_viewership_csv(test_support::sample_dir() / "events.csv");
    FixtureArchive archive = FixtureArchive::from_files({test_support::sample_dir() / "archive.json"});
    FetchOptions fo;
    fo.request_delay = std::chrono::milliseconds(0);
    Lexicons lex;
    Analyzers an{lex.polarity, lex.valence, {}};
    Dataset ds;
    for (const auto& ev : events) {
        auto posts = fetch_window(ev.spec, archive, fo);
        ds.rows.push_back({ev.spec.name, aggregate_event(ev.spec, posts, an), ev.avg_viewers_millions});
    }
    return drop_zero_post_events(ds).dataset;
}

int run_cli(const std::string& args, const fs::path& log) {
    std::string cmd = std::string("\"") + BUZZCAST_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

GbmEnsemble make_ensemble(std::vector<RegressionTree> trees, std::size_t d, double init, double lr) {
    GbmEnsemble m;
    m.init_value = init;
    m.learning_rate = lr;
    m.trees = std::move(trees);
    for (std::size_t j = 0; j < d; ++j) m.feature_names.push_back("x" + std::to_string(j));
    return m;
}

void grow(std::mt19937_64& gen, std::vector<TreeNode>& nodes, const std::vector<int>& features, int depth) {
    std::uniform_real_distribution<double> u(0, 1);
    auto index = nodes.size();
    nodes.push_back(TreeNode{-1, 0, -1, -1, u(gen) * 4 - 2});
    if (depth == 0 || features.empty() || gen() % 4 == 0) return;
    nodes[index].value = 0.0;
    nodes[index].feature = features[gen() % features.size()];
    nodes[index].threshold = u(gen);
    nodes[index].left = static_cast<int>(nodes.size());
    grow(gen, nodes, features, depth - 1);
    nodes[index].right = static_cast<int>(nodes.size());
    grow(gen, nodes, features, depth - 1);
}

// ---------------------------------------------------------------------------

Outcome metric_oracle() {
    Outcome o;
    auto start = Clock::now();
    std::vector<double> t{1, 2, 3}, p{2, 3, 4};
    auto m = compute_metrics(t, p);
    o.check(std::abs(m.mae - 1.0) <= 1e-12, "MAE of worked example");
    o.check(std::abs(m.rmse - 1.0) <= 1e-12, "RMSE of worked example");
    o.check(m.r2 && std::abs(*m.r2 + 0.5) <= 1e-12, "R^2 of worked example");

    std::mt19937_64 gen(1);
    std::normal_distribution<double> noise(0, 5);
    std::size_t violations = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        std::size_t n = 1 + gen() % 50;
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = noise(gen);
            b[i] = noise(gen);
        }
        auto f = compute_metrics(a, b);
        if (f.rmse < f.mae * (1 - 1e-12)) ++violations;
    }
    o.check(violations == 0, fmt::format("RMSE >= MAE ({} violations)", violations));
    double secs = seconds_since(start);
    o.check(secs < 1.0, "runtime under 1s");
    o.note(fmt::format("{:.3f}s", secs));
    return o;
}

Outcome boosting_correctness() {
    Outcome o;
    auto start = Clock::now();
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> u(0, 2 * M_PI);
    std::normal_distribution<double> noise(0, 0.3);
    Matrix x(200, 1);
    std::vector<double> y(200);
    for (std::size_t i = 0; i < 200; ++i) {
        x(i, 0) = u(gen);
        y[i] = 3 * std::sin(x(i, 0)) + noise(gen);
    }
    std::vector<double> trace;
    fit_gbm(x, y, HyperParams{200, 0.05, 3, 2, 1.0}, 42, &trace);
    o.check(trace.size() == 201, "trace covers every round");
    std::size_t increases = 0;
    for (std::size_t i = 1; i < trace.size(); ++i)
        if (trace[i] > trace[i - 1]) ++increases;
    o.check(increases == 0, fmt::format("monotone trace ({} increases)", increases));
    o.note(fmt::format("MSE {:.4f} -> {:.4f}", trace.front(), trace.back()));

    Matrix x4{{0.1}, {0.4}, {0.6}, {0.9}};
    std::vector<double> y4{1.0, 2.0, 10.0, 12.0};
    auto m4 = fit_gbm(x4, y4, HyperParams{1, 1.0, 2, 2, 1.0});
    double mse = 0;
    for (std::size_t i = 0; i < 4; ++i) mse += std::pow(m4.predict_log(x4.row(i)) - y4[i], 2) / 4;
    o.check(mse < 1e-12, fmt::format("4-sample exact fit (MSE {:g})", mse));
    double secs = seconds_since(start);
    o.check(secs < 5.0, "runtime under 5s");
    o.note(fmt::format("{:.3f}s", secs));
    return o;
}

Outcome overfit_capacity(const Dataset& ds) {
    Outcome o;
    o.check(ds.size() >= 20, fmt::format("at least 20 rows (have {})", ds.size()));
    auto transform = FeatureTransform::fit(ds);
    auto x = transform.apply(ds);
    std::set<std::vector<double>> distinct;
    for (std::size_t r = 0; r < x.rows(); ++r) distinct.emplace(x.row(r).begin(), x.row(r).end());
    o.check(distinct.size() == x.rows(), "feature rows are distinct");
    std::vector<double> y_log;
    for (double v : ds.targets()) y_log.push_back(log1p_viewers(v));
    auto model = fit_gbm(x, y_log, HyperParams{300, 0.3, 8, 2, 1.0});
    model.feature_names = transform.feature_names();
    std::vector<double> pred;
    for (std::size_t r = 0; r < x.rows(); ++r) pred.push_back(expm1_viewers(model.predict_log(x.row(r))));
    auto m = compute_metrics(ds.targets(), pred);
    o.check(m.r2 && *m.r2 >= 0.999, "training R^2 >= 0.999");
    o.note(fmt::format("n={} training R^2 {:.6f}", ds.size(), m.r2.value_or(NAN)));
    return o;
}

Outcome grid_search(const Dataset& ds) {
    Outcome o;
    auto transform = FeatureTransform::fit(ds);
    auto x = transform.apply(ds);
    std::vector<double> y_log;
    for (double v : ds.targets()) y_log.push_back(log1p_viewers(v));
    auto a = grid_search_cv(x, y_log, ParamGrid{}, 5, 42, 1);
    auto b = grid_search_cv(x, y_log, ParamGrid{}, 5, 42, 4);
    auto c = grid_search_cv(x, y_log, ParamGrid{}, 5, 42, 1);
    o.check(a.results.size() == 16, fmt::format("16 CV results (have {})", a.results.size()));
    o.check(a.fits == 80, fmt::format("80 fits (have {})", a.fits));
    auto table = format_cv_table(a);
    o.check(table == format_cv_table(c), "repeated run gives identical table");
    o.check(table == format_cv_table(b), "threaded run gives identical table");
    o.note(fmt::format("{} bytes", table.size()));
    return o;
}

Outcome shapley_axioms() {
    Outcome o;
    auto start = Clock::now();
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> u(0, 1);
    double worst_efficiency = 0, worst_dummy = 0;
    std::size_t probes = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t d = 1 + gen() % 6;
        std::vector<int> used;
        for (std::size_t j = 0; j < d; ++j)
            if (gen() % 3) used.push_back(static_cast<int>(j));
        std::vector<RegressionTree> trees;
        for (std::size_t t = 0, n = 1 + gen() % 8; t < n; ++t) {
            std::vector<TreeNode> nodes;
            grow(gen, nodes, used, 3);
            trees.emplace_back(std::move(nodes));
        }
        auto model = make_ensemble(trees, d, u(gen), 0.05 + u(gen));
        Matrix bg(1 + gen() % 20, d);
        for (std::size_t r = 0; r < bg.rows(); ++r)
            for (std::size_t c = 0; c < d; ++c) bg(r, c) = u(gen);
        for (int p = 0; p < 5; ++p) {
            std::vector<double> probe(d);
            for (auto& v : probe) v = u(gen);
            auto a = shapley_values(model, probe, bg);
            double total = a.base_value;
            for (double v : a.values) total += v;
            worst_efficiency = std::max(worst_efficiency, std::abs(total - model.predict_log(probe)));
            for (std::size_t j = 0; j < d; ++j)
                if (std::find(used.begin(), used.end(), static_cast<int>(j)) == used.end())
                    worst_dummy = std::max(worst_dummy, std::abs(a.values[j]));
            ++probes;
        }
    }
    o.check(worst_efficiency <= 1e-9, fmt::format("efficiency (worst {:g})", worst_efficiency));
    o.check(worst_dummy <= 1e-9, fmt::format("dummy (worst {:g})", worst_dummy));

    RegressionTree stump({TreeNode{0, 0.5, 1, 2, 0.0}, TreeNode{-1, 0, -1, -1, 1.0}, TreeNode{-1, 0, -1, -1, 3.0}});
    auto model = make_ensemble({stump}, 2, 0.0, 1.0);
    auto a = shapley_values(model, std::vector<double>{1, 0}, Matrix{{0, 0}, {1, 0}});
    o.check(a.base_value == 2.0 && a.values[0] == 1.0 && a.values[1] == 0.0, "stump example");
    double secs = seconds_since(start);
    o.check(secs < 30.0, "runtime under 30s");
    o.note(fmt::format("{} probes, {:.3f}s", probes, secs));
    return o;
}

Outcome preprocessing_oracles(const Dataset& ds) {
    Outcome o;
    std::vector<double> values{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 100};
    auto fence = tukey_fence(values);
    std::vector<double> flagged;
    for (double v : values)
        if (fence.outside(v)) flagged.push_back(v);
    o.check(flagged == std::vector<double>{100}, "IQR flags exactly {100}");

    Matrix col{{0}, {5}, {10}};
    auto scaled = minmax_apply(minmax_fit(col), col);
    o.check(scaled == Matrix{{0}, {0.5}, {1}}, "min-max of [0,5,10]");

    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        double v = 200.0 * i / 999.0;
        worst = std::max(worst, std::abs(expm1_viewers(log1p_viewers(v)) - v));
    }
    o.check(worst <= 1e-12, fmt::format("expm1(log1p(x)) identity (worst {:g})", worst));

    auto idx = split(ds.size(), 0.8, 42);
    auto perturbed = ds;
    for (auto i : idx.test) {
        perturbed.rows[i].engagement.total_posts *= 100;
        perturbed.rows[i].engagement.total_comments += 1000000;
        perturbed.rows[i].engagement.avg_compound = -1.0;
    }
    auto before = FeatureTransform::fit(ds.subset(idx.train));
    auto after = FeatureTransform::fit(perturbed.subset(split(perturbed.size(), 0.8, 42).train));
    o.check(before.scaler == after.scaler, "scaler ignores test rows");

    TrainOptions opts;
    opts.grid.max_depth = {3};
    opts.grid.min_samples_split = {2};
    opts.grid.n_estimators = {50};
    opts.grid.subsample = {1.0};
    opts.screen.min_group_size = ds.size() + 1;
    auto full_a = train_pipeline(ds, opts);
    auto full_b = train_pipeline(perturbed, opts);
    o.check(full_a.model.transform == full_b.model.transform, "pipeline transform ignores test rows");
    o.check(full_a.model.trees == full_b.model.trees, "pipeline model ignores test rows");
    return o;
}

Outcome sentiment_properties() {
    Outcome o;
    Lexicons lex;
    auto negated = lex.valence.negated();
    auto neg_polarity = lex.polarity.negated();
    o.check(rule_based_score("", lex.valence).compound == 0.0, "compound(\"\") == 0");
    double shouted = rule_based_score("GOOD!!!", lex.valence).compound;
    double plain = rule_based_score("good", lex.valence).compound;
    o.check(shouted > plain, fmt::format("GOOD!!! ({:.4f}) > good ({:.4f})", shouted, plain));

    const std::vector<std::string> words{"good", "great", "bad", "terrible", "not", "never", "very", "so",
                                         "extremely", "game", "win", "lost", "hate", "love", "but", "isn't",
                                         "kind", "of", "lol", "🔥", "the", "refs", "clutch", "boring", ""};
    const std::vector<std::string> glue{" ", " ", " ", "! ", "!!! ", ", ", ". ", "? ", "\t", "\n"};
    std::mt19937_64 gen(42);
    std::size_t range_failures = 0, flip_failures = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        std::string text;
        for (std::size_t k = 0, n = gen() % 25; k < n; ++k) {
            std::string w = words[gen() % words.size()];
            if (gen() % 5 == 0)
                for (auto& c : w) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            text += w + glue[gen() % glue.size()];
        }
        if (gen() % 10 == 0) text += std::string(1, static_cast<char>(gen() % 256));
        auto s = rule_based_score(text, lex.valence);
        auto p = polarity_score(text, lex.polarity);
        bool in_range = s.compound >= -1 && s.compound <= 1 && s.pos >= 0 && s.pos <= 1 && s.neu >= 0 &&
                        s.neu <= 1 && s.neg >= 0 && s.neg <= 1 && p.polarity >= -1 && p.polarity <= 1 &&
                        p.subjectivity >= 0 && p.subjectivity <= 1;
        if (!in_range) ++range_failures;
        if (rule_based_score(text, negated).compound != -s.compound) ++flip_failures;
        if (polarity_score(text, neg_polarity).polarity != -p.polarity) ++flip_failures;
    }
    o.check(range_failures == 0, fmt::format("scores in range ({} failures)", range_failures));
    o.check(flip_failures == 0, fmt::format("sign flips under negation ({} failures)", flip_failures));
    return o;
}

Outcome ingest_completeness() {
    Outcome o;
    auto events = load_viewership_csv(test_support::sample_dir() / "events.csv");
    auto archive_posts = load_posts_fixture(test_support::sample_dir() / "archive.json");
    o.check(archive_posts.size() >= 150, fmt::format("archive holds >= 150 posts ({})", archive_posts.size()));
    FixtureArchive archive(archive_posts);
    FetchOptions fo;
    fo.request_delay = std::chrono::milliseconds(0);
    std::size_t mismatches = 0, duplicates = 0, multi_page = 0;
    for (const auto& ev : events) {
        auto result = fetch_window_detailed(ev.spec, archive, fo);
        if (result.posts != brute_force(archive_posts, ev.spec, 72)) ++mismatches;
        std::set<std::string> ids;
        for (const auto& p : result.posts) duplicates += !ids.insert(p.id).second;
        if (result.pages > 1) ++multi_page;
    }
    o.check(events.size() == 24, fmt::format("24 sample events ({})", events.size()));
    o.check(mismatches == 0, fmt::format("fetch equals brute-force filter ({} mismatches)", mismatches));
    o.check(duplicates == 0, "no duplicate ids");
    o.check(multi_page > 0, "at least one event spans a page boundary");

    auto start = Clock::now();
    std::vector<std::string> runs;
    test_support::TempDir dir;
    for (int run = 0; run < 2; ++run) {
        auto root = dir / ("run" + std::to_string(run));
        auto sample = test_support::sample_dir();
        auto ev_csv = (sample / "events.csv").string();
        auto fixtures = (root / "fixtures").string();
        auto data = (root / "engagement.csv").string();
        auto out = (root / "out").string();
        const std::vector<std::string> steps = {
            "--seed 42 --offline fetch --events \"" + ev_csv + "\" --out-dir \"" + fixtures + "\" --archive \"" +
                (sample / "archive.json").string() + "\"",
            "--seed 42 featurize --events \"" + ev_csv + "\" --fixtures \"" + fixtures + "\" --out \"" + data + "\"",
            "--seed 42 train --data \"" + data + "\" --out-dir \"" + out + "\"",
            "--seed 42 evaluate --model \"" + out + "/model.json\" --data \"" + data + "\" --out-dir \"" + out + "\"",
            "--seed 42 explain --model \"" + out + "/model.json\" --data \"" + data + "\" --out-dir \"" + out + "\"",
        };
        for (const auto& step : steps) {
            int code = run_cli(step, root.string() + ".log");
            o.check(code == 0, fmt::format("run {} step exited {}: {}", run, code, step.substr(0, 40)));
            if (code != 0) return o;
        }
        std::string bundle = slurp(data);
        for (const char* name : {"model.json", "cv_results.csv", "run_metadata.json", "metrics_test.json",
                                 "scatter_test.svg", "importance.csv", "attributions.csv", "importance.svg"})
            bundle += slurp(fs::path(out) / name);
        runs.push_back(bundle);
    }
    double secs = seconds_since(start);
    o.check(runs[0] == runs[1], "outputs identical across runs");
    o.check(secs < 60.0, "two end-to-end runs under 60s");
    o.note(fmt::format("2 runs in {:.2f}s", secs));
    return o;
}

Outcome reference_reproduction() {
    Outcome o;
    const char* path = std::getenv("BUZZCAST_APPENDIX_CSV");
    if (!path || !*path) {
        o.note("BUZZCAST_APPENDIX_CSV not set; no appendix dataset supplied, nothing to reproduce");
        return o;
    }
    auto input = load_engagement_csv(path);
    TrainOptions opts;
    auto outcome = train_pipeline(input, opts);
    auto ev = evaluate(outcome.model, outcome.dataset);
    o.check(ev.metrics.r2 && *ev.metrics.r2 >= 0.95, fmt::format("full R^2 {:.4f} >= 0.95", ev.metrics.r2.value_or(NAN)));
    o.check(std::abs(ev.metrics.mae - 1.27) <= 0.75, fmt::format("MAE {:.3f}M within 0.75M of 1.27M", ev.metrics.mae));
    auto corr = pearson_matrix(drop_zero_post_events(input).dataset);
    double max_r = corr.max_off_diagonal();
    o.check(std::abs(max_r - 0.62) <= 0.05, fmt::format("max |r| {:.3f} within 0.05 of 0.62", max_r));
    auto background = sample_background(outcome.model.transform.apply(outcome.train_rows()), 100, opts.seed);
    auto importance = global_importance(outcome.model, outcome.model.transform.apply(outcome.dataset), background);
    auto top = importance.feature_names[importance.order.front()];
    o.check(top == "total_posts", "total_posts ranks first (got " + top + ")");
    return o;
}

}  // namespace

int main() {
    Dataset sample;
    try {
        sample = sample_engagement();
    } catch (const std::exception& e) {
        std::cerr << "could not build sample engagement: " << e.what() << "\n";
    }

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"metric oracle", metric_oracle},
        {"boosting correctness", boosting_correctness},
        {"overfit capacity", [&] { return overfit_capacity(sample); }},
        {"grid search", [&] { return grid_search(sample); }},
        {"Shapley axioms", shapley_axioms},
        {"preprocessing oracles", [&] { return preprocessing_oracles(sample); }},
        {"sentiment properties", sentiment_properties},
        {"ingest completeness", ingest_completeness},
        {"conditional reproduction", reference_reproduction},
    };

    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.note(std::string("exception: ") + e.what());
        }
        all &= o.pass;
        std::string notes;
        for (const auto& n : o.notes) notes += (notes.empty() ? "" : "; ") + n;
        std::cout << fmt::format("{} {} {}{}", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                                 notes.empty() ? "" : " (" + notes + ")")
                  << std::endl;
    }
    return all ? 0 : 1;
}
