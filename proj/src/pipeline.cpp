#include "buzzcast/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "buzzcast/csv.hpp"
#include "buzzcast/error.hpp"

namespace buzzcast {

using nlohmann::json;

std::string fixture_file_name(const std::string& event_name) {
    std::string slug;
    for (char c : event_name) {
        auto uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc)) slug.push_back(static_cast<char>(std::tolower(uc)));
        else if (!slug.empty() && slug.back() != '_') slug.push_back('_');
    }
    while (!slug.empty() && slug.back() == '_') slug.pop_back();
    if (slug.empty()) throw ValidationError("event name '" + event_name + "' yields an empty fixture name");
    return slug + ".json";
}

std::vector<FetchSummary> fetch_events(const std::vector<LabeledEvent>& events, ArchiveSource& source,
                                       const FetchOptions& options, const std::filesystem::path& out_dir) {
    std::vector<FetchSummary> out;
    for (const auto& ev : events) {
        auto result = fetch_window_detailed(ev.spec, source, options);
        write_posts_fixture(out_dir / fixture_file_name(ev.spec.name), result.posts);
        spdlog::info("{}: {} posts over {} page(s)", ev.spec.name, result.posts.size(), result.pages);
        out.push_back({ev.spec.name, result.posts.size(), result.pages});
    }
    return out;
}

Dataset featurize_events(const std::vector<LabeledEvent>& events, const std::filesystem::path& fixture_dir,
                         const Analyzers& analyzers) {
    Dataset ds;
    for (const auto& ev : events) {
        auto path = fixture_dir / fixture_file_name(ev.spec.name);
        std::vector<RawPost> posts;
        if (std::filesystem::exists(path)) {
            posts = load_posts_fixture(path);
        } else {
            spdlog::warn("no fixture for '{}' at {}; treating as zero posts", ev.spec.name, path.string());
        }
        ds.rows.push_back({ev.spec.name, aggregate_event(ev.spec, posts, analyzers), ev.avg_viewers_millions});
    }
    return ds;
}

TrainOutcome train_pipeline(const Dataset& input, const TrainOptions& options) {
    TrainOutcome out;
    auto kept = drop_zero_post_events(input);
    out.dropped_zero_post = kept.removed;
    out.screen = iqr_screen_by_sport(kept.dataset, options.screen);
    if (!out.screen.flags.empty())
        spdlog::info("IQR screen removed {} of {} events", out.screen.removed_rows.size(), kept.dataset.size());
    out.dataset = out.screen.retained;
    out.split = split(out.dataset.size(), options.split_ratio, options.seed);

    auto train = out.train_rows();
    auto transform = FeatureTransform::fit(train);
    auto x_train = transform.apply(train);
    std::vector<double> y_train;
    for (double v : train.targets()) y_train.push_back(log1p_viewers(v));

    out.search = grid_search_cv(x_train, y_train, options.grid, options.folds, options.seed, options.threads);
    out.model = fit_gbm(x_train, y_train, out.search.best, options.seed);
    out.model.transform = transform;
    out.model.feature_names = transform.feature_names();
    return out;
}

json run_metadata(const TrainOutcome& o, const TrainOptions& options, const RuleConfig& sentiment, int window_hours) {
    json flags = json::array();
    for (const auto& f : o.screen.flags)
        flags.push_back({{"row", f.row}, {"name", f.name}, {"feature", f.feature}, {"value", f.value},
                         {"lower", f.lower}, {"upper", f.upper}});
    auto names_of = [&](const std::vector<std::size_t>& idx) {
        json arr = json::array();
        for (auto i : idx) arr.push_back(o.dataset.rows[i].name);
        return arr;
    };
    json test_sports = json::object();
    for (auto i : o.split.test) {
        auto s = std::string(to_string(o.dataset.rows[i].engagement.sport));
        test_sports[s] = test_sports.value(s, 0) + 1;
    }
    return json{
        {"seed", options.seed},
        {"window_hours", window_hours},
        {"dropped_zero_post_events", o.dropped_zero_post},
        {"outliers", {{"k", options.screen.k}, {"min_group_size", options.screen.min_group_size}, {"flags", flags}}},
        {"scaler", {{"features", std::vector<std::string>(kNumericFeatureNames.begin(), kNumericFeatureNames.end())},
                    {"mins", o.model.transform.scaler.mins},
                    {"maxs", o.model.transform.scaler.maxs}}},
        {"encoder", {{"columns", o.model.transform.encoder.categories()}}},
        {"split",
         {{"ratio", options.split_ratio},
          {"seed", o.split.seed},
          {"train_indices", o.split.train},
          {"test_indices", o.split.test},
          {"train_names", names_of(o.split.train)},
          {"test_names", names_of(o.split.test)},
          {"test_sport_counts", test_sports}}},
        {"cv", {{"folds", options.folds}, {"fits", o.search.fits}, {"best", to_json(o.search.best)}}},
        {"sentiment",
         {{"booster_increment", sentiment.booster_increment},
          {"caps_boost", sentiment.caps_boost},
          {"negation_window", sentiment.negation_window},
          {"negation_factor", sentiment.negation_factor},
          {"exclamation_increment", sentiment.exclamation_increment},
          {"exclamation_cap", sentiment.exclamation_cap},
          {"normalization_alpha", sentiment.normalization_alpha}}},
    };
}

Evaluation evaluate(const GbmEnsemble& model, const Dataset& rows) {
    Evaluation e;
    for (const auto& row : rows.rows) {
        e.names.push_back(row.name);
        e.actual.push_back(row.avg_viewers_millions);
        e.predicted.push_back(predict_viewers(model, row.engagement));
    }
    e.metrics = compute_metrics(e.actual, e.predicted);
    return e;
}

json metrics_json(const Evaluation& e, const std::string& split_label) {
    json predictions = json::array();
    for (std::size_t i = 0; i < e.names.size(); ++i)
        predictions.push_back({{"name", e.names[i]}, {"actual", e.actual[i]}, {"predicted", e.predicted[i]}});
    json j{{"split", split_label},
           {"n", e.names.size()},
           {"mae_millions", e.metrics.mae},
           {"rmse_millions", e.metrics.rmse},
           {"r2", e.metrics.r2 ? json(*e.metrics.r2) : json(nullptr)},
           {"predictions", predictions}};
    return j;
}

std::string summary_markdown(const std::filesystem::path& dir, const CorrelationMatrix& correlations) {
    std::string md = "# Viewership model report\n\n";
    for (const char* file : {"metrics_test.json", "metrics_full.json"}) {
        auto path = dir / file;
        if (!std::filesystem::exists(path)) continue;
        auto m = json::parse(csv::read_file(path));
        md += fmt::format("## Metrics ({} split, n = {})\n\n", m.at("split").get<std::string>(), m.at("n").get<int>());
        md += "| metric | value |\n|---|---|\n";
        md += fmt::format("| MAE (M viewers) | {:.3f} |\n", m.at("mae_millions").get<double>());
        md += fmt::format("| RMSE (M viewers) | {:.3f} |\n", m.at("rmse_millions").get<double>());
        if (m.at("r2").is_null()) md += "| R^2 | undefined |\n\n";
        else md += fmt::format("| R^2 | {:.4f} |\n\n", m.at("r2").get<double>());
    }
    if (auto path = dir / "run_metadata.json"; std::filesystem::exists(path)) {
        auto meta = json::parse(csv::read_file(path));
        const auto& best = meta.at("cv").at("best");
        md += "## Selected hyperparameters\n\n";
        md += fmt::format(
            "n_estimators = {}, learning_rate = {}, max_depth = {}, min_samples_split = {}, subsample = {} "
            "(seed {}, {} CV fits)\n\n",
            best.at("n_estimators").get<int>(), best.at("learning_rate").get<double>(), best.at("max_depth").get<int>(),
            best.at("min_samples_split").get<int>(), best.at("subsample").get<double>(), meta.at("seed").get<int>(),
            meta.at("cv").at("fits").get<int>());
        md += fmt::format("Outlier flags: {}; test split sports: {}\n\n", meta.at("outliers").at("flags").size(),
                          meta.at("split").at("test_sport_counts").dump());
    }
    if (auto path = dir / "importance.csv"; std::filesystem::exists(path)) {
        md += "## Global feature importance (mean |Shapley value|, log space)\n\n| rank | feature | value |\n|---|---|---|\n";
        for (const auto& rec : csv::parse(csv::read_file(path))) {
            if (rec.fields.size() != 4 || rec.fields[0].rfind("#", 0) == 0 || rec.fields[0] == "feature") continue;
            md += fmt::format("| {} | {} | {} |\n", rec.fields[3], rec.fields[0], rec.fields[1]);
        }
        md += "\n";
    }
    md += fmt::format("## Correlation screen\n\nLargest off-diagonal |r| among numeric features: {:.2f}\n",
                      correlations.max_off_diagonal());
    return md;
}

}  // namespace buzzcast
