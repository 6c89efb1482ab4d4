// buzzcast: predict televised sports viewership from archived Reddit engagement.
//
//   buzzcast fetch     events CSV -> per-event post fixtures
//   buzzcast featurize fixtures -> engagement CSV
//   buzzcast train     engagement CSV -> model.json, cv_results.csv, run_metadata.json
//   buzzcast evaluate  model + engagement CSV -> metrics JSON + scatter SVG
//   buzzcast explain   model + engagement CSV -> importance/attribution CSV + bar SVG
//   buzzcast report    artifacts -> heatmap SVG + summary.md
//
// Exit codes: 0 success, 1 other failure, 2 validation error, 3 fetch error,
// 4 insufficient data.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "buzzcast/csv.hpp"
#include "buzzcast/error.hpp"
#include "buzzcast/pipeline.hpp"

namespace fs = std::filesystem;
using namespace buzzcast;
using nlohmann::json;

namespace {

struct GlobalOptions {
    std::uint64_t seed = 42;
    std::optional<int> window_hours;
    std::string config_path;
    bool offline = false;
    bool verbose = false;
    std::string data_dir;
};

fs::path default_data_dir() {
    if (const char* env = std::getenv("BUZZCAST_DATA"); env && *env) return env;
    return BUZZCAST_DEFAULT_DATA_DIR;
}

Config load_settings(const GlobalOptions& g) {
    Config c = g.config_path.empty() ? Config{} : load_config(g.config_path);
    if (g.window_hours) c.window_hours = *g.window_hours;
    if (c.window_hours <= 0) throw ValidationError("--window-hours must be positive");
    return c;
}

struct Lexicons {
    PolarityLexicon polarity;
    ValenceLexicon valence;
};

Lexicons load_lexicons(const GlobalOptions& g) {
    fs::path dir = (g.data_dir.empty() ? default_data_dir() : fs::path(g.data_dir)) / "lexicons";
    return {PolarityLexicon::load(dir / "polarity.tsv"), ValenceLexicon::load(dir / "valence.tsv")};
}

std::vector<fs::path> json_files(const fs::path& path) {
    if (!fs::is_directory(path)) return {path};
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path))
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ValidationError("no .json archive files in " + path.string());
    return files;
}

json read_json(const fs::path& path) {
    auto doc = json::parse(csv::read_file(path), nullptr, false);
    if (doc.is_discarded()) throw ValidationError(path.string() + " is not valid JSON");
    return doc;
}

Dataset rows_named(const Dataset& data, const json& names, const std::string& what) {
    std::set<std::string> wanted;
    for (const auto& n : names) wanted.insert(n.get<std::string>());
    Dataset out;
    for (const auto& row : data.rows)
        if (wanted.count(row.name)) out.rows.push_back(row);
    if (out.empty()) throw InsufficientDataError("none of the " + what + " events appear in the data file");
    return out;
}

fs::path metadata_path_for(const std::string& explicit_path, const fs::path& model_path) {
    if (!explicit_path.empty()) return explicit_path;
    return model_path.parent_path() / "run_metadata.json";
}

int run(int argc, char** argv) {
    CLI::App app{"Predict sports viewership from social-media engagement"};
    app.require_subcommand(1);
    GlobalOptions g;
    app.add_option("--seed", g.seed, "Random seed for split, CV folds, subsampling and background sampling")
        ->capture_default_str();
    app.add_option("--window-hours", g.window_hours, "Collection window before each event start (default 72)");
    app.add_option("--config", g.config_path, "TOML-style settings file")->check(CLI::ExistingFile);
    app.add_flag("--offline", g.offline, "Read posts from a local fixture archive instead of the network");
    app.add_option("--data-dir", g.data_dir, "Directory holding lexicons/ (default: bundled data)");
    app.add_flag("-v,--verbose", g.verbose, "Verbose logging");

    // fetch
    auto* fetch = app.add_subcommand("fetch", "Collect posts for every event into per-event fixtures");
    std::string fetch_events_csv, fetch_out, fetch_archive, api_base;
    fetch->add_option("--events", fetch_events_csv, "Viewership CSV")->required()->check(CLI::ExistingFile);
    fetch->add_option("--out-dir", fetch_out, "Directory for the per-event fixtures")->required();
    fetch->add_option("--archive", fetch_archive, "Fixture archive file or directory (with --offline)");
    fetch->add_option("--api-base", api_base, "Archive API base URL (default $BUZZCAST_API_BASE or pullpush)");

    // featurize
    auto* featurize = app.add_subcommand("featurize", "Aggregate fixtures into an engagement CSV");
    std::string feat_events, feat_fixtures, feat_out;
    featurize->add_option("--events", feat_events, "Viewership CSV")->required()->check(CLI::ExistingFile);
    featurize->add_option("--fixtures", feat_fixtures, "Directory of per-event fixtures")->required();
    featurize->add_option("--out", feat_out, "Engagement CSV to write")->required();

    // train
    auto* train = app.add_subcommand("train", "Grid-search and fit the boosted model");
    std::string train_data, train_out;
    unsigned threads = 0;
    train->add_option("--data", train_data, "Engagement CSV")->required()->check(CLI::ExistingFile);
    train->add_option("--out-dir", train_out, "Directory for model.json, cv_results.csv, run_metadata.json")->required();
    train->add_option("--threads", threads, "Parallel grid-search workers (results do not depend on it)");

    // evaluate
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score the model in viewer space");
    std::string eval_model, eval_data, eval_out, eval_split = "test", eval_meta;
    evaluate_cmd->add_option("--model", eval_model, "model.json")->required()->check(CLI::ExistingFile);
    evaluate_cmd->add_option("--data", eval_data, "Engagement CSV")->required()->check(CLI::ExistingFile);
    evaluate_cmd->add_option("--out-dir", eval_out, "Directory for metrics and scatter plot")->required();
    evaluate_cmd->add_option("--split", eval_split, "Rows to score")->check(CLI::IsMember({"test", "full"}))
        ->capture_default_str();
    evaluate_cmd->add_option("--metadata", eval_meta, "run_metadata.json (default: next to the model)");

    // explain
    auto* explain = app.add_subcommand("explain", "Shapley attributions and global importance");
    std::string ex_model, ex_data, ex_out, ex_meta;
    explain->add_option("--model", ex_model, "model.json")->required()->check(CLI::ExistingFile);
    explain->add_option("--data", ex_data, "Engagement CSV")->required()->check(CLI::ExistingFile);
    explain->add_option("--out-dir", ex_out, "Directory for importance.csv, attributions.csv, importance.svg")->required();
    explain->add_option("--metadata", ex_meta, "run_metadata.json (default: next to the model)");

    // report
    auto* report = app.add_subcommand("report", "Correlation heatmap and markdown summary");
    std::string rep_data, rep_dir;
    report->add_option("--data", rep_data, "Engagement CSV")->required()->check(CLI::ExistingFile);
    report->add_option("--artifacts", rep_dir, "Directory holding the other commands' outputs")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    spdlog::set_level(g.verbose ? spdlog::level::debug : spdlog::level::info);
    Config cfg = load_settings(g);

    if (*fetch) {
        auto events = load_viewership_csv(fetch_events_csv);
        std::unique_ptr<ArchiveSource> source;
        if (g.offline) {
            if (fetch_archive.empty()) throw ValidationError("--offline fetch needs --archive");
            source = std::make_unique<FixtureArchive>(FixtureArchive::from_files(json_files(fetch_archive)));
        } else {
            std::string base = !api_base.empty() ? api_base
                               : !cfg.api_base.empty() ? cfg.api_base
                                                       : HttpArchive::base_url_from_env();
            source = std::make_unique<HttpArchive>(base);
        }
        RateLimiter limiter(cfg.rate_per_second, 1.0);
        FetchOptions opts;
        opts.window_hours = cfg.window_hours;
        opts.page_size = cfg.page_size;
        opts.max_attempts = cfg.max_attempts;
        opts.initial_backoff = std::chrono::milliseconds(cfg.initial_backoff_ms);
        opts.request_delay = std::chrono::milliseconds(g.offline ? 0 : cfg.request_delay_ms);
        opts.limiter = g.offline ? nullptr : &limiter;
        auto summary = fetch_events(events, *source, opts, fetch_out);
        std::size_t total = 0;
        for (const auto& s : summary) total += s.posts;
        std::cout << "fetched " << total << " posts for " << summary.size() << " events into " << fetch_out << "\n";
        return 0;
    }

    if (*featurize) {
        auto events = load_viewership_csv(feat_events);
        auto lex = load_lexicons(g);
        Analyzers analyzers{lex.polarity, lex.valence, cfg.sentiment};
        auto ds = featurize_events(events, feat_fixtures, analyzers);
        write_engagement_csv(feat_out, ds);
        std::cout << "wrote " << ds.size() << " engagement rows to " << feat_out << "\n";
        return 0;
    }

    if (*train) {
        auto ds = load_engagement_csv(train_data);
        TrainOptions opts;
        opts.seed = g.seed;
        opts.split_ratio = cfg.split_ratio;
        opts.folds = cfg.folds;
        opts.screen = cfg.screen;
        opts.threads = threads ? threads : cfg.threads;
        auto outcome = train_pipeline(ds, opts);
        fs::path out = train_out;
        save_model(out / "model.json", outcome.model);
        csv::write_file(out / "cv_results.csv", format_cv_table(outcome.search));
        csv::write_file(out / "run_metadata.json",
                        run_metadata(outcome, opts, cfg.sentiment, cfg.window_hours).dump(1) + "\n");
        std::cout << "trained on " << outcome.split.train.size() << " events (" << outcome.search.fits
                  << " CV fits); model written to " << (out / "model.json").string() << "\n";
        return 0;
    }

    if (*evaluate_cmd) {
        auto model = load_model(eval_model);
        auto ds = drop_zero_post_events(load_engagement_csv(eval_data)).dataset;
        Dataset rows = ds;
        if (eval_split == "test") {
            auto meta = read_json(metadata_path_for(eval_meta, eval_model));
            rows = rows_named(ds, meta.at("split").at("test_names"), "test");
        }
        auto ev = evaluate(model, rows);
        fs::path out = eval_out;
        csv::write_file(out / ("metrics_" + eval_split + ".json"), metrics_json(ev, eval_split).dump(1) + "\n");
        render_scatter(ev.actual, ev.predicted, out / ("scatter_" + eval_split + ".svg"));
        std::cout << eval_split << " split (n=" << ev.names.size() << "): MAE " << ev.metrics.mae << "M, RMSE "
                  << ev.metrics.rmse << "M, R^2 " << (ev.metrics.r2 ? std::to_string(*ev.metrics.r2) : "undefined")
                  << "\n";
        return 0;
    }

    if (*explain) {
        auto model = load_model(ex_model);
        auto ds = drop_zero_post_events(load_engagement_csv(ex_data)).dataset;
        if (ds.empty()) throw InsufficientDataError("no events to explain");
        Dataset background_rows = ds;
        if (auto meta_path = metadata_path_for(ex_meta, ex_model); fs::exists(meta_path)) {
            background_rows = rows_named(ds, read_json(meta_path).at("split").at("train_names"), "training");
        } else {
            spdlog::warn("no run metadata at {}; using every row as the background", meta_path.string());
        }
        auto background = sample_background(model.transform.apply(background_rows), cfg.background_cap, g.seed);
        std::vector<Attribution> attributions;
        for (const auto& row : ds.rows)
            attributions.push_back(shapley_values(model, model.transform.apply(row.engagement), background, row.name));
        auto importance = global_importance(attributions);
        fs::path out = ex_out;
        write_importance_csv(out / "importance.csv", importance);
        csv::write_file(out / "attributions.csv", format_attributions_csv(attributions));
        render_importance(importance, out / "importance.svg");
        std::cout << "most important feature: " << importance.feature_names[importance.order.front()] << "\n";
        return 0;
    }

    if (*report) {
        auto ds = drop_zero_post_events(load_engagement_csv(rep_data)).dataset;
        auto corr = pearson_matrix(ds);
        fs::path dir = rep_dir;
        render_heatmap(corr, dir / "heatmap.svg");
        csv::write_file(dir / "summary.md", summary_markdown(dir, corr));
        std::cout << "wrote " << (dir / "summary.md").string() << " and heatmap.svg\n";
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ValidationError& e) {
        spdlog::error("{}", e.what());
        return 2;
    } catch (const FetchError& e) {
        spdlog::error("{}", e.what());
        return 3;
    } catch (const InsufficientDataError& e) {
        spdlog::error("{}", e.what());
        return 4;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
}
