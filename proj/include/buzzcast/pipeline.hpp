#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "buzzcast/config.hpp"
#include "buzzcast/explain.hpp"
#include "buzzcast/features.hpp"
#include "buzzcast/ingest.hpp"
#include "buzzcast/model.hpp"
#include "buzzcast/preprocess.hpp"
#include "buzzcast/report.hpp"

namespace buzzcast {

// File name used for an event's post fixture, e.g. "ws_g5_2024.json".
std::string fixture_file_name(const std::string& event_name);

struct FetchSummary {
    std::string event;
    std::size_t posts = 0;
    int pages = 0;
};

// Runs fetch_window for every event and writes one fixture per event into `out_dir`.
std::vector<FetchSummary> fetch_events(const std::vector<LabeledEvent>& events, ArchiveSource& source,
                                       const FetchOptions& options, const std::filesystem::path& out_dir);

// Aggregates each event's fixture into an engagement row; missing fixtures count as zero posts.
Dataset featurize_events(const std::vector<LabeledEvent>& events, const std::filesystem::path& fixture_dir,
                         const Analyzers& analyzers);

struct TrainOptions {
    ParamGrid grid;
    std::uint64_t seed = 42;
    double split_ratio = 0.8;
    int folds = 5;
    ScreenConfig screen;
    unsigned threads = 1;
};

struct TrainOutcome {
    std::size_t dropped_zero_post = 0;
    ScreenResult screen;          // over the non-empty events
    Dataset dataset;              // screened rows in input order
    SplitIndices split;           // indices into `dataset`
    GridSearchResult search;
    GbmEnsemble model;            // refit on the training split with the best parameters

    Dataset train_rows() const { return dataset.subset(split.train); }
    Dataset test_rows() const { return dataset.subset(split.test); }
};

// Zero-post filter, per-sport IQR screen, seeded split, transforms fitted on
// the training split, grid search, final refit.
TrainOutcome train_pipeline(const Dataset& input, const TrainOptions& options);

// Preprocessing report written next to the model.
nlohmann::json run_metadata(const TrainOutcome& outcome, const TrainOptions& options, const RuleConfig& sentiment,
                            int window_hours);

struct Evaluation {
    std::vector<std::string> names;
    std::vector<double> actual;
    std::vector<double> predicted;
    Metrics metrics;
};

Evaluation evaluate(const GbmEnsemble& model, const Dataset& rows);

nlohmann::json metrics_json(const Evaluation& evaluation, const std::string& split_label);

// Markdown summary combining whatever artifacts are present in `artifact_dir`.
std::string summary_markdown(const std::filesystem::path& artifact_dir, const CorrelationMatrix& correlations);

}  // namespace buzzcast
