#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "buzzcast/matrix.hpp"
#include "buzzcast/preprocess.hpp"

namespace buzzcast {

// A node is a leaf when feature < 0. Internal nodes route x[feature] <= threshold left;
// only leaves carry a value.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class RegressionTree {
public:
    RegressionTree() = default;
    explicit RegressionTree(std::vector<TreeNode> nodes);

    double predict(std::span<const double> x) const;
    // Index of the leaf reached by x.
    std::size_t leaf_index(std::span<const double> x) const;

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    std::size_t leaf_count() const;
    int depth() const;
    // Distinct feature indices used by internal nodes, ascending.
    std::vector<int> used_features() const;

    friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

private:
    std::vector<TreeNode> nodes_;
};

struct TreeParams {
    int max_depth = 3;
    int min_samples_split = 2;
};

// Greedy least-squares tree on the given rows. Split candidates are midpoints
// between consecutive distinct values. A node splits on its lowest-error
// candidate unless its residuals are all equal; the best split is taken even
// when it does not lower the error. Leaves hold the mean residual of their rows.
RegressionTree fit_tree(const Matrix& x, std::span<const double> residuals, std::span<const std::size_t> rows,
                        const TreeParams& params);
RegressionTree fit_tree(const Matrix& x, std::span<const double> residuals, const TreeParams& params);

struct HyperParams {
    int n_estimators = 100;
    double learning_rate = 0.1;
    int max_depth = 3;
    int min_samples_split = 2;
    double subsample = 1.0;

    void validate() const;
    friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

struct GbmEnsemble {
    double init_value = 0.0;
    double learning_rate = 0.0;
    std::vector<RegressionTree> trees;
    std::vector<std::string> feature_names;
    FeatureTransform transform;
    HyperParams params;
    std::uint64_t seed = 42;
    std::string target_transform = "log1p";

    std::size_t width() const noexcept { return feature_names.size(); }
    // init + learning_rate * sum of tree outputs, in log space.
    double predict_log(std::span<const double> row) const;
    std::vector<double> predict_log(const Matrix& rows) const;
};

// Least-squares boosting. `loss_trace`, when given, receives the training MSE
// before the first round and after every round.
GbmEnsemble fit_gbm(const Matrix& x, std::span<const double> y_log, const HyperParams& params, std::uint64_t seed = 42,
                    std::vector<double>* loss_trace = nullptr);

// expm1 of the log-space prediction; negative results clamp to 0 with a warning.
double predict_viewers(const GbmEnsemble& model, std::span<const double> encoded_row);
double predict_viewers(const GbmEnsemble& model, const EventEngagement& engagement);

struct ParamGrid {
    std::vector<double> learning_rate{0.05};
    std::vector<int> max_depth{3, 5};
    std::vector<int> min_samples_split{2, 5};
    std::vector<int> n_estimators{100, 200};
    std::vector<double> subsample{0.8, 1.0};

    // Enumeration order: parameter names sorted alphabetically, the last
    // (subsample) varying fastest.
    std::vector<HyperParams> combinations() const;
};

struct CvResult {
    HyperParams params;
    std::vector<double> fold_mae;  // log space
    double mean_mae = 0.0;
    int rank = 0;
};

struct GridSearchResult {
    HyperParams best;
    std::vector<CvResult> results;  // enumeration order
    std::vector<std::vector<std::size_t>> folds;
    std::size_t fits = 0;
};

// Exhaustive search scored by mean held-out MAE over k shuffled contiguous
// folds shared by every combination. Ties go to the earlier combination.
// `threads` > 1 evaluates combinations concurrently without changing results.
GridSearchResult grid_search_cv(const Matrix& x, std::span<const double> y_log, const ParamGrid& grid, int k = 5,
                                std::uint64_t seed = 42, unsigned threads = 1);

std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, int k, std::uint64_t seed);

std::string format_cv_table(const GridSearchResult& result);

inline constexpr std::string_view kModelFormatVersion = "buzzcast-model/1";

nlohmann::json to_json(const GbmEnsemble& model);
GbmEnsemble model_from_json(const nlohmann::json& doc);
void save_model(const std::filesystem::path& path, const GbmEnsemble& model);
GbmEnsemble load_model(const std::filesystem::path& path);

nlohmann::json to_json(const HyperParams& params);
HyperParams hyper_params_from_json(const nlohmann::json& doc);

}  // namespace buzzcast
