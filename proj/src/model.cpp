#include "buzzcast/model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "buzzcast/csv.hpp"
#include "buzzcast/error.hpp"
#include "buzzcast/random.hpp"

namespace buzzcast {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Regression tree
// ---------------------------------------------------------------------------

RegressionTree::RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw ValidationError("tree has no nodes");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        if (n.is_leaf()) {
            if (!std::isfinite(n.value)) throw ValidationError("tree leaf value is not finite");
            continue;
        }
        auto size = static_cast<int>(nodes_.size());
        if (n.left <= static_cast<int>(i) || n.right <= static_cast<int>(i) || n.left >= size || n.right >= size)
            throw ValidationError("tree internal node has invalid children");
        if (!std::isfinite(n.threshold)) throw ValidationError("tree threshold is not finite");
    }
}

std::size_t RegressionTree::leaf_index(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const auto& n = nodes_[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return i;
}

double RegressionTree::predict(std::span<const double> x) const { return nodes_[leaf_index(x)].value; }

std::size_t RegressionTree::leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int RegressionTree::depth() const {
    std::vector<int> d(nodes_.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        best = std::max(best, d[i]);
        if (!nodes_[i].is_leaf()) {
            d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
        }
    }
    return best;
}

std::vector<int> RegressionTree::used_features() const {
    std::set<int> used;
    for (const auto& n : nodes_)
        if (!n.is_leaf()) used.insert(n.feature);
    return {used.begin(), used.end()};
}

namespace {

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double child_sse = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, std::span<const double> residuals, const TreeParams& params)
        : x_(x), residuals_(residuals), params_(params) {}

    RegressionTree build(std::vector<std::size_t> rows) {
        grow(std::move(rows), 0);
        return RegressionTree(std::move(nodes_));
    }

private:
    int grow(std::vector<std::size_t> rows, int depth) {
        double mean = 0.0;
        for (auto r : rows) mean += residuals_[r];
        mean /= static_cast<double>(rows.size());

        auto index = static_cast<int>(nodes_.size());
        nodes_.push_back(TreeNode{-1, 0.0, -1, -1, mean});

        if (depth >= params_.max_depth || rows.size() < static_cast<std::size_t>(params_.min_samples_split) ||
            rows.size() < 2)
            return index;

        double lo = residuals_[rows.front()], hi = lo;
        for (auto r : rows) {
            lo = std::min(lo, residuals_[r]);
            hi = std::max(hi, residuals_[r]);
        }
        // Pure node, up to rounding noise.
        if (hi - lo <= 1e-13 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)))) return index;

        auto best = best_split(rows, mean);
        if (best.feature < 0) return index;

        std::vector<std::size_t> left, right;
        for (auto r : rows) {
            if (x_(r, static_cast<std::size_t>(best.feature)) <= best.threshold) left.push_back(r);
            else right.push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        int l = grow(std::move(left), depth + 1);
        int rgt = grow(std::move(right), depth + 1);
        auto& node = nodes_[static_cast<std::size_t>(index)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = l;
        node.right = rgt;
        node.value = 0.0;
        return index;
    }

    // Lowest child squared error over all features and midpoints; the first
    // candidate wins ties, including ties within rounding noise. A zero-gain split is still taken (XOR-like patterns
    // only pay off one level down).
    SplitChoice best_split(const std::vector<std::size_t>& rows, double mean) const {
        SplitChoice best;
        best.child_sse = std::numeric_limits<double>::infinity();
        const std::size_t n = rows.size();
        std::vector<std::pair<double, double>> pairs(n);  // (feature value, centered residual)
        double node_sq = 0.0;
        for (auto r : rows) node_sq += (residuals_[r] - mean) * (residuals_[r] - mean);
        // Candidates closer than rounding noise count as ties.
        const double tie_tolerance = 1e-12 * node_sq;
        for (std::size_t f = 0; f < x_.cols(); ++f) {
            for (std::size_t i = 0; i < n; ++i) pairs[i] = {x_(rows[i], f), residuals_[rows[i]] - mean};
            std::stable_sort(pairs.begin(), pairs.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
            double total = 0.0, total_sq = 0.0;
            for (const auto& p : pairs) {
                total += p.second;
                total_sq += p.second * p.second;
            }
            double left_sum = 0.0, left_sq = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                left_sum += pairs[i].second;
                left_sq += pairs[i].second * pairs[i].second;
                if (!(pairs[i].first < pairs[i + 1].first)) continue;
                auto nl = static_cast<double>(i + 1);
                auto nr = static_cast<double>(n - i - 1);
                double right_sum = total - left_sum;
                double right_sq = total_sq - left_sq;
                double sse = std::max(0.0, left_sq - left_sum * left_sum / nl) +
                             std::max(0.0, right_sq - right_sum * right_sum / nr);
                if (sse < best.child_sse - tie_tolerance) {
                    double mid = pairs[i].first + (pairs[i + 1].first - pairs[i].first) / 2.0;
                    // Rounding can push the midpoint onto the upper value.
                    if (!(mid < pairs[i + 1].first)) mid = pairs[i].first;
                    best = SplitChoice{static_cast<int>(f), mid, sse};
                }
            }
        }
        return best;
    }

    const Matrix& x_;
    std::span<const double> residuals_;
    TreeParams params_;
    std::vector<TreeNode> nodes_;
};

}  // namespace

RegressionTree fit_tree(const Matrix& x, std::span<const double> residuals, std::span<const std::size_t> rows,
                        const TreeParams& params) {
    if (x.rows() != residuals.size()) throw ShapeError("fit_tree: matrix rows and residuals differ in length");
    if (rows.empty()) throw InsufficientDataError("fit_tree: no rows to fit");
    if (params.max_depth < 1) throw ValidationError("max_depth must be at least 1");
    if (params.min_samples_split < 2) throw ValidationError("min_samples_split must be at least 2");
    for (auto r : rows)
        if (r >= x.rows()) throw ShapeError("fit_tree: row index out of range");
    return TreeBuilder(x, residuals, params).build(std::vector<std::size_t>(rows.begin(), rows.end()));
}

RegressionTree fit_tree(const Matrix& x, std::span<const double> residuals, const TreeParams& params) {
    std::vector<std::size_t> rows(x.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return fit_tree(x, residuals, rows, params);
}

// ---------------------------------------------------------------------------
// Boosting
// ---------------------------------------------------------------------------

void HyperParams::validate() const {
    if (n_estimators < 0) throw ValidationError("n_estimators must be non-negative");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ValidationError("learning_rate must be non-negative");
    if (max_depth < 1) throw ValidationError("max_depth must be at least 1");
    if (min_samples_split < 2) throw ValidationError("min_samples_split must be at least 2");
    if (!(subsample > 0.0 && subsample <= 1.0)) throw ValidationError("subsample must lie in (0, 1]");
}

double GbmEnsemble::predict_log(std::span<const double> row) const {
    if (row.size() != width())
        throw ShapeError(fmt::format("row has {} features, model expects {}", row.size(), width()));
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict(row);
    return init_value + learning_rate * sum;
}

std::vector<double> GbmEnsemble::predict_log(const Matrix& rows) const {
    std::vector<double> out;
    out.reserve(rows.rows());
    for (std::size_t r = 0; r < rows.rows(); ++r) out.push_back(predict_log(rows.row(r)));
    return out;
}

namespace {

double mse(std::span<const double> y, std::span<const double> pred) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - pred[i]) * (y[i] - pred[i]);
    return s / static_cast<double>(y.size());
}

}  // namespace

GbmEnsemble fit_gbm(const Matrix& x, std::span<const double> y_log, const HyperParams& params, std::uint64_t seed,
                    std::vector<double>* loss_trace) {
    params.validate();
    if (x.rows() != y_log.size()) throw ShapeError("fit_gbm: matrix rows and targets differ in length");
    const std::size_t n = y_log.size();
    if (n < 2) throw InsufficientDataError("fit_gbm needs at least 2 rows");

    GbmEnsemble model;
    model.params = params;
    model.seed = seed;
    model.learning_rate = params.learning_rate;
    model.init_value = std::accumulate(y_log.begin(), y_log.end(), 0.0) / static_cast<double>(n);
    for (std::size_t c = 0; c < x.cols(); ++c) model.feature_names.push_back("f" + std::to_string(c));

    // Tree outputs are accumulated per row exactly as predict_log sums them.
    std::vector<double> tree_sum(n, 0.0);
    std::vector<double> pred(n, model.init_value);
    std::vector<double> residuals(n);
    if (loss_trace) {
        loss_trace->clear();
        loss_trace->push_back(mse(y_log, pred));
    }

    Rng rng(seed);
    std::vector<std::size_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
    const TreeParams tree_params{params.max_depth, params.min_samples_split};
    const auto draw = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(params.subsample * static_cast<double>(n))));

    model.trees.reserve(static_cast<std::size_t>(params.n_estimators));
    for (int round = 0; round < params.n_estimators; ++round) {
        for (std::size_t i = 0; i < n; ++i) residuals[i] = y_log[i] - pred[i];
        std::vector<std::size_t> rows;
        if (params.subsample < 1.0) {
            rows = rng.sample_without_replacement(n, draw);
            std::sort(rows.begin(), rows.end());
        } else {
            rows = all_rows;
        }
        auto tree = fit_tree(x, residuals, rows, tree_params);
        for (std::size_t i = 0; i < n; ++i) {
            tree_sum[i] += tree.predict(x.row(i));
            pred[i] = model.init_value + model.learning_rate * tree_sum[i];
        }
        model.trees.push_back(std::move(tree));
        if (loss_trace) loss_trace->push_back(mse(y_log, pred));
    }
    return model;
}

double predict_viewers(const GbmEnsemble& model, std::span<const double> encoded_row) {
    double v = expm1_viewers(model.predict_log(encoded_row));
    if (v < 0.0) {
        spdlog::warn("negative viewership prediction {:.4f} clamped to 0", v);
        return 0.0;
    }
    return v;
}

double predict_viewers(const GbmEnsemble& model, const EventEngagement& engagement) {
    auto row = model.transform.apply(engagement);
    return predict_viewers(model, row);
}

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

std::vector<HyperParams> ParamGrid::combinations() const {
    std::vector<HyperParams> out;
    for (double lr : learning_rate)
        for (int depth : max_depth)
            for (int mss : min_samples_split)
                for (int trees : n_estimators)
                    for (double sub : subsample) out.push_back(HyperParams{trees, lr, depth, mss, sub});
    return out;
}

std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2) throw ValidationError("cross-validation needs k >= 2");
    if (n < static_cast<std::size_t>(k))
        throw InsufficientDataError(fmt::format("{}-fold cross-validation needs at least {} rows, got {}", k, k, n));
    Rng rng(seed);
    auto perm = rng.permutation(n);
    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    std::size_t base = n / static_cast<std::size_t>(k);
    std::size_t extra = n % static_cast<std::size_t>(k);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::size_t size = base + (f < extra ? 1 : 0);
        folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos), perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
        pos += size;
    }
    return folds;
}

namespace {

CvResult evaluate_combination(const Matrix& x, std::span<const double> y, const HyperParams& params,
                              const std::vector<std::vector<std::size_t>>& folds, std::uint64_t seed) {
    CvResult result;
    result.params = params;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<std::size_t> train;
        for (std::size_t g = 0; g < folds.size(); ++g)
            if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
        std::sort(train.begin(), train.end());
        std::vector<double> y_train;
        y_train.reserve(train.size());
        for (auto i : train) y_train.push_back(y[i]);
        auto model = fit_gbm(x.select_rows(train), y_train, params, seed);
        double abs_err = 0.0;
        for (auto i : folds[f]) abs_err += std::abs(y[i] - model.predict_log(x.row(i)));
        result.fold_mae.push_back(abs_err / static_cast<double>(folds[f].size()));
    }
    result.mean_mae = std::accumulate(result.fold_mae.begin(), result.fold_mae.end(), 0.0) /
                      static_cast<double>(result.fold_mae.size());
    return result;
}

}  // namespace

GridSearchResult grid_search_cv(const Matrix& x, std::span<const double> y_log, const ParamGrid& grid, int k,
                                std::uint64_t seed, unsigned threads) {
    if (x.rows() != y_log.size()) throw ShapeError("grid_search_cv: matrix rows and targets differ in length");
    auto combos = grid.combinations();
    if (combos.empty()) throw ValidationError("parameter grid is empty");
    for (const auto& c : combos) c.validate();

    GridSearchResult out;
    out.folds = kfold_indices(y_log.size(), k, seed);
    out.results.resize(combos.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < combos.size(); i = next++)
            out.results[i] = evaluate_combination(x, y_log, combos[i], out.folds, seed);
    };
    unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(combos.size())));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    out.fits = combos.size() * static_cast<std::size_t>(k);

    std::vector<std::size_t> order(combos.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return out.results[a].mean_mae < out.results[b].mean_mae;
    });
    for (std::size_t r = 0; r < order.size(); ++r) out.results[order[r]].rank = static_cast<int>(r + 1);
    out.best = out.results[order.front()].params;
    return out;
}

std::string format_cv_table(const GridSearchResult& result) {
    std::size_t k = result.folds.size();
    std::string out = "rank,learning_rate,max_depth,min_samples_split,n_estimators,subsample,mean_mae";
    for (std::size_t f = 0; f < k; ++f) out += fmt::format(",fold_{}_mae", f + 1);
    out += '\n';
    for (const auto& r : result.results) {
        out += fmt::format("{},{},{},{},{},{},{}", r.rank, r.params.learning_rate, r.params.max_depth,
                           r.params.min_samples_split, r.params.n_estimators, r.params.subsample, r.mean_mae);
        for (double m : r.fold_mae) out += fmt::format(",{}", m);
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

json node_to_json(const std::vector<TreeNode>& nodes, std::size_t i) {
    const auto& n = nodes[i];
    if (n.is_leaf()) return json{{"value", n.value}};
    return json{{"feature", n.feature},
                {"threshold", n.threshold},
                {"left", node_to_json(nodes, static_cast<std::size_t>(n.left))},
                {"right", node_to_json(nodes, static_cast<std::size_t>(n.right))}};
}

int node_from_json(const json& j, std::vector<TreeNode>& nodes, std::size_t width, int depth) {
    if (depth > 64) throw ValidationError("model tree is too deep");
    auto index = static_cast<int>(nodes.size());
    nodes.emplace_back();
    if (j.contains("value")) {
        nodes.back().value = j.at("value").get<double>();
        return index;
    }
    int feature = j.at("feature").get<int>();
    if (feature < 0 || static_cast<std::size_t>(feature) >= width)
        throw ValidationError("model tree references feature " + std::to_string(feature));
    double threshold = j.at("threshold").get<double>();
    int left = node_from_json(j.at("left"), nodes, width, depth + 1);
    int right = node_from_json(j.at("right"), nodes, width, depth + 1);
    auto& n = nodes[static_cast<std::size_t>(index)];
    n.feature = feature;
    n.threshold = threshold;
    n.left = left;
    n.right = right;
    return index;
}

}  // namespace

json to_json(const HyperParams& p) {
    return json{{"n_estimators", p.n_estimators},
                {"learning_rate", p.learning_rate},
                {"max_depth", p.max_depth},
                {"min_samples_split", p.min_samples_split},
                {"subsample", p.subsample}};
}

HyperParams hyper_params_from_json(const json& j) {
    HyperParams p;
    p.n_estimators = j.at("n_estimators").get<int>();
    p.learning_rate = j.at("learning_rate").get<double>();
    p.max_depth = j.at("max_depth").get<int>();
    p.min_samples_split = j.at("min_samples_split").get<int>();
    p.subsample = j.at("subsample").get<double>();
    p.validate();
    return p;
}

json to_json(const GbmEnsemble& model) {
    json trees = json::array();
    for (const auto& t : model.trees) trees.push_back(node_to_json(t.nodes(), 0));
    return json{{"version", kModelFormatVersion},
                {"target_transform", model.target_transform},
                {"init_value", model.init_value},
                {"learning_rate", model.learning_rate},
                {"feature_names", model.feature_names},
                {"scaler", {{"mins", model.transform.scaler.mins}, {"maxs", model.transform.scaler.maxs}}},
                {"encoder", {{"categories", model.transform.encoder.categories()}}},
                {"params", to_json(model.params)},
                {"seed", model.seed},
                {"trees", std::move(trees)}};
}

GbmEnsemble model_from_json(const json& doc) {
    try {
        if (doc.at("version").get<std::string>() != kModelFormatVersion)
            throw ValidationError("unsupported model version '" + doc.at("version").get<std::string>() + "'");
        GbmEnsemble m;
        m.target_transform = doc.at("target_transform").get<std::string>();
        if (m.target_transform != "log1p") throw ValidationError("unsupported target transform '" + m.target_transform + "'");
        m.init_value = doc.at("init_value").get<double>();
        m.learning_rate = doc.at("learning_rate").get<double>();
        m.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
        m.transform.scaler.mins = doc.at("scaler").at("mins").get<std::vector<double>>();
        m.transform.scaler.maxs = doc.at("scaler").at("maxs").get<std::vector<double>>();
        if (m.transform.scaler.mins.size() != m.transform.scaler.maxs.size())
            throw ValidationError("scaler mins and maxs differ in length");
        m.transform.encoder =
            EncoderState::from_categories(doc.at("encoder").at("categories").get<std::vector<std::string>>());
        if (m.transform.scaler.fitted() && m.transform.width() != m.feature_names.size())
            throw ValidationError("feature_names length does not match the stored transforms");
        m.params = hyper_params_from_json(doc.at("params"));
        m.seed = doc.at("seed").get<std::uint64_t>();
        for (const auto& t : doc.at("trees")) {
            std::vector<TreeNode> nodes;
            node_from_json(t, nodes, m.feature_names.size(), 0);
            m.trees.emplace_back(std::move(nodes));
        }
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed model document: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const GbmEnsemble& model) {
    csv::write_file(path, to_json(model).dump(1) + "\n");
}

GbmEnsemble load_model(const std::filesystem::path& path) {
    auto doc = json::parse(csv::read_file(path), nullptr, false);
    if (doc.is_discarded()) throw ValidationError("model file " + path.string() + " is not valid JSON");
    return model_from_json(doc);
}

}  // namespace buzzcast
