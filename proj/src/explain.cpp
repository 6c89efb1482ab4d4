#include "buzzcast/explain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "buzzcast/csv.hpp"
#include "buzzcast/error.hpp"
#include "buzzcast/preprocess.hpp"
#include "buzzcast/random.hpp"

namespace buzzcast {

std::vector<double> shapley_from_coalition_values(std::span<const double> v, std::size_t players) {
    if (players > kMaxExactShapleyFeatures)
        throw FeasibilityError(fmt::format("exact Shapley values over {} features exceed the limit of {}; group features first",
                                           players, kMaxExactShapleyFeatures));
    const std::size_t coalitions = std::size_t{1} << players;
    if (v.size() != coalitions) throw ShapeError("coalition value table must hold 2^players entries");

    // weight[s] = s! (d - s - 1)! / d! = 1 / (d * C(d-1, s))
    std::vector<double> weight(players, 0.0);
    for (std::size_t s = 0; s < players; ++s) {
        double binom = 1.0;
        for (std::size_t i = 1; i <= s; ++i) binom = binom * static_cast<double>(players - 1 - s + i) / static_cast<double>(i);
        weight[s] = 1.0 / (static_cast<double>(players) * binom);
    }

    std::vector<double> phi(players, 0.0);
    for (std::size_t j = 0; j < players; ++j) {
        const std::size_t bit = std::size_t{1} << j;
        double total = 0.0;
        for (std::size_t s = 0; s < coalitions; ++s) {
            if (s & bit) continue;
            total += weight[static_cast<std::size_t>(std::popcount(s))] * (v[s | bit] - v[s]);
        }
        phi[j] = total;
    }
    return phi;
}

namespace {

// Mean tree output over the background for every subset of the tree's own
// features (indexed by a compressed mask over `used`).
std::vector<double> tree_coalition_means(const RegressionTree& tree, const std::vector<int>& used,
                                         std::span<const double> instance, const Matrix& background) {
    const auto& nodes = tree.nodes();
    // Position of each feature inside `used`, or -1.
    int max_feature = used.empty() ? -1 : used.back();
    std::vector<int> slot(static_cast<std::size_t>(max_feature + 1), -1);
    for (std::size_t k = 0; k < used.size(); ++k) slot[static_cast<std::size_t>(used[k])] = static_cast<int>(k);

    const std::size_t subsets = std::size_t{1} << used.size();
    std::vector<double> means(subsets, 0.0);
    for (std::size_t sub = 0; sub < subsets; ++sub) {
        double sum = 0.0;
        for (std::size_t b = 0; b < background.rows(); ++b) {
            auto bg = background.row(b);
            std::size_t i = 0;
            while (!nodes[i].is_leaf()) {
                const auto& n = nodes[i];
                auto f = static_cast<std::size_t>(n.feature);
                bool from_instance = (sub >> static_cast<unsigned>(slot[f])) & 1U;
                double value = from_instance ? instance[f] : bg[f];
                i = static_cast<std::size_t>(value <= n.threshold ? n.left : n.right);
            }
            sum += nodes[i].value;
        }
        means[sub] = sum / static_cast<double>(background.rows());
    }
    return means;
}

}  // namespace

std::vector<double> coalition_values(const GbmEnsemble& model, std::span<const double> instance, const Matrix& background) {
    const std::size_t d = model.width();
    if (d > kMaxExactShapleyFeatures)
        throw FeasibilityError(fmt::format("exact Shapley values over {} features exceed the limit of {}; group features first",
                                           d, kMaxExactShapleyFeatures));
    if (background.empty()) throw ValidationError("Shapley background set is empty");
    if (instance.size() != d || background.cols() != d)
        throw ShapeError(fmt::format("instance/background width does not match the model's {} features", d));

    const std::size_t coalitions = std::size_t{1} << d;
    std::vector<double> tree_sum(coalitions, 0.0);
    for (const auto& tree : model.trees) {
        auto used = tree.used_features();
        auto means = tree_coalition_means(tree, used, instance, background);
        for (std::size_t s = 0; s < coalitions; ++s) {
            std::size_t sub = 0;
            for (std::size_t k = 0; k < used.size(); ++k)
                if ((s >> static_cast<unsigned>(used[k])) & 1U) sub |= std::size_t{1} << k;
            tree_sum[s] += means[sub];
        }
    }
    std::vector<double> v(coalitions);
    for (std::size_t s = 0; s < coalitions; ++s) v[s] = model.init_value + model.learning_rate * tree_sum[s];
    return v;
}

Attribution shapley_values(const GbmEnsemble& model, std::span<const double> instance, const Matrix& background,
                           std::string instance_name) {
    auto v = coalition_values(model, instance, background);
    Attribution a;
    a.instance = std::move(instance_name);
    a.values = shapley_from_coalition_values(v, model.width());
    a.base_value = v.front();
    a.prediction = model.predict_log(instance);
    a.feature_names = model.feature_names;
    double base_viewers = expm1_viewers(a.base_value);
    for (double phi : a.values) a.display.push_back(expm1_viewers(a.base_value + phi) - base_viewers);
    return a;
}

std::size_t GlobalImportance::rank_of(std::size_t feature) const {
    auto it = std::find(order.begin(), order.end(), feature);
    if (it == order.end()) throw ValidationError("feature index out of range");
    return static_cast<std::size_t>(it - order.begin()) + 1;
}

GlobalImportance global_importance(std::span<const Attribution> attributions) {
    if (attributions.empty()) throw InsufficientDataError("global importance needs at least one attribution");
    GlobalImportance g;
    g.feature_names = attributions.front().feature_names;
    const std::size_t d = attributions.front().values.size();
    g.mean_abs.assign(d, 0.0);
    g.mean_abs_display.assign(d, 0.0);
    for (const auto& a : attributions) {
        if (a.values.size() != d) throw ShapeError("attributions differ in width");
        for (std::size_t j = 0; j < d; ++j) {
            g.mean_abs[j] += std::abs(a.values[j]);
            g.mean_abs_display[j] += std::abs(a.display[j]);
        }
        g.base_value += a.base_value;
    }
    auto n = static_cast<double>(attributions.size());
    for (std::size_t j = 0; j < d; ++j) {
        g.mean_abs[j] /= n;
        g.mean_abs_display[j] /= n;
    }
    g.base_value /= n;
    g.order.resize(d);
    std::iota(g.order.begin(), g.order.end(), std::size_t{0});
    std::stable_sort(g.order.begin(), g.order.end(),
                     [&](std::size_t a, std::size_t b) { return g.mean_abs[a] > g.mean_abs[b]; });
    return g;
}

GlobalImportance global_importance(const GbmEnsemble& model, const Matrix& rows, const Matrix& background) {
    std::vector<Attribution> all;
    all.reserve(rows.rows());
    for (std::size_t r = 0; r < rows.rows(); ++r) all.push_back(shapley_values(model, rows.row(r), background));
    return global_importance(all);
}

Matrix sample_background(const Matrix& train, std::size_t cap, std::uint64_t seed) {
    if (train.rows() <= cap) return train;
    Rng rng(seed);
    auto picked = rng.sample_without_replacement(train.rows(), cap);
    std::sort(picked.begin(), picked.end());
    return train.select_rows(picked);
}

std::string format_importance_csv(const GlobalImportance& g) {
    std::string out = fmt::format("# base_value_log={},base_value_display={}\n", g.base_value, expm1_viewers(g.base_value));
    out += "feature,phi_log,phi_display,rank\n";
    for (std::size_t r = 0; r < g.order.size(); ++r) {
        auto j = g.order[r];
        out += fmt::format("{},{},{},{}\n", csv::escape(g.feature_names[j]), g.mean_abs[j], g.mean_abs_display[j], r + 1);
    }
    return out;
}

void write_importance_csv(const std::filesystem::path& path, const GlobalImportance& importance) {
    csv::write_file(path, format_importance_csv(importance));
}

std::string format_attributions_csv(std::span<const Attribution> attributions) {
    std::string out = "instance,base_value_log,prediction_log,feature,phi_log,phi_display\n";
    for (const auto& a : attributions) {
        for (std::size_t j = 0; j < a.values.size(); ++j) {
            out += fmt::format("{},{},{},{},{},{}\n", csv::escape(a.instance), a.base_value, a.prediction,
                               csv::escape(a.feature_names[j]), a.values[j], a.display[j]);
        }
    }
    return out;
}

}  // namespace buzzcast
