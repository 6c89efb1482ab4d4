#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "buzzcast/matrix.hpp"
#include "buzzcast/model.hpp"

namespace buzzcast {

inline constexpr std::size_t kMaxExactShapleyFeatures = 16;

// Additive attribution of one prediction, in log space:
// base_value + sum(values) == model output at the instance.
struct Attribution {
    std::string instance;
    double base_value = 0.0;
    double prediction = 0.0;
    std::vector<double> values;
    std::vector<std::string> feature_names;
    // expm1(base + phi_j) - expm1(base): a viewer-scale reading of each value, display only.
    std::vector<double> display;
};

// Shapley values of an arbitrary coalition game over `players` players given
// v(S) for every bitmask S (size 2^players).
std::vector<double> shapley_from_coalition_values(std::span<const double> coalition_values, std::size_t players);

// Interventional coalition values of the ensemble: v(S) is the mean model
// output over background rows b of the point taking features in S from the
// instance and the rest from b.
std::vector<double> coalition_values(const GbmEnsemble& model, std::span<const double> instance, const Matrix& background);

Attribution shapley_values(const GbmEnsemble& model, std::span<const double> instance, const Matrix& background,
                           std::string instance_name = {});

struct GlobalImportance {
    std::vector<std::string> feature_names;
    std::vector<double> mean_abs;          // log space, per feature
    std::vector<double> mean_abs_display;  // viewer scale, per feature
    std::vector<std::size_t> order;        // feature indices, most important first
    double base_value = 0.0;               // mean base value over explained rows

    std::size_t rank_of(std::size_t feature) const;
};

GlobalImportance global_importance(const GbmEnsemble& model, const Matrix& rows, const Matrix& background);
GlobalImportance global_importance(std::span<const Attribution> attributions);

// All rows when there are at most `cap`, otherwise a seeded sample kept in row order.
Matrix sample_background(const Matrix& train, std::size_t cap = 100, std::uint64_t seed = 42);

// Leading "# base_value_log=...,base_value_display=..." line, then
// feature,phi_log,phi_display,rank in rank order.
std::string format_importance_csv(const GlobalImportance& importance);
void write_importance_csv(const std::filesystem::path& path, const GlobalImportance& importance);

// Long format: instance,base_value_log,prediction_log,feature,phi_log,phi_display.
std::string format_attributions_csv(std::span<const Attribution> attributions);

}  // namespace buzzcast
