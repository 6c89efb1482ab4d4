#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "buzzcast/features.hpp"
#include "buzzcast/matrix.hpp"

namespace buzzcast {

// Target transform pair. log1p_viewers throws DomainError for x < 0.
double log1p_viewers(double viewers_millions);
double expm1_viewers(double log_value);

// Quantile by linear interpolation between order statistics at p*(n-1).
double quantile_type7(std::vector<double> values, double p);

struct Fence {
    double q1 = 0.0;
    double q3 = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool outside(double x) const noexcept { return x < lower || x > upper; }
};

Fence tukey_fence(std::span<const double> values, double k = 1.5);

struct ScreenConfig {
    double k = 1.5;
    std::size_t min_group_size = 5;  // smaller sport groups are exempt
};

struct OutlierFlag {
    std::size_t row = 0;  // index into the screened dataset
    std::string name;
    std::string feature;
    double value = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct ScreenResult {
    Dataset retained;
    std::vector<std::size_t> retained_rows;
    std::vector<std::size_t> removed_rows;
    std::vector<OutlierFlag> flags;  // one per (row, feature) outside its fence
};

// Tukey fences per sport group and numeric feature.
ScreenResult iqr_screen_by_sport(const Dataset& dataset, const ScreenConfig& config = {});

struct ScalerState {
    std::vector<double> mins;
    std::vector<double> maxs;

    bool fitted() const noexcept { return !mins.empty(); }
    friend bool operator==(const ScalerState&, const ScalerState&) = default;
};

ScalerState minmax_fit(const Matrix& train);
// (x - min) / (max - min); constant features map to 0; no clamping.
Matrix minmax_apply(const ScalerState& state, const Matrix& data);
void minmax_apply_row(const ScalerState& state, std::span<double> row);

class EncoderState {
public:
    EncoderState() = default;
    // Unique categories, sorted alphabetically.
    static EncoderState fit(const std::vector<std::string>& categories);
    static EncoderState from_categories(std::vector<std::string> sorted_unique);

    const std::vector<std::string>& categories() const noexcept { return categories_; }
    std::size_t width() const noexcept { return categories_.size(); }
    bool is_known(std::string_view category) const;
    // Single 1 for a known category; all zeros (and a warning) otherwise.
    std::vector<double> one_hot(std::string_view category) const;

    friend bool operator==(const EncoderState&, const EncoderState&) = default;

private:
    std::vector<std::string> categories_;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::uint64_t seed = 42;
};

// Seeded permutation, first round(ratio * n) indices train. Needs n >= 5.
SplitIndices split(std::size_t n, double ratio = 0.8, std::uint64_t seed = 42);

// Scaler over the numeric features plus the sport encoder, both fitted on
// training rows only.
struct FeatureTransform {
    ScalerState scaler;
    EncoderState encoder;

    static FeatureTransform fit(const Dataset& train);
    std::vector<std::string> feature_names() const;
    std::size_t width() const noexcept { return scaler.mins.size() + encoder.width(); }
    std::vector<double> apply(const EventEngagement& engagement) const;
    Matrix apply(const Dataset& dataset) const;

    friend bool operator==(const FeatureTransform&, const FeatureTransform&) = default;
};

Matrix numeric_matrix(const Dataset& dataset);

}  // namespace buzzcast
