#include "buzzcast/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <spdlog/spdlog.h>

#include "buzzcast/error.hpp"
#include "buzzcast/random.hpp"

namespace buzzcast {

double log1p_viewers(double viewers_millions) {
    if (!(viewers_millions >= 0.0)) throw DomainError("log1p target transform needs a non-negative value");
    return std::log1p(viewers_millions);
}

double expm1_viewers(double log_value) { return std::expm1(log_value); }

double quantile_type7(std::vector<double> values, double p) {
    if (values.empty()) throw InsufficientDataError("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    double h = p * static_cast<double>(values.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(h));
    auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Fence tukey_fence(std::span<const double> values, double k) {
    std::vector<double> v(values.begin(), values.end());
    Fence f;
    f.q1 = quantile_type7(v, 0.25);
    f.q3 = quantile_type7(std::move(v), 0.75);
    double iqr = f.q3 - f.q1;
    f.lower = f.q1 - k * iqr;
    f.upper = f.q3 + k * iqr;
    return f;
}

ScreenResult iqr_screen_by_sport(const Dataset& dataset, const ScreenConfig& config) {
    if (!(config.k >= 0.0)) throw ValidationError("IQR multiplier k must be non-negative");
    std::map<Sport, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < dataset.size(); ++i) groups[dataset.rows[i].engagement.sport].push_back(i);

    ScreenResult result;
    std::vector<bool> flagged(dataset.size(), false);
    for (const auto& [sport, members] : groups) {
        if (members.size() < config.min_group_size) continue;
        for (std::size_t f = 0; f < kNumericFeatureCount; ++f) {
            std::vector<double> values;
            values.reserve(members.size());
            for (auto i : members) values.push_back(numeric_features(dataset.rows[i].engagement)[f]);
            auto fence = tukey_fence(values, config.k);
            for (std::size_t m = 0; m < members.size(); ++m) {
                if (!fence.outside(values[m])) continue;
                auto row = members[m];
                flagged[row] = true;
                result.flags.push_back(OutlierFlag{row, dataset.rows[row].name, std::string(kNumericFeatureNames[f]),
                                                   values[m], fence.lower, fence.upper});
            }
        }
    }
    std::sort(result.flags.begin(), result.flags.end(), [](const OutlierFlag& a, const OutlierFlag& b) {
        return a.row != b.row ? a.row < b.row : a.feature < b.feature;
    });
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (flagged[i]) {
            result.removed_rows.push_back(i);
        } else {
            result.retained_rows.push_back(i);
            result.retained.rows.push_back(dataset.rows[i]);
        }
    }
    return result;
}

ScalerState minmax_fit(const Matrix& train) {
    if (train.empty() || train.cols() == 0) throw InsufficientDataError("min-max scaler needs at least one row and column");
    ScalerState s;
    s.mins.assign(train.cols(), 0.0);
    s.maxs.assign(train.cols(), 0.0);
    for (std::size_t c = 0; c < train.cols(); ++c) {
        s.mins[c] = s.maxs[c] = train(0, c);
        for (std::size_t r = 1; r < train.rows(); ++r) {
            s.mins[c] = std::min(s.mins[c], train(r, c));
            s.maxs[c] = std::max(s.maxs[c], train(r, c));
        }
    }
    return s;
}

void minmax_apply_row(const ScalerState& state, std::span<double> row) {
    if (!state.fitted()) throw StateError("min-max scaler applied before fit");
    if (row.size() != state.mins.size()) throw ShapeError("row width does not match the fitted scaler");
    for (std::size_t c = 0; c < row.size(); ++c) {
        double range = state.maxs[c] - state.mins[c];
        row[c] = range > 0.0 ? (row[c] - state.mins[c]) / range : 0.0;
    }
}

Matrix minmax_apply(const ScalerState& state, const Matrix& data) {
    if (!state.fitted()) throw StateError("min-max scaler applied before fit");
    Matrix out = data;
    for (std::size_t r = 0; r < out.rows(); ++r) minmax_apply_row(state, out.row(r));
    return out;
}

EncoderState EncoderState::fit(const std::vector<std::string>& categories) {
    std::vector<std::string> sorted = categories;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    EncoderState e;
    e.categories_ = std::move(sorted);
    return e;
}

EncoderState EncoderState::from_categories(std::vector<std::string> sorted_unique) {
    if (!std::is_sorted(sorted_unique.begin(), sorted_unique.end()) ||
        std::adjacent_find(sorted_unique.begin(), sorted_unique.end()) != sorted_unique.end())
        throw ValidationError("encoder categories must be unique and sorted");
    EncoderState e;
    e.categories_ = std::move(sorted_unique);
    return e;
}

bool EncoderState::is_known(std::string_view category) const {
    return std::binary_search(categories_.begin(), categories_.end(), category);
}

std::vector<double> EncoderState::one_hot(std::string_view category) const {
    std::vector<double> v(categories_.size(), 0.0);
    auto it = std::lower_bound(categories_.begin(), categories_.end(), category);
    if (it != categories_.end() && *it == category) {
        v[static_cast<std::size_t>(it - categories_.begin())] = 1.0;
    } else {
        spdlog::warn("category '{}' was not seen during fitting; encoding as all zeros", category);
    }
    return v;
}

SplitIndices split(std::size_t n, double ratio, std::uint64_t seed) {
    if (n < 5) throw InsufficientDataError("train/test split needs at least 5 rows, got " + std::to_string(n));
    if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("split ratio must lie in (0, 1)");
    Rng rng(seed);
    auto perm = rng.permutation(n);
    auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
    SplitIndices s;
    s.seed = seed;
    s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    return s;
}

Matrix numeric_matrix(const Dataset& dataset) {
    Matrix m(0, kNumericFeatureCount);
    for (const auto& row : dataset.rows) {
        auto f = numeric_features(row.engagement);
        m.append_row(f);
    }
    return m;
}

FeatureTransform FeatureTransform::fit(const Dataset& train) {
    FeatureTransform t;
    t.scaler = minmax_fit(numeric_matrix(train));
    std::vector<std::string> sports;
    for (const auto& row : train.rows) sports.emplace_back(to_string(row.engagement.sport));
    t.encoder = EncoderState::fit(sports);
    return t;
}

std::vector<std::string> FeatureTransform::feature_names() const {
    std::vector<std::string> names(kNumericFeatureNames.begin(), kNumericFeatureNames.end());
    for (const auto& c : encoder.categories()) names.push_back(one_hot_column_name(c));
    return names;
}

std::vector<double> FeatureTransform::apply(const EventEngagement& engagement) const {
    auto numeric = numeric_features(engagement);
    std::vector<double> row(numeric.begin(), numeric.end());
    minmax_apply_row(scaler, row);
    auto hot = encoder.one_hot(to_string(engagement.sport));
    row.insert(row.end(), hot.begin(), hot.end());
    return row;
}

Matrix FeatureTransform::apply(const Dataset& dataset) const {
    Matrix m(0, width());
    for (const auto& row : dataset.rows) m.append_row(apply(row.engagement));
    return m;
}

}  // namespace buzzcast
