#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "buzzcast/explain.hpp"
#include "buzzcast/features.hpp"

namespace buzzcast {

struct Metrics {
    double mae = 0.0;
    double rmse = 0.0;
    // Empty when y_true has zero variance.
    std::optional<double> r2;

    // Throws DomainError when R^2 is undefined.
    double r2_value() const;
};

// MAE, RMSE and R^2 = 1 - SS_res / SS_tot. Inputs must be equal, non-zero length.
Metrics compute_metrics(std::span<const double> y_true, std::span<const double> y_pred);

// Fixed 800x600 SVG documents. Identical input yields identical bytes.
std::string scatter_svg(std::span<const double> y_true, std::span<const double> y_pred,
                        const std::string& title = "Actual vs. predicted viewership");
std::string importance_svg(const GlobalImportance& importance, const std::string& title = "Mean |Shapley value|");
std::string heatmap_svg(const CorrelationMatrix& matrix, const std::string& title = "Feature correlation");

void render_scatter(std::span<const double> y_true, std::span<const double> y_pred, const std::filesystem::path& path);
void render_importance(const GlobalImportance& importance, const std::filesystem::path& path);
void render_heatmap(const CorrelationMatrix& matrix, const std::filesystem::path& path);

}  // namespace buzzcast
