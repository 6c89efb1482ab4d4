#include "buzzcast/report.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "buzzcast/csv.hpp"
#include "buzzcast/error.hpp"

namespace buzzcast {

double Metrics::r2_value() const {
    if (!r2) throw DomainError("R^2 is undefined when the true values have zero variance");
    return *r2;
}

Metrics compute_metrics(std::span<const double> y_true, std::span<const double> y_pred) {
    if (y_true.size() != y_pred.size())
        throw ShapeError(fmt::format("metrics: {} true values vs {} predictions", y_true.size(), y_pred.size()));
    if (y_true.empty()) throw ShapeError("metrics need at least one value");
    const auto n = static_cast<double>(y_true.size());
    double abs_sum = 0.0, sq_sum = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        double diff = y_pred[i] - y_true[i];
        abs_sum += std::abs(diff);
        sq_sum += diff * diff;
        mean += y_true[i];
    }
    mean /= n;
    double ss_tot = 0.0;
    for (double y : y_true) ss_tot += (y - mean) * (y - mean);

    Metrics m;
    m.mae = abs_sum / n;
    m.rmse = std::sqrt(sq_sum / n);
    if (ss_tot > 0.0) m.r2 = 1.0 - sq_sum / ss_tot;
    return m;
}

namespace {

constexpr int kWidth = 800;
constexpr int kHeight = 600;

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string open_svg(const std::string& title) {
    return fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
        "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
        "<text x=\"{2}\" y=\"30\" font-family=\"sans-serif\" font-size=\"18\" text-anchor=\"middle\">{3}</text>\n",
        kWidth, kHeight, kWidth / 2, xml_escape(title));
}

const char* close_svg() { return "</svg>\n"; }

// Round-number tick step covering `span` in about `target` steps.
double nice_step(double span, int target) {
    double raw = span / target;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double norm = raw / mag;
    double step = norm < 1.5 ? 1.0 : norm < 3.0 ? 2.0 : norm < 7.0 ? 5.0 : 10.0;
    return step * mag;
}

// Blue (-1) through white (0) to red (+1).
std::string diverging_color(double r) {
    r = std::clamp(r, -1.0, 1.0);
    int fade = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(r))));
    return r >= 0 ? fmt::format("rgb(255,{},{})", fade, fade) : fmt::format("rgb({},{},255)", fade, fade);
}

void write_svg(const std::filesystem::path& path, const std::string& svg) {
    try {
        csv::write_file(path, svg);
    } catch (const std::filesystem::filesystem_error& e) {
        throw IoError(e.what());
    }
}

}  // namespace

std::string scatter_svg(std::span<const double> y_true, std::span<const double> y_pred, const std::string& title) {
    if (y_true.size() != y_pred.size()) throw ShapeError("scatter: actual and predicted differ in length");
    if (y_true.empty()) throw ShapeError("scatter: nothing to plot");

    double hi = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) hi = std::max({hi, y_true[i], y_pred[i]});
    if (!(hi > 0.0)) hi = 1.0;
    double step = nice_step(hi, 5);
    hi = std::ceil(hi / step) * step;

    const double left = 80, right = kWidth - 40, top = 60, bottom = kHeight - 70;
    auto px = [&](double v) { return left + (right - left) * v / hi; };
    auto py = [&](double v) { return bottom - (bottom - top) * v / hi; };

    std::string svg = open_svg(title);
    svg += "<g id=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
    svg += fmt::format("<path d=\"M {:.2f} {:.2f} L {:.2f} {:.2f} L {:.2f} {:.2f}\" fill=\"none\"/>\n", left, top, left,
                       bottom, right, bottom);
    svg += "</g>\n<g id=\"ticks\" font-family=\"sans-serif\" font-size=\"12\">\n";
    for (double t = 0.0; t <= hi + step / 2; t += step) {
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{:g}</text>\n", px(t), bottom + 18, t);
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:g}</text>\n", left - 8, py(t) + 4, t);
    }
    svg += "</g>\n";
    svg += fmt::format(
        "<text x=\"{:.2f}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">Actual viewers "
        "(millions)</text>\n",
        (left + right) / 2, kHeight - 25);
    svg += fmt::format(
        "<text x=\"20\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" "
        "transform=\"rotate(-90 20 {:.2f})\">Predicted viewers (millions)</text>\n",
        (top + bottom) / 2, (top + bottom) / 2);
    svg += fmt::format(
        "<line class=\"ideal\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"red\" stroke-width=\"2\"/>\n",
        px(0), py(0), px(hi), py(hi));
    svg += "<g id=\"points\" fill=\"steelblue\" fill-opacity=\"0.8\">\n";
    for (std::size_t i = 0; i < y_true.size(); ++i)
        svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"5\"/>\n", px(y_true[i]), py(y_pred[i]));
    svg += "</g>\n";
    svg += close_svg();
    return svg;
}

std::string importance_svg(const GlobalImportance& importance, const std::string& title) {
    if (importance.order.empty()) throw ShapeError("importance chart: no features");
    const double left = 200, right = kWidth - 80, top = 60, bottom = kHeight - 50;
    double max_value = importance.mean_abs[importance.order.front()];
    if (!(max_value > 0.0)) max_value = 1.0;
    const double band = (bottom - top) / static_cast<double>(importance.order.size());
    const double bar = band * 0.7;

    std::string svg = open_svg(title);
    svg += "<g id=\"bars\" font-family=\"sans-serif\" font-size=\"12\">\n";
    for (std::size_t r = 0; r < importance.order.size(); ++r) {
        auto j = importance.order[r];
        double y = top + band * static_cast<double>(r) + (band - bar) / 2;
        double w = (right - left) * importance.mean_abs[j] / max_value;
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", left - 8, y + bar / 2 + 4,
                           xml_escape(importance.feature_names[j]));
        svg += fmt::format("<rect class=\"bar\" x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"#1f77b4\"/>\n",
                           left, y, w, bar);
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{:.4f}</text>\n", left + w + 6, y + bar / 2 + 4,
                           importance.mean_abs[j]);
    }
    svg += "</g>\n";
    svg += fmt::format(
        "<text x=\"{:.2f}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">mean |Shapley "
        "value| (log viewers)</text>\n",
        (left + right) / 2, kHeight - 15);
    svg += close_svg();
    return svg;
}

std::string heatmap_svg(const CorrelationMatrix& matrix, const std::string& title) {
    const std::size_t d = matrix.names.size();
    if (d == 0) throw ShapeError("heatmap: empty matrix");
    const double left = 190, top = 60, size = std::min(kWidth - left - 30.0, kHeight - top - 150.0);
    const double cell = size / static_cast<double>(d);

    std::string svg = open_svg(title);
    svg += "<g id=\"cells\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">\n";
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) {
            double x = left + cell * static_cast<double>(b);
            double y = top + cell * static_cast<double>(a);
            double r = matrix.r[a][b];
            svg += fmt::format(
                "<rect class=\"cell\" x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\" "
                "stroke=\"white\"/>\n",
                x, y, cell, cell, diverging_color(r));
            // Avoid printing "-0.00".
            double shown = std::abs(r) < 0.005 ? 0.0 : r;
            svg += fmt::format("<text class=\"value\" x=\"{:.2f}\" y=\"{:.2f}\">{:.2f}</text>\n", x + cell / 2,
                               y + cell / 2 + 4, shown);
        }
    }
    svg += "</g>\n<g id=\"labels\" font-family=\"sans-serif\" font-size=\"12\">\n";
    for (std::size_t a = 0; a < d; ++a) {
        double c = top + cell * static_cast<double>(a) + cell / 2 + 4;
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", left - 8, c,
                           xml_escape(matrix.names[a]));
        double x = left + cell * static_cast<double>(a) + cell / 2;
        double y = top + size + 12;
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\" transform=\"rotate(-40 {:.2f} {:.2f})\">{}</text>\n",
                           x, y, x, y, xml_escape(matrix.names[a]));
    }
    svg += "</g>\n";
    svg += close_svg();
    return svg;
}

void render_scatter(std::span<const double> y_true, std::span<const double> y_pred, const std::filesystem::path& path) {
    write_svg(path, scatter_svg(y_true, y_pred));
}

void render_importance(const GlobalImportance& importance, const std::filesystem::path& path) {
    write_svg(path, importance_svg(importance));
}

void render_heatmap(const CorrelationMatrix& matrix, const std::filesystem::path& path) {
    write_svg(path, heatmap_svg(matrix));
}

}  // namespace buzzcast
