#include "buzzcast/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>

#include "buzzcast/csv.hpp"
#include "buzzcast/error.hpp"

namespace buzzcast {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Drops a trailing '#' comment that is not inside a quoted string.
std::string_view strip_comment(std::string_view s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') quoted = !quoted;
        if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

double as_number(std::string_view v, std::size_t line, const std::string& key) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out))
        throw RowError(line, "'" + key + "' needs a number, got '" + std::string(v) + "'");
    return out;
}

int as_int(std::string_view v, std::size_t line, const std::string& key) {
    double d = as_number(v, line, key);
    if (d != std::floor(d)) throw RowError(line, "'" + key + "' needs an integer");
    return static_cast<int>(d);
}

std::string as_string(std::string_view v, std::size_t line, const std::string& key) {
    if (v.size() < 2 || v.front() != '"' || v.back() != '"') throw RowError(line, "'" + key + "' needs a quoted string");
    return std::string(v.substr(1, v.size() - 2));
}

}  // namespace

Config parse_config(std::string_view content) {
    Config c;
    using Setter = std::function<void(std::string_view, std::size_t, const std::string&)>;
    const std::map<std::string, Setter> setters = {
        {"sentiment.booster_increment", [&](auto v, auto l, auto& k) { c.sentiment.booster_increment = as_number(v, l, k); }},
        {"sentiment.caps_boost", [&](auto v, auto l, auto& k) { c.sentiment.caps_boost = as_number(v, l, k); }},
        {"sentiment.negation_window", [&](auto v, auto l, auto& k) { c.sentiment.negation_window = as_int(v, l, k); }},
        {"sentiment.negation_factor", [&](auto v, auto l, auto& k) { c.sentiment.negation_factor = as_number(v, l, k); }},
        {"sentiment.exclamation_increment",
         [&](auto v, auto l, auto& k) { c.sentiment.exclamation_increment = as_number(v, l, k); }},
        {"sentiment.exclamation_cap", [&](auto v, auto l, auto& k) { c.sentiment.exclamation_cap = as_int(v, l, k); }},
        {"sentiment.normalization_alpha",
         [&](auto v, auto l, auto& k) { c.sentiment.normalization_alpha = as_number(v, l, k); }},
        {"preprocess.iqr_k", [&](auto v, auto l, auto& k) { c.screen.k = as_number(v, l, k); }},
        {"preprocess.min_group_size",
         [&](auto v, auto l, auto& k) { c.screen.min_group_size = static_cast<std::size_t>(as_int(v, l, k)); }},
        {"preprocess.split_ratio", [&](auto v, auto l, auto& k) { c.split_ratio = as_number(v, l, k); }},
        {"model.folds", [&](auto v, auto l, auto& k) { c.folds = as_int(v, l, k); }},
        {"model.threads", [&](auto v, auto l, auto& k) { c.threads = static_cast<unsigned>(as_int(v, l, k)); }},
        {"model.background_cap",
         [&](auto v, auto l, auto& k) { c.background_cap = static_cast<std::size_t>(as_int(v, l, k)); }},
        {"fetch.window_hours", [&](auto v, auto l, auto& k) { c.window_hours = as_int(v, l, k); }},
        {"fetch.page_size", [&](auto v, auto l, auto& k) { c.page_size = as_int(v, l, k); }},
        {"fetch.max_attempts", [&](auto v, auto l, auto& k) { c.max_attempts = as_int(v, l, k); }},
        {"fetch.initial_backoff_ms", [&](auto v, auto l, auto& k) { c.initial_backoff_ms = as_int(v, l, k); }},
        {"fetch.request_delay_ms", [&](auto v, auto l, auto& k) { c.request_delay_ms = as_int(v, l, k); }},
        {"fetch.rate_per_second", [&](auto v, auto l, auto& k) { c.rate_per_second = as_number(v, l, k); }},
        {"fetch.api_base", [&](auto v, auto l, auto& k) { c.api_base = as_string(v, l, k); }},
    };

    std::string section;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < content.size()) {
        auto end = content.find('\n', start);
        if (end == std::string_view::npos) end = content.size();
        auto line = trim(strip_comment(content.substr(start, end - start)));
        start = end + 1;
        ++line_no;
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw RowError(line_no, "unterminated section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos) throw RowError(line_no, "expected key = value");
        auto key = section + "." + std::string(trim(line.substr(0, eq)));
        auto it = setters.find(key);
        if (it == setters.end()) throw RowError(line_no, "unknown setting '" + key + "'");
        it->second(trim(line.substr(eq + 1)), line_no, key);
    }
    c.sentiment.validate();
    if (c.folds < 2) throw ValidationError("model.folds must be at least 2");
    if (c.window_hours <= 0) throw ValidationError("fetch.window_hours must be positive");
    return c;
}

Config load_config(const std::filesystem::path& path) { return parse_config(csv::read_file(path)); }

}  // namespace buzzcast
