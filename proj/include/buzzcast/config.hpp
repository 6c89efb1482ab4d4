#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "buzzcast/preprocess.hpp"
#include "buzzcast/sentiment.hpp"

namespace buzzcast {

// Settings read from a TOML-style file:
//
//   [sentiment]  booster_increment, caps_boost, negation_window, negation_factor,
//                exclamation_increment, exclamation_cap, normalization_alpha
//   [preprocess] iqr_k, min_group_size, split_ratio
//   [model]      folds, threads, background_cap
//   [fetch]      window_hours, page_size, max_attempts, initial_backoff_ms,
//                request_delay_ms, rate_per_second, api_base
//
// Only flat `key = value` pairs are understood (numbers, booleans, quoted strings).
struct Config {
    RuleConfig sentiment;
    ScreenConfig screen;
    double split_ratio = 0.8;
    int folds = 5;
    unsigned threads = 1;
    std::size_t background_cap = 100;

    int window_hours = 72;
    int page_size = 100;
    int max_attempts = 3;
    int initial_backoff_ms = 1000;
    int request_delay_ms = 1000;
    double rate_per_second = 1.0;
    std::string api_base;
};

Config parse_config(std::string_view content);
Config load_config(const std::filesystem::path& path);

}  // namespace buzzcast
