#include "buzzcast/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <thread>
#include <unordered_set>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "buzzcast/csv.hpp"
#include "buzzcast/error.hpp"

namespace buzzcast {

using nlohmann::json;

std::string_view to_string(Sport sport) {
    switch (sport) {
        case Sport::MLS_Cup: return "MLS_Cup";
        case Sport::NBA_Finals: return "NBA_Finals";
        case Sport::Stanley_Cup: return "Stanley_Cup";
        case Sport::Super_Bowl: return "Super_Bowl";
        case Sport::World_Series: return "World_Series";
    }
    return "unknown";
}

std::optional<Sport> parse_sport(std::string_view text) {
    for (auto sport : kAllSports) {
        if (to_string(sport) == text) return sport;
    }
    return std::nullopt;
}

std::string_view event_title_for(Sport sport) {
    switch (sport) {
        case Sport::MLS_Cup: return "MLS Cup";
        case Sport::NBA_Finals: return "NBA Finals";
        case Sport::Stanley_Cup: return "Stanley Cup";
        case Sport::Super_Bowl: return "Super Bowl";
        case Sport::World_Series: return "World Series";
    }
    return "";
}

void validate(const EventSpec& spec) {
    if (spec.event_title.empty()) throw ValidationError("event '" + spec.name + "' has an empty event title");
    if (spec.start_time <= 0) throw ValidationError("event '" + spec.name + "' has a non-positive start time");
}

FetchWindow FetchWindow::ending_at(std::int64_t start_time, int window_hours) {
    if (window_hours <= 0) throw ValidationError("window_hours must be positive");
    return FetchWindow{start_time - static_cast<std::int64_t>(window_hours) * 3600, start_time};
}

std::string build_query(const EventSpec& spec) {
    if (spec.event_title.empty()) throw ValidationError("cannot build a query without an event title");
    std::string q = "\"" + spec.event_title + "\"";
    for (const auto& team : spec.teams) q += " OR \"" + team + "\"";
    return q;
}

// ---------------------------------------------------------------------------
// Timestamps
// ---------------------------------------------------------------------------

namespace {

int read_digits(std::string_view text, std::size_t& pos, std::size_t count) {
    if (pos + count > text.size()) throw ValidationError("truncated timestamp '" + std::string(text) + "'");
    int value = 0;
    for (std::size_t i = 0; i < count; ++i) {
        char c = text[pos + i];
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw ValidationError("bad timestamp '" + std::string(text) + "'");
        value = value * 10 + (c - '0');
    }
    pos += count;
    return value;
}

void expect_char(std::string_view text, std::size_t& pos, char c) {
    if (pos >= text.size() || text[pos] != c) throw ValidationError("bad timestamp '" + std::string(text) + "'");
    ++pos;
}

}  // namespace

std::int64_t parse_iso8601_utc(std::string_view text) {
    using namespace std::chrono;
    std::size_t pos = 0;
    int y = read_digits(text, pos, 4);
    expect_char(text, pos, '-');
    int mo = read_digits(text, pos, 2);
    expect_char(text, pos, '-');
    int d = read_digits(text, pos, 2);
    if (pos >= text.size() || (text[pos] != 'T' && text[pos] != ' '))
        throw ValidationError("timestamp '" + std::string(text) + "' lacks a time of day");
    ++pos;
    int hh = read_digits(text, pos, 2);
    expect_char(text, pos, ':');
    int mm = read_digits(text, pos, 2);
    int ss = 0;
    if (pos < text.size() && text[pos] == ':') {
        ++pos;
        ss = read_digits(text, pos, 2);
    }
    int offset_seconds = 0;
    if (pos >= text.size()) throw ValidationError("timestamp '" + std::string(text) + "' lacks a UTC offset");
    if (text[pos] == 'Z') {
        ++pos;
    } else if (text[pos] == '+' || text[pos] == '-') {
        int sign = text[pos] == '-' ? -1 : 1;
        ++pos;
        int oh = read_digits(text, pos, 2);
        if (pos < text.size() && text[pos] == ':') ++pos;
        int om = read_digits(text, pos, 2);
        offset_seconds = sign * (oh * 3600 + om * 60);
    } else {
        throw ValidationError("bad timestamp offset in '" + std::string(text) + "'");
    }
    if (pos != text.size()) throw ValidationError("trailing characters in timestamp '" + std::string(text) + "'");

    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60)
        throw ValidationError("invalid calendar time '" + std::string(text) + "'");
    auto days_since_epoch = sys_days{ymd}.time_since_epoch().count();
    return static_cast<std::int64_t>(days_since_epoch) * 86400 + hh * 3600 + mm * 60 + ss - offset_seconds;
}

std::string format_iso8601_utc(std::int64_t epoch_seconds) {
    using namespace std::chrono;
    auto days = static_cast<int>(epoch_seconds >= 0 ? epoch_seconds / 86400 : (epoch_seconds - 86399) / 86400);
    std::int64_t rem = epoch_seconds - static_cast<std::int64_t>(days) * 86400;
    year_month_day ymd{sys_days{std::chrono::days{days}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(rem / 3600), static_cast<int>((rem / 60) % 60), static_cast<int>(rem % 60));
    return buf;
}

// ---------------------------------------------------------------------------
// Viewership CSV
// ---------------------------------------------------------------------------

std::vector<LabeledEvent> parse_viewership_csv(std::string_view content) {
    static const std::vector<std::string_view> kColumns = {
        "name", "sport", "year", "teams", "start_time", "subreddit", "avg_viewers_millions"};
    auto records = csv::parse(content);
    if (records.empty()) throw SchemaError("name");
    csv::Header header(records.front(), kColumns);

    std::vector<LabeledEvent> events;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != records.front().fields.size())
            throw RowError(rec.line, "expected " + std::to_string(records.front().fields.size()) + " fields, got " +
                                         std::to_string(rec.fields.size()));
        auto field = [&](std::string_view col) -> const std::string& { return rec.fields[header[col]]; };

        LabeledEvent ev;
        ev.spec.name = field("name");
        auto sport = parse_sport(field("sport"));
        if (!sport) throw RowError(rec.line, "unknown sport '" + field("sport") + "'");
        ev.spec.sport = *sport;
        ev.spec.event_title = std::string(event_title_for(*sport));
        ev.spec.year = static_cast<int>(csv::parse_int(field("year"), rec.line, "year"));
        std::string_view teams = field("teams");
        while (!teams.empty()) {
            auto cut = teams.find(';');
            auto team = teams.substr(0, cut);
            while (!team.empty() && team.front() == ' ') team.remove_prefix(1);
            while (!team.empty() && team.back() == ' ') team.remove_suffix(1);
            if (!team.empty()) ev.spec.teams.emplace_back(team);
            if (cut == std::string_view::npos) break;
            teams.remove_prefix(cut + 1);
        }
        try {
            ev.spec.start_time = parse_iso8601_utc(field("start_time"));
        } catch (const ValidationError& e) {
            throw RowError(rec.line, e.what());
        }
        ev.spec.subreddit = field("subreddit");
        ev.avg_viewers_millions = csv::parse_double(field("avg_viewers_millions"), rec.line, "avg_viewers_millions");
        if (ev.avg_viewers_millions < 0) throw RowError(rec.line, "avg_viewers_millions must be non-negative");
        try {
            validate(ev.spec);
        } catch (const ValidationError& e) {
            throw RowError(rec.line, e.what());
        }
        events.push_back(std::move(ev));
    }
    return events;
}

std::vector<LabeledEvent> load_viewership_csv(const std::filesystem::path& path) {
    return parse_viewership_csv(csv::read_file(path));
}

// ---------------------------------------------------------------------------
// Archive response documents
// ---------------------------------------------------------------------------

namespace {

std::int64_t integral_field(const json& rec, const char* key, std::size_t index) {
    if (!rec.contains(key)) throw DecodeError(index, std::string("missing field '") + key + "'");
    const auto& v = rec.at(key);
    if (v.is_number_integer()) return v.get<std::int64_t>();
    // Some archive snapshots store created_utc as a float.
    if (v.is_number_float()) return static_cast<std::int64_t>(v.get<double>());
    if (v.is_string()) {
        try {
            std::size_t used = 0;
            auto s = v.get<std::string>();
            auto parsed = std::stoll(s, &used);
            if (used == s.size()) return parsed;
        } catch (const std::exception&) {
        }
    }
    throw DecodeError(index, std::string("field '") + key + "' is not an integer");
}

std::string text_field(const json& rec, const char* key, std::size_t index, bool required) {
    if (!rec.contains(key) || rec.at(key).is_null()) {
        if (required) throw DecodeError(index, std::string("missing field '") + key + "'");
        return {};
    }
    const auto& v = rec.at(key);
    if (!v.is_string()) throw DecodeError(index, std::string("field '") + key + "' is not text");
    return v.get<std::string>();
}

RawPost decode_record(const json& rec, std::size_t index) {
    if (!rec.is_object()) throw DecodeError(index, "record is not an object");
    RawPost post;
    if (rec.contains("id") && rec.at("id").is_number_integer()) {
        post.id = std::to_string(rec.at("id").get<std::int64_t>());
    } else {
        post.id = text_field(rec, "id", index, true);
    }
    if (post.id.empty()) throw DecodeError(index, "empty id");
    post.title = text_field(rec, "title", index, true);
    post.body = text_field(rec, "selftext", index, false);
    post.score = integral_field(rec, "score", index);
    post.num_comments = integral_field(rec, "num_comments", index);
    if (post.num_comments < 0) throw DecodeError(index, "negative num_comments");
    post.created_utc = integral_field(rec, "created_utc", index);
    post.subreddit = text_field(rec, "subreddit", index, true);
    return post;
}

void decode_document(const json& doc, std::vector<RawPost>& out) {
    if (!doc.is_object() || !doc.contains("data") || !doc.at("data").is_array())
        throw DecodeError(out.size(), "response has no 'data' array");
    for (const auto& rec : doc.at("data")) out.push_back(decode_record(rec, out.size()));
}

}  // namespace

std::vector<RawPost> decode_archive_response(std::string_view body) {
    std::vector<RawPost> posts;
    auto whole = json::parse(body, nullptr, false);
    if (!whole.is_discarded()) {
        decode_document(whole, posts);
        return posts;
    }
    // Newline-delimited pages.
    std::size_t start = 0;
    while (start < body.size()) {
        auto end = body.find('\n', start);
        if (end == std::string_view::npos) end = body.size();
        auto line = body.substr(start, end - start);
        start = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        auto doc = json::parse(line, nullptr, false);
        if (doc.is_discarded()) throw DecodeError(posts.size(), "response is not valid JSON");
        decode_document(doc, posts);
    }
    return posts;
}

std::string encode_archive_response(const std::vector<RawPost>& posts) {
    json data = json::array();
    for (const auto& p : posts) {
        data.push_back({{"id", p.id},
                        {"title", p.title},
                        {"selftext", p.body},
                        {"score", p.score},
                        {"num_comments", p.num_comments},
                        {"created_utc", p.created_utc},
                        {"subreddit", p.subreddit}});
    }
    return json{{"data", std::move(data)}}.dump(1) + "\n";
}

std::vector<RawPost> load_posts_fixture(const std::filesystem::path& path) {
    return decode_archive_response(csv::read_file(path));
}

void write_posts_fixture(const std::filesystem::path& path, const std::vector<RawPost>& posts) {
    csv::write_file(path, encode_archive_response(posts));
}

// ---------------------------------------------------------------------------
// Fixture archive
// ---------------------------------------------------------------------------

namespace {

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::vector<std::string> query_terms(std::string_view query) {
    std::vector<std::string> terms;
    std::size_t pos = 0;
    while ((pos = query.find('"', pos)) != std::string_view::npos) {
        auto end = query.find('"', pos + 1);
        if (end == std::string_view::npos) break;
        terms.push_back(ascii_lower(query.substr(pos + 1, end - pos - 1)));
        pos = end + 1;
    }
    if (terms.empty() && !query.empty()) terms.push_back(ascii_lower(query));
    return terms;
}

}  // namespace

bool matches_query(const RawPost& post, std::string_view query) {
    auto terms = query_terms(query);
    if (terms.empty()) return true;
    auto title = ascii_lower(post.title);
    auto body = ascii_lower(post.body);
    return std::any_of(terms.begin(), terms.end(), [&](const std::string& t) {
        return title.find(t) != std::string::npos || body.find(t) != std::string::npos;
    });
}

FixtureArchive::FixtureArchive(std::vector<RawPost> posts) : posts_(std::move(posts)) {}

FixtureArchive FixtureArchive::from_files(const std::vector<std::filesystem::path>& paths) {
    std::vector<RawPost> all;
    for (const auto& p : paths) {
        auto posts = load_posts_fixture(p);
        all.insert(all.end(), std::make_move_iterator(posts.begin()), std::make_move_iterator(posts.end()));
    }
    return FixtureArchive(std::move(all));
}

std::vector<RawPost> FixtureArchive::search(const ArchiveQuery& query) {
    ++requests_;
    std::vector<RawPost> hits;
    for (const auto& p : posts_) {
        if (p.created_utc <= query.after || p.created_utc >= query.before) continue;
        if (!query.subreddit.empty() && ascii_lower(p.subreddit) != ascii_lower(query.subreddit)) continue;
        if (!matches_query(p, query.q)) continue;
        hits.push_back(p);
    }
    std::stable_sort(hits.begin(), hits.end(),
                     [](const RawPost& a, const RawPost& b) { return a.created_utc > b.created_utc; });
    if (hits.size() > static_cast<std::size_t>(query.size)) hits.resize(static_cast<std::size_t>(query.size));
    return hits;
}

// ---------------------------------------------------------------------------
// Rate limiting and paging
// ---------------------------------------------------------------------------

RateLimiter::RateLimiter(double rate_per_second, double burst)
    : rate_(rate_per_second), burst_(burst), tokens_(burst), last_(Clock::now()) {
    if (!(rate_per_second > 0.0) || !(burst >= 1.0)) throw ValidationError("rate limiter needs rate > 0 and burst >= 1");
}

void RateLimiter::acquire() {
    std::unique_lock lock(mutex_);
    for (;;) {
        auto now = Clock::now();
        std::chrono::duration<double> elapsed = now - last_;
        tokens_ = std::min(burst_, tokens_ + elapsed.count() * rate_);
        last_ = now;
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return;
        }
        auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
        // Sleeping with the lock held keeps waiters in arrival order.
        std::this_thread::sleep_for(wait);
    }
}

namespace {

std::vector<RawPost> search_with_retry(ArchiveSource& source, const ArchiveQuery& query, const FetchOptions& options,
                                       int& requests) {
    auto backoff = options.initial_backoff;
    for (int attempt = 1;; ++attempt) {
        if (options.limiter) options.limiter->acquire();
        ++requests;
        try {
            return source.search(query);
        } catch (const TransportError& e) {
            if (attempt >= options.max_attempts) throw FetchError(attempt, e.what());
            spdlog::warn("archive request failed ({}), retrying in {} ms", e.what(), backoff.count());
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
}

}  // namespace

FetchResult fetch_window_detailed(const EventSpec& spec, ArchiveSource& source, const FetchOptions& options) {
    validate(spec);
    if (options.page_size <= 0) throw ValidationError("page_size must be positive");
    if (options.max_attempts <= 0) throw ValidationError("max_attempts must be positive");
    auto window = FetchWindow::ending_at(spec.start_time, options.window_hours);

    ArchiveQuery query;
    query.q = build_query(spec);
    query.subreddit = spec.subreddit;
    query.after = window.after - 1;  // endpoint bounds are exclusive
    query.before = window.before;
    query.size = options.page_size;

    FetchResult result;
    std::unordered_set<std::string> seen;
    for (;;) {
        if (result.requests > 0 && options.request_delay.count() > 0) std::this_thread::sleep_for(options.request_delay);
        auto page = search_with_retry(source, query, options, result.requests);
        ++result.pages;
        std::int64_t oldest = query.before;
        for (auto& post : page) {
            oldest = std::min(oldest, post.created_utc);
            if (!window.contains(post.created_utc)) continue;
            // Archive subreddit matching is case-insensitive.
            if (!query.subreddit.empty() && ascii_lower(post.subreddit) != ascii_lower(query.subreddit)) continue;
            if (seen.insert(post.id).second) result.posts.push_back(std::move(post));
        }
        if (static_cast<int>(page.size()) < options.page_size) break;
        // Re-request the boundary second so posts sharing the oldest timestamp
        // are not lost; duplicates are removed by id.
        std::int64_t next_before = oldest + 1;
        if (next_before >= query.before) {
            spdlog::warn("more than {} posts share created_utc {} for '{}'; remaining ties skipped",
                         options.page_size, oldest, spec.name);
            next_before = oldest;
        }
        if (next_before <= window.after) break;
        query.before = next_before;
    }
    std::stable_sort(result.posts.begin(), result.posts.end(), [](const RawPost& a, const RawPost& b) {
        return a.created_utc != b.created_utc ? a.created_utc < b.created_utc : a.id < b.id;
    });
    return result;
}

std::vector<RawPost> fetch_window(const EventSpec& spec, ArchiveSource& source, const FetchOptions& options) {
    return fetch_window_detailed(spec, source, options).posts;
}

}  // namespace buzzcast
