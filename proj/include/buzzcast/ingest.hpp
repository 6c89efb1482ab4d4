#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace buzzcast {

// Enumerators are declared in alphabetical order; one-hot columns rely on it.
enum class Sport { MLS_Cup, NBA_Finals, Stanley_Cup, Super_Bowl, World_Series };

inline constexpr std::array<Sport, 5> kAllSports = {
    Sport::MLS_Cup, Sport::NBA_Finals, Sport::Stanley_Cup, Sport::Super_Bowl, Sport::World_Series};

std::string_view to_string(Sport sport);
std::optional<Sport> parse_sport(std::string_view text);
// Human-readable title used in archive queries, e.g. "World Series".
std::string_view event_title_for(Sport sport);

struct EventSpec {
    std::string name;
    Sport sport = Sport::World_Series;
    int year = 0;
    std::vector<std::string> teams;
    std::int64_t start_time = 0;  // UTC epoch seconds
    std::string subreddit;
    std::string event_title;
};

// Throws ValidationError when start_time <= 0 or the title is empty.
void validate(const EventSpec& spec);

struct RawPost {
    std::string id;
    std::string title;
    std::string body;
    std::int64_t score = 0;
    std::int64_t num_comments = 0;
    std::int64_t created_utc = 0;
    std::string subreddit;

    friend bool operator==(const RawPost&, const RawPost&) = default;
};

struct LabeledEvent {
    EventSpec spec;
    double avg_viewers_millions = 0.0;
};

// Half-open interval [after, before) in UTC epoch seconds.
struct FetchWindow {
    std::int64_t after = 0;
    std::int64_t before = 0;

    static FetchWindow ending_at(std::int64_t start_time, int window_hours = 72);
    bool contains(std::int64_t t) const noexcept { return t >= after && t < before; }
};

// `"Title" OR "TEAM1" OR "TEAM2"`.
std::string build_query(const EventSpec& spec);

// Parses ISO-8601 "YYYY-MM-DDTHH:MM[:SS](Z|+HH:MM|-HH:MM)" into UTC epoch seconds.
std::int64_t parse_iso8601_utc(std::string_view text);
std::string format_iso8601_utc(std::int64_t epoch_seconds);

std::vector<LabeledEvent> load_viewership_csv(const std::filesystem::path& path);
std::vector<LabeledEvent> parse_viewership_csv(std::string_view content);

// Archive-response documents: {"data": [ {id, title, selftext, score, ...}, ... ]}.
// Several documents may follow each other, one per line.
std::vector<RawPost> decode_archive_response(std::string_view body);
std::string encode_archive_response(const std::vector<RawPost>& posts);
std::vector<RawPost> load_posts_fixture(const std::filesystem::path& path);
void write_posts_fixture(const std::filesystem::path& path, const std::vector<RawPost>& posts);

// One page request against a Pushshift-compatible search endpoint. The
// endpoint treats both `after` and `before` as exclusive bounds.
struct ArchiveQuery {
    std::string q;
    std::string subreddit;
    std::int64_t after = 0;
    std::int64_t before = 0;
    int size = 100;
};

// Raised by sources for failures worth retrying (connection errors, 429, 5xx).
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ArchiveSource {
public:
    virtual ~ArchiveSource() = default;
    // Posts strictly between after and before that match q and subreddit,
    // newest first, at most `size` of them.
    virtual std::vector<RawPost> search(const ArchiveQuery& query) = 0;
};

// In-memory emulation of the search endpoint over a fixture archive.
class FixtureArchive final : public ArchiveSource {
public:
    explicit FixtureArchive(std::vector<RawPost> posts);
    static FixtureArchive from_files(const std::vector<std::filesystem::path>& paths);

    std::vector<RawPost> search(const ArchiveQuery& query) override;
    const std::vector<RawPost>& posts() const noexcept { return posts_; }
    int requests_served() const noexcept { return requests_; }

private:
    std::vector<RawPost> posts_;
    int requests_ = 0;
};

// Case-insensitive: does the post's title or body contain any quoted query term?
bool matches_query(const RawPost& post, std::string_view query);

class HttpArchive final : public ArchiveSource {
public:
    // base_url such as "https://api.pullpush.io" or "http://127.0.0.1:8080".
    explicit HttpArchive(std::string base_url, std::chrono::seconds timeout = std::chrono::seconds(30));
    std::vector<RawPost> search(const ArchiveQuery& query) override;

    static constexpr std::string_view kDefaultBaseUrl = "https://api.pullpush.io";
    static constexpr std::string_view kSearchPath = "/reddit/search/submission/";
    // BUZZCAST_API_BASE if set, otherwise the default.
    static std::string base_url_from_env();

private:
    std::string base_url_;
    std::chrono::seconds timeout_;
};

// Token bucket shared between concurrent fetchers: at most `rate` acquisitions
// per second on average, bursts up to `burst`.
class RateLimiter {
public:
    explicit RateLimiter(double rate_per_second, double burst = 1.0);
    void acquire();

private:
    using Clock = std::chrono::steady_clock;
    std::mutex mutex_;
    double rate_;
    double burst_;
    double tokens_;
    Clock::time_point last_;
};

struct FetchOptions {
    int window_hours = 72;
    int page_size = 100;
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};
    std::chrono::milliseconds request_delay{1000};
    RateLimiter* limiter = nullptr;
};

struct FetchResult {
    std::vector<RawPost> posts;
    int pages = 0;
    int requests = 0;
};

// Collects every matching post in the window ending at spec.start_time,
// paging backwards by created_utc. Deduplicated by id, sorted ascending.
FetchResult fetch_window_detailed(const EventSpec& spec, ArchiveSource& source,
                                  const FetchOptions& options = {});
std::vector<RawPost> fetch_window(const EventSpec& spec, ArchiveSource& source,
                                  const FetchOptions& options = {});

}  // namespace buzzcast
