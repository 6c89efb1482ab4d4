#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "buzzcast/error.hpp"
#include "buzzcast/ingest.hpp"

using namespace buzzcast;

namespace {

// Pushshift-style endpoint over an in-memory post list, capped at 100 per page.
class LocalArchiveServer {
public:
    explicit LocalArchiveServer(std::vector<RawPost> posts) : archive_(std::move(posts)) {
        server_.Get(std::string(HttpArchive::kSearchPath), [this](const httplib::Request& req, httplib::Response& res) {
            int n = ++requests;
            if (n <= fail_first) {
                res.status = 503;
                return;
            }
            if (status_override) {
                res.status = status_override;
                return;
            }
            ArchiveQuery q;
            q.q = req.get_param_value("q");
            q.subreddit = req.get_param_value("subreddit");
            q.after = std::stoll(req.get_param_value("after"));
            q.before = std::stoll(req.get_param_value("before"));
            q.size = std::min(100, std::stoi(req.get_param_value("size")));
            std::lock_guard lock(mutex_);
            res.set_content(encode_archive_response(archive_.search(q)), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~LocalArchiveServer() {
        server_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

    std::atomic<int> requests{0};
    std::atomic<int> fail_first{0};
    std::atomic<int> status_override{0};

private:
    httplib::Server server_;
    FixtureArchive archive_;
    std::mutex mutex_;
    int port_ = 0;
    std::thread thread_;
};

EventSpec super_bowl() {
    EventSpec s;
    s.name = "SB XLVIII";
    s.sport = Sport::Super_Bowl;
    s.year = 2014;
    s.teams = {"SEA", "DEN"};
    s.start_time = 1391383800;
    s.subreddit = "nfl";
    s.event_title = "Super Bowl";
    return s;
}

std::vector<RawPost> many_posts(std::int64_t start) {
    std::vector<RawPost> posts;
    for (int i = 0; i < 160; ++i) {
        RawPost p;
        p.id = "p" + std::to_string(i);
        p.title = (i % 2) ? "Super Bowl thread" : "SEA defense";
        p.score = i - 5;
        p.num_comments = i;
        p.created_utc = start - 1 - i * 60;
        p.subreddit = "nfl";
        posts.push_back(p);
    }
    // The 100th and 101st newest share a second.
    posts[100].created_utc = posts[99].created_utc;
    RawPost off;
    off.id = "off";
    off.title = "Super Bowl";
    off.created_utc = start - 100;
    off.subreddit = "sports";
    posts.push_back(off);
    return posts;
}

FetchOptions quick() {
    FetchOptions o;
    o.initial_backoff = std::chrono::milliseconds(1);
    o.request_delay = std::chrono::milliseconds(0);
    return o;
}

}  // namespace

TEST(HttpArchive, PagesThroughLocalServer) {
    auto spec = super_bowl();
    LocalArchiveServer server(many_posts(spec.start_time));
    HttpArchive source(server.url() + "/");
    auto result = fetch_window_detailed(spec, source, quick());
    ASSERT_EQ(result.posts.size(), 160u);
    EXPECT_EQ(result.pages, 2);
    for (std::size_t i = 1; i < result.posts.size(); ++i)
        EXPECT_LE(result.posts[i - 1].created_utc, result.posts[i].created_utc);
    std::int64_t comments = 0;
    for (const auto& p : result.posts) comments += p.num_comments;
    EXPECT_EQ(comments, 159 * 160 / 2);
}

TEST(HttpArchive, RetriesServerErrors) {
    auto spec = super_bowl();
    LocalArchiveServer server(many_posts(spec.start_time));
    server.fail_first = 2;
    HttpArchive source(server.url());
    auto result = fetch_window_detailed(spec, source, quick());
    EXPECT_EQ(result.posts.size(), 160u);
    EXPECT_EQ(result.requests, 4);
}

TEST(HttpArchive, ExhaustedRetriesRaiseFetchError) {
    LocalArchiveServer server({});
    server.fail_first = 1000;
    HttpArchive source(server.url());
    try {
        fetch_window(super_bowl(), source, quick());
        FAIL() << "expected FetchError";
    } catch (const FetchError& e) {
        EXPECT_EQ(e.attempts(), 3);
    }
    EXPECT_EQ(server.requests.load(), 3);
}

TEST(HttpArchive, ClientErrorsAreNotRetried) {
    LocalArchiveServer server({});
    server.status_override = 404;
    HttpArchive source(server.url());
    EXPECT_THROW(fetch_window(super_bowl(), source, quick()), FetchError);
    EXPECT_EQ(server.requests.load(), 1);
}

TEST(HttpArchive, UnreachableHostIsTransportError) {
    HttpArchive source("http://127.0.0.1:1", std::chrono::seconds(1));
    EXPECT_THROW(source.search(ArchiveQuery{"\"x\"", "", 0, 10, 10}), TransportError);
}

TEST(HttpArchive, BaseUrlFromEnvironment) {
    ::setenv("BUZZCAST_API_BASE", "http://example.invalid", 1);
    EXPECT_EQ(HttpArchive::base_url_from_env(), "http://example.invalid");
    ::unsetenv("BUZZCAST_API_BASE");
    EXPECT_EQ(HttpArchive::base_url_from_env(), HttpArchive::kDefaultBaseUrl);
    EXPECT_THROW(HttpArchive(""), ValidationError);
}
