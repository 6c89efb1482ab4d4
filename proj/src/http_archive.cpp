#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>

#include "buzzcast/error.hpp"
#include "buzzcast/ingest.hpp"

namespace buzzcast {

HttpArchive::HttpArchive(std::string base_url, std::chrono::seconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
    if (base_url_.empty()) throw ValidationError("archive base URL is empty");
}

std::string HttpArchive::base_url_from_env() {
    if (const char* env = std::getenv("BUZZCAST_API_BASE"); env && *env) return env;
    return std::string(kDefaultBaseUrl);
}

std::vector<RawPost> HttpArchive::search(const ArchiveQuery& query) {
    httplib::Client client(base_url_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_follow_location(true);

    httplib::Params params{
        {"q", query.q},
        {"after", std::to_string(query.after)},
        {"before", std::to_string(query.before)},
        {"size", std::to_string(query.size)},
        {"sort", "desc"},
        {"sort_type", "created_utc"},
    };
    if (!query.subreddit.empty()) params.emplace("subreddit", query.subreddit);

    auto res = client.Get(std::string(kSearchPath), params, httplib::Headers{{"User-Agent", "buzzcast/1.0"}});
    if (!res) throw TransportError("GET " + base_url_ + " failed: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500)
        throw TransportError("GET " + base_url_ + " returned HTTP " + std::to_string(res->status));
    if (res->status != 200)
        throw FetchError(1, "GET " + base_url_ + " returned HTTP " + std::to_string(res->status));
    return decode_archive_response(res->body);
}

}  // namespace buzzcast
