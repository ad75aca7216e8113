#pragma once

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <memory>
#include <string>
#include <string_view>

#include "persum/modelio/client.hpp"
#include "persum/util/error.hpp"
#include "persum/util/io.hpp"

namespace persum::modelio {

struct ParsedUrl {
    std::string origin; // scheme://host[:port]
    std::string path;   // without trailing slash
};

inline ParsedUrl parse_url(std::string_view url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) throw ConfigError("URL needs a scheme: " + std::string(url));
    auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw ConfigError("unsupported URL scheme: " + std::string(url));
    auto path_start = url.find('/', scheme_end + 3);
    ParsedUrl p;
    p.origin = std::string(url.substr(0, path_start));
    p.path = path_start == std::string_view::npos ? "" : std::string(url.substr(path_start));
    while (!p.path.empty() && p.path.back() == '/') p.path.pop_back();
    return p;
}

namespace http_detail {

/// 5xx, 408, 429 and connection failures are transient; other statuses are
/// protocol errors.
inline httplib::Result post_json(const std::string& url, const std::string& suffix, const Json& body,
                                 const httplib::Headers& headers, int timeout_s) {
    auto u = parse_url(url);
    httplib::Client cli(u.origin);
    cli.set_connection_timeout(timeout_s, 0);
    cli.set_read_timeout(timeout_s, 0);
    auto res = cli.Post(u.path + suffix, headers, body.dump(), "application/json");
    if (!res) throw TransportError("request to " + url + " failed: " + httplib::to_string(res.error()));
    if (res->status >= 500 || res->status == 408 || res->status == 429) {
        throw TransportError("request to " + url + " returned HTTP " + std::to_string(res->status));
    }
    if (res->status < 200 || res->status >= 300) {
        throw ProtocolError("request to " + url + " returned HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    return res;
}

} // namespace http_detail

/// OpenAI-compatible chat completions: POST {base_url}/chat/completions.
class HttpChatClient final : public ModelClient {
  public:
    explicit HttpChatClient(int timeout_s = 120) : timeout_s_(timeout_s) {}

    std::string complete(const ModelEndpoint& endpoint, std::string_view prompt, std::uint32_t sample_index) override {
        Json body{{"model", endpoint.model_id},
                  {"messages", Json::array({Json{{"role", "user"}, {"content", prompt}}})},
                  {"temperature", endpoint.params.temperature},
                  {"max_tokens", endpoint.params.max_tokens},
                  {"top_p", endpoint.params.top_p},
                  {"seed", sample_index}};
        httplib::Headers headers;
        if (auto key = api_key(endpoint)) headers.emplace("Authorization", "Bearer " + *key);
        auto res = http_detail::post_json(endpoint.base_url, "/chat/completions", body, headers, timeout_s_);
        Json reply;
        try {
            reply = Json::parse(res->body);
        } catch (const Json::parse_error&) {
            throw ProtocolError("endpoint '" + endpoint.name + "' replied with non-JSON body");
        }
        try {
            return reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const Json::exception&) {
            throw ProtocolError("endpoint '" + endpoint.name + "' reply lacks choices[0].message.content");
        }
    }

  private:
    int timeout_s_;
};

} // namespace persum::modelio
