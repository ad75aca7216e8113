#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include "persum/modelio/endpoint.hpp"
#include "persum/modelio/http.hpp"

namespace persum::modelio {

/// A neural metric reached over the external-scorer protocol:
/// request {context, claim} -> response {score in [0,1]}.
class ExternalScorer {
  public:
    virtual ~ExternalScorer() = default;
    /// Raw scalar as returned by the scorer; range checked, never clamped.
    virtual double raw_score(std::string_view context, std::string_view claim) = 0;
};

inline double checked_score(double s, std::string_view who) {
    if (!(s >= 0.0 && s <= 1.0)) {
        throw ProtocolError("scorer '" + std::string(who) + "' returned out-of-range score " + std::to_string(s));
    }
    return s;
}

class HttpExternalScorer final : public ExternalScorer {
  public:
    explicit HttpExternalScorer(ScorerEndpoint ep, int timeout_s = 120) : ep_(std::move(ep)), timeout_s_(timeout_s) {}

    double raw_score(std::string_view context, std::string_view claim) override {
        Json body{{"context", context}, {"claim", claim}};
        auto res = http_detail::post_json(ep_.url, "", body, {}, timeout_s_);
        Json reply;
        try {
            reply = Json::parse(res->body);
        } catch (const Json::parse_error&) {
            throw ProtocolError("scorer '" + ep_.name + "' replied with non-JSON body");
        }
        if (!reply.is_object() || !reply.contains("score") || !reply.at("score").is_number()) {
            throw ProtocolError("scorer '" + ep_.name + "' reply lacks a numeric 'score'");
        }
        return reply.at("score").get<double>();
    }

  private:
    ScorerEndpoint ep_;
    int timeout_s_;
};

class FunctionScorer final : public ExternalScorer {
  public:
    using Fn = std::function<double(std::string_view, std::string_view)>;
    explicit FunctionScorer(Fn fn) : fn_(std::move(fn)) {}
    double raw_score(std::string_view context, std::string_view claim) override { return fn_(context, claim); }

  private:
    Fn fn_;
};

/// Mock scorer modes: "constant" (mock.value), "exact_match" (1 when
/// context == claim else 0), "containment" (1 when claim occurs in context).
inline std::unique_ptr<ExternalScorer> make_mock_scorer(const ScorerEndpoint& ep) {
    auto mode = optional_field<std::string>(ep.mock, "mode", "containment");
    if (mode == "constant") {
        double v = optional_field<double>(ep.mock, "value", 0.5);
        return std::make_unique<FunctionScorer>([v](std::string_view, std::string_view) { return v; });
    }
    if (mode == "exact_match") {
        return std::make_unique<FunctionScorer>([](std::string_view c, std::string_view k) { return c == k ? 1.0 : 0.0; });
    }
    if (mode == "containment") {
        return std::make_unique<FunctionScorer>(
            [](std::string_view c, std::string_view k) { return c.find(k) != std::string_view::npos ? 1.0 : 0.0; });
    }
    throw ConfigError("mock scorer '" + ep.name + "': unknown mode '" + mode + "'");
}

inline std::unique_ptr<ExternalScorer> make_scorer(const ScorerEndpoint& ep) {
    if (ep.kind == "mock") return make_mock_scorer(ep);
    return std::make_unique<HttpExternalScorer>(ep);
}

/// Scalar in [0,1] from `scorer`; out-of-range replies are protocol errors.
inline double external_score(ExternalScorer& scorer, std::string_view context, std::string_view claim,
                             std::string_view name = "external") {
    return checked_score(scorer.raw_score(context, claim), name);
}

} // namespace persum::modelio
