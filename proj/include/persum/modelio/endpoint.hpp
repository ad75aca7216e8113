#pragma once

#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "persum/util/error.hpp"
#include "persum/util/io.hpp"

namespace persum::modelio {

struct SamplingParams {
    double temperature = 0.7;
    int max_tokens = 512;
    double top_p = 1.0;
};

/// A named chat-completion endpoint. `kind` is "openai" (an OpenAI-compatible
/// HTTP server) or "mock" (the seeded in-process mock).
struct ModelEndpoint {
    std::string name;
    std::string kind = "openai";
    std::string base_url;
    std::string model_id;
    SamplingParams params;
    std::string api_key_env; // name of the environment variable holding the key
    Json mock = Json::object();

    /// Same endpoint with a different temperature, e.g. judging at 0.
    ModelEndpoint with_temperature(double t) const {
        ModelEndpoint e = *this;
        e.params.temperature = t;
        return e;
    }
};

/// Endpoint speaking the external-scorer protocol.
struct ScorerEndpoint {
    std::string name;
    std::string kind = "http"; // "http" or "mock"
    std::string url;
    Json mock = Json::object();
};

inline Json to_json(const SamplingParams& p) {
    return Json{{"temperature", p.temperature}, {"max_tokens", p.max_tokens}, {"top_p", p.top_p}};
}

inline Json to_json(const ModelEndpoint& e) {
    Json j{{"name", e.name}, {"kind", e.kind}, {"base_url", e.base_url}, {"model_id", e.model_id},
           {"params", to_json(e.params)}, {"api_key_env", e.api_key_env}};
    if (!e.mock.empty()) j["mock"] = e.mock;
    return j;
}

inline ModelEndpoint endpoint_from_json(const Json& j) {
    const std::string where = "endpoint";
    ModelEndpoint e;
    e.name = require<std::string>(j, "name", where);
    e.kind = optional_field<std::string>(j, "kind", "openai");
    if (e.kind != "openai" && e.kind != "mock") throw ConfigError("endpoint '" + e.name + "': unknown kind '" + e.kind + "'");
    e.base_url = optional_field<std::string>(j, "base_url", "");
    e.model_id = optional_field<std::string>(j, "model_id", e.kind == "mock" ? "mock" : "");
    if (e.kind == "openai" && (e.base_url.empty() || e.model_id.empty())) {
        throw ConfigError("endpoint '" + e.name + "': base_url and model_id are required");
    }
    if (j.contains("params")) {
        const auto& p = j.at("params");
        e.params.temperature = optional_field<double>(p, "temperature", e.params.temperature);
        e.params.max_tokens = optional_field<int>(p, "max_tokens", e.params.max_tokens);
        e.params.top_p = optional_field<double>(p, "top_p", e.params.top_p);
    }
    if (e.params.temperature < 0.0) throw ConfigError("endpoint '" + e.name + "': temperature must be >= 0");
    e.api_key_env = optional_field<std::string>(j, "api_key_env", "");
    if (j.contains("mock")) e.mock = j.at("mock");
    return e;
}

inline ScorerEndpoint scorer_from_json(const Json& j) {
    ScorerEndpoint s;
    s.name = require<std::string>(j, "name", "scorer");
    s.kind = optional_field<std::string>(j, "kind", "http");
    if (s.kind != "http" && s.kind != "mock") throw ConfigError("scorer '" + s.name + "': unknown kind '" + s.kind + "'");
    s.url = optional_field<std::string>(j, "url", "");
    if (s.kind == "http" && s.url.empty()) throw ConfigError("scorer '" + s.name + "': url is required");
    if (j.contains("mock")) s.mock = j.at("mock");
    return s;
}

/// Named endpoints and scorers from the run configuration.
class EndpointRegistry {
  public:
    EndpointRegistry() = default;

    static EndpointRegistry from_json(const Json& cfg) {
        EndpointRegistry reg;
        if (cfg.contains("endpoints")) {
            for (const auto& j : cfg.at("endpoints")) reg.add(endpoint_from_json(j));
        }
        if (cfg.contains("scorers")) {
            for (const auto& j : cfg.at("scorers")) reg.add(scorer_from_json(j));
        }
        return reg;
    }

    void add(ModelEndpoint e) {
        if (models_.contains(e.name) || scorers_.contains(e.name)) throw ConfigError("duplicate endpoint name: " + e.name);
        auto name = e.name;
        models_.emplace(std::move(name), std::move(e));
    }
    void add(ScorerEndpoint s) {
        if (models_.contains(s.name) || scorers_.contains(s.name)) throw ConfigError("duplicate endpoint name: " + s.name);
        auto name = s.name;
        scorers_.emplace(std::move(name), std::move(s));
    }

    const ModelEndpoint& model(const std::string& name) const {
        auto it = models_.find(name);
        if (it == models_.end()) throw ConfigError("unknown model endpoint: " + name);
        return it->second;
    }
    const ScorerEndpoint& scorer(const std::string& name) const {
        auto it = scorers_.find(name);
        if (it == scorers_.end()) throw ConfigError("unknown scorer endpoint: " + name);
        return it->second;
    }
    bool has_model(const std::string& name) const { return models_.contains(name); }

  private:
    std::map<std::string, ModelEndpoint> models_;
    std::map<std::string, ScorerEndpoint> scorers_;
};

inline std::optional<std::string> api_key(const ModelEndpoint& e) {
    if (e.api_key_env.empty()) return std::nullopt;
    const char* v = std::getenv(e.api_key_env.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
}

} // namespace persum::modelio
