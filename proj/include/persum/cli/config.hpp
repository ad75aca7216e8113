#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "persum/modelio/client.hpp"
#include "persum/modelio/endpoint.hpp"
#include "persum/modelio/http.hpp"
#include "persum/modelio/mock.hpp"
#include "persum/modelio/prompts.hpp"
#include "persum/textmetrics/tokenize.hpp"
#include "persum/util/digest.hpp"
#include "persum/util/io.hpp"

namespace persum::cli {

inline constexpr const char* kToolName = "persum";
inline constexpr int kFormatVersion = 1;

/// Fills defaults into a user config so that the header records every value
/// the run depended on.
///
///   {"seed": 0, "jobs": 1, "max_in_flight": 8, "cache_dir": "",
///    "retry": {"attempts": 3, "backoff_ms": 1000},
///    "endpoints": [...], "scorers": [...], "metrics": [...],
///    "generator_endpoint": "", "judge_endpoint": ""}
inline Json effective_config(Json cfg) {
    if (cfg.is_null()) cfg = Json::object();
    if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
    auto dflt = [&](const char* key, Json v) {
        if (!cfg.contains(key)) cfg[key] = std::move(v);
    };
    dflt("seed", 0);
    dflt("jobs", 1);
    dflt("max_in_flight", 8);
    dflt("cache_dir", "");
    dflt("retry", Json{{"attempts", 3}, {"backoff_ms", 1000}});
    dflt("endpoints", Json::array());
    dflt("scorers", Json::array());
    dflt("metrics", Json::array());
    dflt("generator_endpoint", "");
    dflt("judge_endpoint", "");
    if (!cfg["seed"].is_number_unsigned() && !(cfg["seed"].is_number_integer() && cfg["seed"].get<long long>() >= 0))
        throw ConfigError("seed must be a non-negative integer");
    if (!cfg["jobs"].is_number_integer() || cfg["jobs"].get<long long>() < 1) throw ConfigError("jobs must be >= 1");
    if (!cfg["max_in_flight"].is_number_integer() || cfg["max_in_flight"].get<long long>() < 1)
        throw ConfigError("max_in_flight must be >= 1");
    auto& retry = cfg["retry"];
    if (!retry.contains("attempts")) retry["attempts"] = 3;
    if (!retry.contains("backoff_ms")) retry["backoff_ms"] = 1000;
    modelio::EndpointRegistry::from_json(cfg); // validates endpoint entries
    return cfg;
}

inline std::uint64_t config_seed(const Json& cfg) { return cfg.at("seed").get<std::uint64_t>(); }
inline std::size_t config_jobs(const Json& cfg) { return cfg.at("jobs").get<std::size_t>(); }

inline std::string config_digest(const Json& cfg) { return sha256_hex(cfg.dump()); }

/// Model client stack for a config: per-kind transport, retry with backoff,
/// a global in-flight bound, and the on-disk cache when cache_dir is set.
inline std::shared_ptr<modelio::ModelClient> make_client(const Json& cfg) {
    auto routes = std::make_shared<modelio::RoutingClient>();
    routes->route("mock", std::make_shared<modelio::MockClient>(config_seed(cfg)));
    routes->route("openai", std::make_shared<modelio::HttpChatClient>());
    modelio::RetryPolicy policy;
    policy.attempts = cfg.at("retry").at("attempts").get<int>();
    policy.base_backoff = std::chrono::milliseconds(cfg.at("retry").at("backoff_ms").get<long long>());
    std::shared_ptr<modelio::ModelClient> client = std::make_shared<modelio::RetryingClient>(routes, policy);
    client = std::make_shared<modelio::BoundedClient>(client, cfg.at("max_in_flight").get<std::ptrdiff_t>());
    auto cache_dir = cfg.at("cache_dir").get<std::string>();
    if (!cache_dir.empty()) client = std::make_shared<modelio::CachingClient>(client, cache_dir);
    return client;
}

/// Run header: everything needed to reproduce an output, and nothing that
/// varies between identical runs (no timestamps, no output paths).
inline Json make_header(const std::string& command, const Json& cfg, const Json& params, const Json& input_digests) {
    Json prompts = Json::object();
    for (const auto& [id, d] : modelio::PromptRegistry::builtin().digests()) prompts[id] = d;
    return Json{{"tool", kToolName},
                {"format", kFormatVersion},
                {"command", command},
                {"params", params},
                {"inputs", input_digests},
                {"seed", config_seed(cfg)},
                {"tokenizer", std::string(textmetrics::kTokenizerTag)},
                {"prompt_digests", prompts},
                {"config_digest", config_digest(cfg)},
                {"config", cfg}};
}

/// Reads the header of a file written by this tool: the first JSONL line
/// {"header": ...} or the "header" member of a JSON document.
inline Json read_header(const std::filesystem::path& path) {
    auto text = read_file(path);
    auto nl = text.find('\n');
    Json first;
    try {
        first = Json::parse(nl == std::string::npos ? text : text.substr(0, nl));
    } catch (const Json::parse_error&) {
        first = parse_json(text, path.string());
    }
    if (!first.is_object() || !first.contains("header")) throw ParseError(path.string() + ": no run header");
    return first.at("header");
}

} // namespace persum::cli
