#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "persum/modelio/endpoint.hpp"
#include "persum/util/digest.hpp"
#include "persum/util/error.hpp"
#include "persum/util/io.hpp"

namespace persum::modelio {

/// Chat-completion access. Implementations must be safe to call from
/// several threads at once.
class ModelClient {
  public:
    virtual ~ModelClient() = default;

    /// One completion for `prompt`. Distinct `sample_index` values stand for
    /// independent samples of the same request (best-of-N).
    virtual std::string complete(const ModelEndpoint& endpoint, std::string_view prompt, std::uint32_t sample_index) = 0;
};

/// Digest of everything that determines a completion.
inline std::string cache_key(const ModelEndpoint& endpoint, std::string_view prompt, std::uint32_t sample_index) {
    return Sha256Builder{}
        .add(endpoint.name)
        .add(endpoint.model_id)
        .add(to_json(endpoint.params).dump())
        .add(prompt)
        .add(std::to_string(sample_index))
        .hex();
}

/// Content-addressed completion cache on local disk. A hit returns the stored
/// text verbatim without calling the wrapped client.
class CachingClient final : public ModelClient {
  public:
    CachingClient(std::shared_ptr<ModelClient> inner, std::filesystem::path dir)
        : inner_(std::move(inner)), dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    std::string complete(const ModelEndpoint& endpoint, std::string_view prompt, std::uint32_t sample_index) override {
        auto key = cache_key(endpoint, prompt, sample_index);
        std::lock_guard lk(stripe_for(key));
        auto path = path_for(key);
        if (std::filesystem::exists(path)) {
            ++hits_;
            return require<std::string>(read_json(path), "completion", path.string());
        }
        auto text = inner_->complete(endpoint, prompt, sample_index);
        Json rec{{"key", key}, {"endpoint", endpoint.name}, {"sample_index", sample_index}, {"completion", text}};
        write_file_atomic(path, rec.dump());
        ++misses_;
        return text;
    }

    std::size_t hits() const noexcept { return hits_; }
    std::size_t misses() const noexcept { return misses_; }

  private:
    std::filesystem::path path_for(const std::string& key) const { return dir_ / key.substr(0, 2) / (key + ".json"); }

    std::mutex& stripe_for(const std::string& key) {
        return stripes_[std::stoul(key.substr(0, 2), nullptr, 16) % stripes_.size()];
    }

    std::shared_ptr<ModelClient> inner_;
    std::filesystem::path dir_;
    std::array<std::mutex, 64> stripes_;
    std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> misses_{0};
};

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds base_backoff{1000};
};

/// Retries transport errors with exponential backoff (base, 2·base, ...).
/// Protocol errors are not retried.
class RetryingClient final : public ModelClient {
  public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    RetryingClient(std::shared_ptr<ModelClient> inner, RetryPolicy policy = {},
                   Sleeper sleeper = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })
        : inner_(std::move(inner)), policy_(policy), sleep_(std::move(sleeper)) {
        if (policy_.attempts < 1) throw ConfigError("retry attempts must be >= 1");
    }

    std::string complete(const ModelEndpoint& endpoint, std::string_view prompt, std::uint32_t sample_index) override {
        std::string log;
        for (int attempt = 1;; ++attempt) {
            try {
                return inner_->complete(endpoint, prompt, sample_index);
            } catch (const TransportError& e) {
                log += "attempt " + std::to_string(attempt) + ": " + e.what() + "\n";
                if (attempt >= policy_.attempts) {
                    throw TransportError("endpoint '" + endpoint.name + "' failed after " + std::to_string(attempt) +
                                         " attempts\n" + log);
                }
                sleep_(policy_.base_backoff * (1LL << (attempt - 1)));
            }
        }
    }

  private:
    std::shared_ptr<ModelClient> inner_;
    RetryPolicy policy_;
    Sleeper sleep_;
};

/// Caps the number of in-flight requests across every user of this client.
class BoundedClient final : public ModelClient {
  public:
    BoundedClient(std::shared_ptr<ModelClient> inner, std::ptrdiff_t max_in_flight = 8)
        : inner_(std::move(inner)), slots_(max_in_flight) {
        if (max_in_flight < 1) throw ConfigError("parallelism bound must be >= 1");
    }

    std::string complete(const ModelEndpoint& endpoint, std::string_view prompt, std::uint32_t sample_index) override {
        slots_.acquire();
        struct Release {
            std::counting_semaphore<>& s;
            ~Release() { s.release(); }
        } release{slots_};
        return inner_->complete(endpoint, prompt, sample_index);
    }

  private:
    std::shared_ptr<ModelClient> inner_;
    std::counting_semaphore<> slots_;
};

/// Routes each call to the client registered for the endpoint's kind.
class RoutingClient final : public ModelClient {
  public:
    void route(std::string kind, std::shared_ptr<ModelClient> client) { routes_[std::move(kind)] = std::move(client); }

    std::string complete(const ModelEndpoint& endpoint, std::string_view prompt, std::uint32_t sample_index) override {
        auto it = routes_.find(endpoint.kind);
        if (it == routes_.end()) throw ConfigError("no client for endpoint kind '" + endpoint.kind + "'");
        return it->second->complete(endpoint, prompt, sample_index);
    }

  private:
    std::map<std::string, std::shared_ptr<ModelClient>> routes_;
};

} // namespace persum::modelio
