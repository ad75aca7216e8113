#pragma once

#include <cctype>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "persum/modelio/client.hpp"
#include "persum/util/random.hpp"

namespace persum::modelio {

struct RecordedCall {
    std::string endpoint;
    std::string prompt;
    std::uint32_t sample_index = 0;
};

/// Thread-safe record of every call a test double receives.
class CallLedger {
  public:
    void record(const ModelEndpoint& e, std::string_view prompt, std::uint32_t idx) {
        std::lock_guard lk(mu_);
        calls_.push_back({e.name, std::string(prompt), idx});
    }
    std::size_t count() const {
        std::lock_guard lk(mu_);
        return calls_.size();
    }
    std::vector<RecordedCall> calls() const {
        std::lock_guard lk(mu_);
        return calls_;
    }

  private:
    mutable std::mutex mu_;
    std::vector<RecordedCall> calls_;
};

/// Test double backed by an arbitrary function.
class FunctionClient final : public ModelClient {
  public:
    using Fn = std::function<std::string(const ModelEndpoint&, std::string_view, std::uint32_t)>;
    explicit FunctionClient(Fn fn) : fn_(std::move(fn)) {}

    std::string complete(const ModelEndpoint& endpoint, std::string_view prompt, std::uint32_t sample_index) override {
        ledger_.record(endpoint, prompt, sample_index);
        return fn_(endpoint, prompt, sample_index);
    }
    const CallLedger& ledger() const noexcept { return ledger_; }

  private:
    Fn fn_;
    CallLedger ledger_;
};

namespace mock_detail {

inline std::string between(std::string_view s, std::string_view open, std::string_view close) {
    auto a = s.rfind(open);
    if (a == std::string_view::npos) return {};
    a += open.size();
    auto b = close.empty() ? std::string_view::npos : s.find(close, a);
    return std::string(s.substr(a, b == std::string_view::npos ? std::string_view::npos : b - a));
}

inline std::string trim(std::string_view s) {
    auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string_view::npos) return {};
    auto b = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(a, b - a + 1));
}

inline std::vector<std::string> sentences(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '\n') c = ' ';
        cur.push_back(c);
        bool end = (c == '.' || c == '!' || c == '?') && (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])));
        if (end) {
            auto t = trim(cur);
            if (t.size() > 1) out.push_back(t.substr(0, t.size() - 1));
            cur.clear();
        }
    }
    if (auto t = trim(cur); !t.empty()) out.push_back(t);
    return out;
}

inline std::string lower_first(std::string s) {
    if (!s.empty() && s[0] >= 'A' && s[0] <= 'Z') s[0] = static_cast<char>(s[0] - 'A' + 'a');
    return s;
}

} // namespace mock_detail

/// Seeded in-process model. Replies are a pure function of (seed, endpoint,
/// prompt, and sample_index when temperature > 0).
///
/// Modes (endpoint.mock.mode): "echo" returns the prompt, "constant" returns
/// mock.reply, "random" returns a hex token, and "auto" (default) recognizes
/// the built-in templates and answers in their required format.
class MockClient final : public ModelClient {
  public:
    explicit MockClient(std::uint64_t seed = 0) : seed_(seed) {}

    std::string complete(const ModelEndpoint& endpoint, std::string_view prompt, std::uint32_t sample_index) override {
        ledger_.record(endpoint, prompt, sample_index);
        auto mode = optional_field<std::string>(endpoint.mock, "mode", "auto");
        auto rng = rng_for(endpoint, prompt, sample_index);
        if (mode == "echo") return std::string(prompt);
        if (mode == "constant") return optional_field<std::string>(endpoint.mock, "reply", "");
        if (mode == "random") return random_token(rng);
        if (mode == "auto") return auto_reply(prompt, rng, endpoint.params.temperature > 0.0);
        throw ConfigError("mock endpoint '" + endpoint.name + "': unknown mode '" + mode + "'");
    }

    const CallLedger& ledger() const noexcept { return ledger_; }

  private:
    Rng rng_for(const ModelEndpoint& e, std::string_view prompt, std::uint32_t sample_index) const {
        Sha256Builder b;
        b.add(std::to_string(seed_ ^ optional_field<std::uint64_t>(e.mock, "seed", 0))).add(e.name).add(prompt);
        if (e.params.temperature > 0.0) b.add(std::to_string(sample_index));
        auto hex = b.hex();
        return Rng{std::stoull(hex.substr(0, 16), nullptr, 16)};
    }

    static std::string random_token(Rng& rng) {
        static constexpr char digits[] = "0123456789abcdef";
        std::string out;
        auto v = rng();
        for (int i = 0; i < 16; ++i) out.push_back(digits[(v >> (4 * i)) & 0xF]);
        return out;
    }

    static std::string auto_reply(std::string_view prompt, Rng& rng, bool sampling) {
        using namespace mock_detail;
        if (prompt.ends_with("(1~5 only):")) {
            return std::to_string(1 + uniform_index(rng, 5));
        }
        if (prompt.find("One-Line Argument Summary starting with \"The article argues\"") != std::string_view::npos) {
            return "The article argues " + trim(between(prompt, "Excerpt: ", "\n\n---"));
        }
        if (prompt.ends_with("REVERSED:")) {
            auto original = trim(between(prompt, "ORIGINAL: ", "\nREVERSED:"));
            constexpr std::string_view prefix = "The article argues ";
            if (original.starts_with(prefix)) {
                return std::string(prefix) + "that it is not the case that " + original.substr(prefix.size());
            }
            return "It is not the case that " + lower_first(original);
        }
        if (prompt.find("ONLY RETURN THE FEEDBACK") != std::string_view::npos) {
            static constexpr std::string_view kFeedback[] = {
                "The summary omits some of the main arguments.",
                "The summary should state the central argument more directly.",
                "The summary includes a claim that the texts do not support."};
            return std::string(kFeedback[uniform_index(rng, std::size(kFeedback))]);
        }
        if (prompt.find("ONLY RETURN THE PARAGRAPH") != std::string_view::npos) {
            auto lines = trim(between(prompt, "Key points:\n", ""));
            std::string out;
            for (auto& c : lines) out.push_back(c == '\n' ? ' ' : c);
            return out;
        }
        for (std::string_view side : {"Left", "Right"}) {
            std::string marker = "starting with 'The " + std::string(side) + " '";
            if (prompt.find(marker) == std::string_view::npos) continue;
            auto article = side == "Left" ? between(prompt, "Left:\n", "\n\nRight:\n") : between(prompt, "\n\nRight:\n", "\n\nSummary:\n");
            auto sents = sentences(article);
            if (sents.empty()) return "The " + std::string(side) + " offers no argument.";
            std::string out = "The " + std::string(side) + " argues that " + lower_first(sents[uniform_index(rng, sents.size())]);
            if (sampling && sents.size() > 1 && coin_flip(rng)) {
                out += ", and that " + lower_first(sents[uniform_index(rng, sents.size())]);
            }
            return out + ".";
        }
        return std::string(prompt);
    }

    std::uint64_t seed_;
    CallLedger ledger_;
};

} // namespace persum::modelio
