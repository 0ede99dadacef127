#include "icleval/backend.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "icleval/error.hpp"
#include "icleval/prompting.hpp"
#include "icleval/rng.hpp"

namespace icleval {

using nlohmann::json;

BackendKind backend_kind_from_string(const std::string& name) {
    if (name == "remote") return BackendKind::remote;
    if (name == "perfect-oracle") return BackendKind::perfect_oracle;
    if (name == "noisy-oracle") return BackendKind::noisy_oracle;
    if (name == "replay") return BackendKind::replay;
    throw_config("unknown backend kind '" + name + "'");
}

const char* to_string(BackendKind kind) {
    switch (kind) {
    case BackendKind::remote: return "remote";
    case BackendKind::perfect_oracle: return "perfect-oracle";
    case BackendKind::noisy_oracle: return "noisy-oracle";
    case BackendKind::replay: return "replay";
    }
    return "?";
}

ParsedScore parse_score(const std::string& response) {
    // first unsigned decimal token: digits, optionally '.' and more digits
    std::size_t i = 0;
    while (i < response.size() && !std::isdigit(static_cast<unsigned char>(response[i]))) ++i;
    if (i == response.size())
        throw_parse("no numeric token in model response: \"" + response + "\"");
    std::size_t end = i;
    while (end < response.size() && std::isdigit(static_cast<unsigned char>(response[end]))) ++end;
    if (end < response.size() && response[end] == '.' && end + 1 < response.size() &&
        std::isdigit(static_cast<unsigned char>(response[end + 1]))) {
        ++end;
        while (end < response.size() && std::isdigit(static_cast<unsigned char>(response[end])))
            ++end;
    }
    const double value = std::strtod(response.substr(i, end - i).c_str(), nullptr);

    ParsedScore parsed;
    if (value <= 1.0) {
        parsed.score = value;
    } else if (value <= 1.05) {
        parsed.score = 1.0;
        parsed.clamped = true;
    } else {
        throw_parse("numeric token " + response.substr(i, end - i) +
                    " out of range in model response: \"" + response + "\"");
    }
    return parsed;
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string cache_key(const CompletionRequest& request) {
    json j;
    j["prompt"] = request.prompt_text;
    j["model"] = request.model_id;
    j["temperature"] = request.temperature;
    j["max_tokens"] = request.max_completion_tokens;
    return sha256_hex(j.dump());
}

CompletionCache::CompletionCache(const std::filesystem::path& path) : path_(path) {
    std::ifstream in(path_);
    if (!in) return;  // fresh cache
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json j = json::parse(line);
            entries_[j.at("key").get<std::string>()] = j.at("response").get<std::string>();
        } catch (const json::exception& ex) {
            throw_data("cache file " + path_.string() + " line " + std::to_string(line_no) +
                       ": " + ex.what());
        }
    }
}

std::optional<std::string> CompletionCache::lookup(const std::string& key) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::size_t CompletionCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

void CompletionCache::append(const std::string& key, const CompletionRequest& request,
                             const std::string& response) {
    std::lock_guard lock(mutex_);
    if (entries_.count(key)) return;
    entries_[key] = response;
    if (path_.empty()) return;  // in-memory cache

    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%FT%TZ", std::gmtime(&t));

    json j;
    j["key"] = key;
    j["model"] = request.model_id;
    j["temperature"] = request.temperature;
    j["max_tokens"] = request.max_completion_tokens;
    j["prompt_sha256"] = sha256_hex(request.prompt_text);
    j["response"] = response;
    j["timestamp"] = stamp;

    std::ofstream out(path_, std::ios::app);
    if (!out) throw_config("cannot append to cache file: " + path_.string());
    out << j.dump() << '\n';
    out.flush();
}

namespace {

double require_human_score(const InstanceContext* ctx, const char* kind) {
    if (!ctx || !ctx->human_score)
        throw_config(std::string(kind) +
                     " backend needs the human score of the instance under evaluation");
    return *ctx->human_score;
}

class PerfectOracleBackend final : public Backend {
public:
    std::string complete(const CompletionRequest&, const InstanceContext* ctx) override {
        stats_.calls++;
        return format_score(require_human_score(ctx, "perfect-oracle"));
    }
};

class NoisyOracleBackend final : public Backend {
public:
    NoisyOracleBackend(double sigma, std::uint64_t seed) : sigma_(sigma), seed_(seed) {}

    std::string complete(const CompletionRequest&, const InstanceContext* ctx) override {
        stats_.calls++;
        const double human = require_human_score(ctx, "noisy-oracle");
        // substream keyed by the instance so results are order-independent
        std::uint64_t h = hash_combine(seed_, ctx->doc_id);
        h = hash_combine(h, ctx->system_id);
        h = hash_combine(h, std::string_view(to_string(ctx->dimension)));
        Rng rng(h);
        const double noised = std::clamp(human + sigma_ * rng.normal(), 0.0, 1.0);
        return format_score(noised);
    }

private:
    double sigma_;
    std::uint64_t seed_;
};

class ReplayBackend final : public Backend {
public:
    explicit ReplayBackend(const CompletionCache* cache) : cache_(cache) {
        if (!cache_) throw_config("replay backend requires a cache");
    }

    std::string complete(const CompletionRequest& request, const InstanceContext*) override {
        stats_.calls++;
        auto hit = cache_->lookup(cache_key(request));
        if (!hit) throw_data("no cached response for request (model '" + request.model_id + "')");
        return *hit;
    }

private:
    const CompletionCache* cache_;
};

class RemoteBackend final : public Backend {
public:
    explicit RemoteBackend(const BackendDescriptor& desc) : desc_(desc) {
        if (desc_.endpoint.empty()) throw_config("remote backend requires an endpoint URL");
        const std::size_t scheme = desc_.endpoint.find("://");
        const std::size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
        const std::size_t slash = desc_.endpoint.find('/', host_start);
        if (slash == std::string::npos) {
            base_ = desc_.endpoint;
            path_ = "/v1/completions";
        } else {
            base_ = desc_.endpoint.substr(0, slash);
            path_ = desc_.endpoint.substr(slash);
            if (!path_.ends_with("/completions")) path_ += "/completions";
        }
        if (const char* key = std::getenv(desc_.api_key_env.c_str())) api_key_ = key;
    }

    std::string complete(const CompletionRequest& request, const InstanceContext*) override {
        stats_.calls++;
        json body;
        body["model"] = request.model_id;
        body["prompt"] = request.prompt_text;
        body["temperature"] = request.temperature;
        body["max_tokens"] = request.max_completion_tokens;
        const std::string payload = body.dump();

        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

        std::string last_error;
        const std::size_t attempts = desc_.retry_backoff_ms.size() + 1;
        for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
            if (attempt > 0) {
                stats_.retries++;
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(desc_.retry_backoff_ms[attempt - 1]));
            }
            httplib::Client client(base_);
            client.set_read_timeout(120, 0);
            stats_.remote_calls++;
            auto res = client.Post(path_, headers, payload, "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;  // retryable
            }
            if (res->status == 429 || res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
                continue;  // retryable
            }
            if (res->status != 200)
                throw_network("HTTP " + std::to_string(res->status) + " from " + base_ + path_ +
                              ": " + res->body);
            return extract_completion_text(res->body);
        }
        throw_network("remote completion failed after " + std::to_string(attempts) +
                      " attempts: " + last_error);
    }

private:
    static std::string extract_completion_text(const std::string& body) {
        try {
            json j = json::parse(body);
            return j.at("choices").at(0).at("text").get<std::string>();
        } catch (const json::exception& ex) {
            throw_network(std::string("malformed completion response: ") + ex.what());
        }
    }

    BackendDescriptor desc_;
    std::string base_;
    std::string path_;
    std::string api_key_;
};

}  // namespace

std::unique_ptr<Backend> make_backend(const BackendDescriptor& descriptor,
                                      const CompletionCache* cache) {
    switch (descriptor.kind) {
    case BackendKind::remote: return std::make_unique<RemoteBackend>(descriptor);
    case BackendKind::perfect_oracle: return std::make_unique<PerfectOracleBackend>();
    case BackendKind::noisy_oracle:
        return std::make_unique<NoisyOracleBackend>(descriptor.noise_sigma, descriptor.seed);
    case BackendKind::replay: return std::make_unique<ReplayBackend>(cache);
    }
    throw_config("unhandled backend kind");
}

}  // namespace icleval
