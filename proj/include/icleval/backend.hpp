#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "icleval/corpus.hpp"

namespace icleval {

struct CompletionRequest {
    std::string prompt_text;
    std::string model_id;
    double temperature = 0.0;  // canonical configuration; deterministic decoding
    std::size_t max_completion_tokens = 8;
};

enum class BackendKind { remote, perfect_oracle, noisy_oracle, replay };

BackendKind backend_kind_from_string(const std::string& name);
const char* to_string(BackendKind kind);

struct BackendDescriptor {
    BackendKind kind = BackendKind::perfect_oracle;
    // remote
    std::string endpoint;                          // e.g. https://api.openai.com/v1
    std::string api_key_env = "OPENAI_API_KEY";    // bearer token comes from the environment
    std::vector<int> retry_backoff_ms = {1000, 2000, 4000};
    // noisy oracle
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

// Identifies the instance a completion is being requested for. Oracle
// backends answer from the human score carried here; remote and replay
// backends ignore it. This is test wiring, kept explicit on purpose.
struct InstanceContext {
    std::string doc_id;
    std::string system_id;
    Dimension dimension = Dimension::coherence;
    std::optional<double> human_score;
};

// A model-produced dimension score for one test summary.
struct Prediction {
    std::string doc_id;
    std::string system_id;
    Dimension dimension = Dimension::coherence;
    double score = 0.0;
    std::string raw_response;
    bool cache_hit = false;
    bool clamped = false;
};

struct ParsedScore {
    double score = 0.0;
    bool clamped = false;  // response was in (1, 1.05] and got pulled down to 1
};

// Extracts the first unsigned decimal-number token from a model response.
// Values in (1, 1.05] clamp to 1.0 (flagged); anything above 1.05, or a
// response with no numeric token, is a parse error carrying the raw text.
ParsedScore parse_score(const std::string& response);

// Stable content hash (SHA-256 hex) over all request fields. Identical
// requests collide; any field change produces a different key.
std::string cache_key(const CompletionRequest& request);

std::string sha256_hex(const std::string& data);

// Append-only line-delimited JSON store of completions, keyed by
// cache_key(request). Readers share; appends are serialized and flushed.
class CompletionCache {
public:
    CompletionCache() = default;
    explicit CompletionCache(const std::filesystem::path& path);

    std::optional<std::string> lookup(const std::string& key) const;
    void append(const std::string& key, const CompletionRequest& request,
                const std::string& response);
    std::size_t size() const;

private:
    std::filesystem::path path_;
    std::unordered_map<std::string, std::string> entries_;
    mutable std::mutex mutex_;
};

struct BackendStats {
    std::atomic<std::size_t> calls{0};         // completions computed or fetched by the backend
    std::atomic<std::size_t> remote_calls{0};  // HTTP requests actually issued
    std::atomic<std::size_t> retries{0};
};

class Backend {
public:
    virtual ~Backend() = default;
    // Returns the raw completion text. `ctx` may be null for backends that
    // do not need it (remote, replay).
    virtual std::string complete(const CompletionRequest& request,
                                 const InstanceContext* ctx) = 0;
    BackendStats& stats() { return stats_; }
    const BackendStats& stats() const { return stats_; }

protected:
    BackendStats stats_;
};

// `cache` is only used by the replay kind, which serves exclusively from it.
std::unique_ptr<Backend> make_backend(const BackendDescriptor& descriptor,
                                      const CompletionCache* cache = nullptr);

}  // namespace icleval
