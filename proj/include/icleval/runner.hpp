#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "icleval/backend.hpp"
#include "icleval/corpus.hpp"
#include "icleval/metrics.hpp"
#include "icleval/prompting.hpp"
#include "icleval/sampling.hpp"
#include "icleval/significance.hpp"

namespace icleval {

inline constexpr const char* kArtifactVersion = "0.1.0";

enum class ParseFailurePolicy { exclude, strict };

ParseFailurePolicy parse_failure_policy_from_string(const std::string& name);
const char* to_string(ParseFailurePolicy p);

struct SamplerSettings {
    SamplingProcedure procedure = SamplingProcedure::uniform;
    std::size_t k = 4;
    std::uint64_t seed = 0;
};

struct RunConfig {
    std::filesystem::path corpus_path;
    LoadOptions load;

    std::size_t n_pool_articles = 4;
    std::uint64_t split_seed = 0;

    SamplerSettings sampler;
    std::map<Dimension, SamplerSettings> sampler_overrides;

    std::filesystem::path template_dir;  // empty -> template set shipped with the repo
    BackendDescriptor backend;
    std::string model_id = "oracle";  // config value; no default remote model is assumed

    std::vector<Dimension> dimensions{Dimension::coherence, Dimension::consistency,
                                      Dimension::fluency, Dimension::relevance};

    ParseFailurePolicy parse_failures = ParseFailurePolicy::exclude;
    ZeroVariancePolicy zero_variance = ZeroVariancePolicy::skip;

    std::filesystem::path output_dir;  // empty -> nothing written to disk
    std::filesystem::path cache_path;  // empty -> in-memory cache only

    std::size_t context_window = 4096;
    std::size_t max_completion_tokens = 8;
    std::size_t parallelism = 4;
    std::size_t requests_per_minute = 0;  // 0 = unthrottled

    bool resample_per_instance = false;  // default: one example set per (dimension, run)
    std::size_t test_sample = 0;         // 0 = full test set
    std::uint64_t test_sample_seed = 0;
};

struct DimensionRunStats {
    std::size_t attempted = 0;
    std::size_t scored = 0;
    std::size_t excluded_parse_failure = 0;
    std::size_t clamped = 0;
};

struct EvaluationRun {
    std::vector<Prediction> predictions;
    nlohmann::json manifest;
    std::map<Dimension, DimensionRunStats> stats;
    std::size_t cache_hits = 0;
    std::size_t backend_calls = 0;
    std::size_t remote_calls = 0;
};

// Full evaluation pass: split, sample demonstrations per dimension, render
// and budget-check every prompt up front, then obtain and parse completions
// (cache first). No test record's article can appear among its in-context
// examples; this is asserted at runtime. Writes predictions.jsonl and
// run_manifest.json into output_dir when one is configured.
EvaluationRun run_evaluate(const RunConfig& config);
EvaluationRun run_evaluate_on(const Corpus& corpus, const RunConfig& config);

// Pairs each prediction with the matching human score.
PairedScores build_paired_scores(const std::vector<Prediction>& predictions, const Corpus& corpus,
                                 Dimension dimension);

// Summary-level correlation per dimension. `excluded` feeds the
// instances_excluded_parse_failure diagnostic (e.g. from an EvaluationRun).
std::map<Dimension, CorrelationReport> run_meta_eval(
    const std::vector<Prediction>& predictions, const Corpus& corpus,
    ZeroVariancePolicy policy = ZeroVariancePolicy::skip,
    const std::map<Dimension, std::size_t>& excluded = {});

// Repeats evaluate + meta-eval varying only the example-selection seed.
std::map<std::uint64_t, std::map<Dimension, CorrelationReport>> run_seed_sweep(
    const RunConfig& config, const std::vector<std::uint64_t>& seeds);

struct CountSweepEntry {
    bool skipped = false;
    std::string skip_reason;
    std::map<Dimension, CorrelationReport> reports;
};

// Repeats the pipeline varying only the number of in-context examples.
// Counts that are infeasible (too few pool articles, budget) are reported
// as skipped instead of failing the sweep.
std::map<std::size_t, CountSweepEntry> run_count_sweep(const RunConfig& config,
                                                       const std::vector<std::size_t>& counts);

// Evaluates every system in `systems_corpus` on all requested dimensions,
// using the main config corpus for the in-context example pool, and
// aggregates per system. ROUGE-L against first references is included when
// they exist.
struct SystemEvalResult {
    std::vector<Prediction> predictions;
    SystemReport report;
    std::map<Dimension, DimensionRunStats> stats;
};
SystemEvalResult run_system_eval(const RunConfig& config, const Corpus& systems_corpus);

// --- serialization helpers shared by the CLI and tests ---

std::string predictions_to_jsonl(const std::vector<Prediction>& predictions);
std::vector<Prediction> load_predictions(const std::filesystem::path& path);

std::string correlation_csv(const std::map<Dimension, CorrelationReport>& reports);
nlohmann::json correlation_json(const std::map<Dimension, CorrelationReport>& reports);

std::string system_report_csv(const SystemReport& report);
nlohmann::json system_report_json(const SystemReport& report);

std::string seed_sweep_csv(
    const std::map<std::uint64_t, std::map<Dimension, CorrelationReport>>& by_seed);
std::string count_sweep_csv(const std::map<std::size_t, CountSweepEntry>& by_count);

nlohmann::json significance_json(const SignificanceResult& result, const BootstrapConfig& config,
                                 Dimension dimension);

std::string histogram_csv(const std::map<Dimension, std::vector<std::size_t>>& human,
                          const std::map<Dimension, std::vector<std::size_t>>& predicted,
                          std::size_t bins);

void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace icleval
