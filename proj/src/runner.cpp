#include "icleval/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "icleval/error.hpp"
#include "icleval/rng.hpp"

namespace icleval {

using nlohmann::json;

ParseFailurePolicy parse_failure_policy_from_string(const std::string& name) {
    if (name == "exclude") return ParseFailurePolicy::exclude;
    if (name == "strict") return ParseFailurePolicy::strict;
    throw_config("unknown parse-failure policy '" + name + "'");
}

const char* to_string(ParseFailurePolicy p) {
    return p == ParseFailurePolicy::exclude ? "exclude" : "strict";
}

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

SamplerConfig resolve_sampler(const RunConfig& config, Dimension d) {
    SamplerSettings settings = config.sampler;
    if (auto it = config.sampler_overrides.find(d); it != config.sampler_overrides.end())
        settings = it->second;
    return SamplerConfig{settings.procedure, settings.k, settings.seed, d};
}

std::filesystem::path resolve_cache_path(const RunConfig& config) {
    if (!config.cache_path.empty()) return config.cache_path;
    if (!config.output_dir.empty()) return config.output_dir / "cache.jsonl";
    return {};
}

// Interval pacing for the per-minute request budget.
class RateLimiter {
public:
    explicit RateLimiter(std::size_t per_minute) {
        if (per_minute > 0)
            interval_ = std::chrono::nanoseconds(60'000'000'000ULL / per_minute);
    }

    void acquire() {
        if (interval_.count() == 0) return;
        std::unique_lock lock(mutex_);
        const auto now = std::chrono::steady_clock::now();
        if (next_ < now) next_ = now;
        const auto slot = next_;
        next_ += interval_;
        lock.unlock();
        std::this_thread::sleep_until(slot);
    }

private:
    std::chrono::nanoseconds interval_{0};
    std::chrono::steady_clock::time_point next_{};
    std::mutex mutex_;
};

struct WorkItem {
    CompletionRequest request;
    InstanceContext ctx;
    std::string response;
    bool cache_hit = false;
    bool done = false;
};

void dispatch(std::vector<WorkItem*>& pending, Backend& backend, std::size_t parallelism,
              std::size_t requests_per_minute) {
    if (pending.empty()) return;
    RateLimiter limiter(requests_per_minute);
    const std::size_t workers = std::max<std::size_t>(1, std::min(parallelism, pending.size()));

    if (workers == 1) {
        for (WorkItem* item : pending) {
            limiter.acquire();
            item->response = backend.complete(item->request, &item->ctx);
            item->done = true;
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= pending.size() || failed.load()) return;
            try {
                limiter.acquire();
                pending[i]->response = backend.complete(pending[i]->request, &pending[i]->ctx);
                pending[i]->done = true;
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

json sampler_json(const SamplerConfig& cfg) {
    return json{{"procedure", to_string(cfg.procedure)},
                {"k", cfg.k},
                {"seed", cfg.seed},
                {"dimension", to_string(cfg.dimension)}};
}

json config_json(const RunConfig& config) {
    json j;
    j["corpus"] = config.corpus_path.string();
    j["schema"] = config.load.schema == CorpusSchema::canonical ? "canonical" : "summeval";
    j["scale"] = {config.load.scale.min, config.load.scale.max};
    j["annotations"] =
        config.load.annotations == AnnotationSource::expert ? "expert" : "turker";
    j["n_pool_articles"] = config.n_pool_articles;
    j["split_seed"] = config.split_seed;
    json dims = json::array();
    for (Dimension d : config.dimensions) dims.push_back(to_string(d));
    j["dimensions"] = dims;
    json samplers = json::object();
    for (Dimension d : config.dimensions)
        samplers[to_string(d)] = sampler_json(resolve_sampler(config, d));
    j["sampler"] = samplers;
    j["template_dir"] =
        (config.template_dir.empty() ? default_template_dir() : config.template_dir).string();
    j["backend"] = {{"kind", to_string(config.backend.kind)},
                    {"endpoint", config.backend.endpoint},
                    {"api_key_env", config.backend.api_key_env},
                    {"noise_sigma", config.backend.noise_sigma},
                    {"seed", config.backend.seed}};
    j["model"] = config.model_id;
    j["parse_failures"] = to_string(config.parse_failures);
    j["zero_variance"] = to_string(config.zero_variance);
    j["context_window"] = config.context_window;
    j["max_completion_tokens"] = config.max_completion_tokens;
    j["parallelism"] = config.parallelism;
    j["requests_per_minute"] = config.requests_per_minute;
    j["resample_per_instance"] = config.resample_per_instance;
    j["test_sample"] = config.test_sample;
    j["test_sample_seed"] = config.test_sample_seed;
    j["cache"] = resolve_cache_path(config).string();
    return j;
}

struct DocIndex {
    std::unordered_map<std::string, const Document*> by_id;

    explicit DocIndex(const Corpus& corpus) {
        for (const auto& doc : corpus.documents) by_id.emplace(doc.doc_id, &doc);
    }

    const Document& at(const std::string& doc_id) const {
        auto it = by_id.find(doc_id);
        if (it == by_id.end()) throw_data("doc_id '" + doc_id + "' not found in corpus");
        return *it->second;
    }
};

EvaluationInstance make_instance(const SummaryRecord& record, const Document& doc, Dimension d) {
    EvaluationInstance inst;
    inst.summary_text = record.summary_text;
    inst.dimension = d;
    if (needs_source(d)) inst.source_text = doc.source_text;
    if (needs_reference(d) && !doc.references.empty()) inst.reference_text = doc.references.front();
    return inst;
}

json examples_json(const std::vector<PoolExample>& examples) {
    json arr = json::array();
    for (const auto& ex : examples)
        arr.push_back({{"doc_id", ex.record.doc_id},
                       {"system_id", ex.record.system_id},
                       {"bucket", assign_bucket(ex.aspect_score)},
                       {"aspect_score", ex.aspect_score}});
    return arr;
}

// Core evaluation over an explicit list of test records. The example pool
// always comes from `pool_corpus` (split from the configured corpus); test
// records may live in a different corpus for system-level evaluation.
struct EvalInputs {
    const Corpus* pool_corpus = nullptr;
    const Split* split = nullptr;
    const std::vector<SummaryRecord>* test_records = nullptr;
    const Corpus* test_corpus = nullptr;  // corpus the test records belong to
};

EvaluationRun evaluate_records(const RunConfig& config, const EvalInputs& inputs) {
    if (config.dimensions.empty()) throw_config("no dimensions requested");

    const Corpus& pool_corpus = *inputs.pool_corpus;
    const Corpus& test_corpus = *inputs.test_corpus;
    const Split& split = *inputs.split;
    const DocIndex test_docs(test_corpus);

    const auto template_dir =
        config.template_dir.empty() ? default_template_dir() : config.template_dir;
    const auto templates = load_template_set(template_dir);

    // Test subsampling (analysis mode); original record order is preserved.
    std::vector<const SummaryRecord*> test;
    if (config.test_sample > 0 && config.test_sample < inputs.test_records->size()) {
        Rng rng(config.test_sample_seed);
        auto picked = rng.sample_indices(inputs.test_records->size(), config.test_sample);
        std::sort(picked.begin(), picked.end());
        for (std::size_t i : picked) test.push_back(&(*inputs.test_records)[i]);
    } else {
        for (const auto& rec : *inputs.test_records) test.push_back(&rec);
    }

    struct DimensionPlan {
        Dimension dimension;
        SamplerConfig sampler;
        std::vector<PoolExample> fixed_examples;
        std::vector<WorkItem> items;
    };
    std::vector<DimensionPlan> plans;

    // Phase 1: sample, render, and budget-check every prompt before any
    // completion is requested, so a budget failure cannot burn backend calls.
    for (Dimension d : config.dimensions) {
        DimensionPlan plan;
        plan.dimension = d;
        plan.sampler = resolve_sampler(config, d);
        const auto pool = build_pool(split.pool, d);
        if (!config.resample_per_instance) plan.fixed_examples = sample(pool, plan.sampler);

        const PromptTemplate& tmpl = templates.at(d);
        plan.items.reserve(test.size());
        for (const SummaryRecord* rec : test) {
            if (split.pool_doc_ids.count(rec->doc_id))
                throw Error(ErrorCategory::internal,
                            "leakage: test record doc_id '" + rec->doc_id +
                                "' is a pool article");

            std::vector<PoolExample> per_instance;
            const std::vector<PoolExample>* examples = &plan.fixed_examples;
            if (config.resample_per_instance) {
                SamplerConfig cfg = plan.sampler;
                cfg.seed = hash_combine(hash_combine(cfg.seed, rec->doc_id), rec->system_id);
                per_instance = sample(pool, cfg);
                examples = &per_instance;
            }

            const EvaluationInstance instance = make_instance(*rec, test_docs.at(rec->doc_id), d);
            const RenderedPrompt prompt = render_prompt(tmpl, *examples, instance, pool_corpus);
            const BudgetCheck budget =
                check_budget(prompt, config.context_window, config.max_completion_tokens);
            if (!budget.ok)
                throw_budget("dimension " + std::string(to_string(d)) + ": prompt for ('" +
                             rec->doc_id + "', '" + rec->system_id + "') needs " +
                             std::to_string(prompt.estimated_tokens) + " tokens, " +
                             std::to_string(budget.overshoot) +
                             " over budget; try fewer in-context examples (smaller k)");

            WorkItem item;
            item.request = CompletionRequest{prompt.text, config.model_id, 0.0,
                                             config.max_completion_tokens};
            item.ctx = InstanceContext{rec->doc_id, rec->system_id, d, rec->human_score(d)};
            plan.items.push_back(std::move(item));
        }
        plans.push_back(std::move(plan));
    }

    // Phase 2: answer from the cache where possible, dispatch the rest.
    const auto cache_path = resolve_cache_path(config);
    if (!cache_path.empty() && !cache_path.parent_path().empty())
        std::filesystem::create_directories(cache_path.parent_path());
    CompletionCache cache(cache_path);
    auto backend = make_backend(config.backend, &cache);

    std::vector<WorkItem*> pending;
    std::size_t cache_hits = 0;
    for (auto& plan : plans) {
        for (auto& item : plan.items) {
            if (auto hit = cache.lookup(cache_key(item.request))) {
                item.response = *hit;
                item.cache_hit = true;
                item.done = true;
                ++cache_hits;
            } else {
                pending.push_back(&item);
            }
        }
    }
    dispatch(pending, *backend, config.parallelism, config.requests_per_minute);
    for (auto& plan : plans)
        for (auto& item : plan.items)
            if (!item.cache_hit) cache.append(cache_key(item.request), item.request, item.response);

    // Phase 3: parse scores.
    EvaluationRun run;
    json exclusions_detail = json::object();
    for (auto& plan : plans) {
        DimensionRunStats& stats = run.stats[plan.dimension];
        json excluded = json::array();
        for (auto& item : plan.items) {
            ++stats.attempted;
            try {
                const ParsedScore parsed = parse_score(item.response);
                Prediction pred;
                pred.doc_id = item.ctx.doc_id;
                pred.system_id = item.ctx.system_id;
                pred.dimension = plan.dimension;
                pred.score = parsed.score;
                pred.raw_response = item.response;
                pred.cache_hit = item.cache_hit;
                pred.clamped = parsed.clamped;
                if (parsed.clamped) ++stats.clamped;
                ++stats.scored;
                run.predictions.push_back(std::move(pred));
            } catch (const Error& e) {
                if (e.category() != ErrorCategory::parse) throw;
                if (config.parse_failures == ParseFailurePolicy::strict)
                    throw_parse("dimension " + std::string(to_string(plan.dimension)) +
                                ", instance ('" + item.ctx.doc_id + "', '" + item.ctx.system_id +
                                "'): " + e.what());
                ++stats.excluded_parse_failure;
                excluded.push_back({{"doc_id", item.ctx.doc_id},
                                    {"system_id", item.ctx.system_id},
                                    {"response", item.response}});
            }
        }
        exclusions_detail[to_string(plan.dimension)] = std::move(excluded);
    }

    run.cache_hits = cache_hits;
    run.backend_calls = backend->stats().calls.load();
    run.remote_calls = backend->stats().remote_calls.load();

    json manifest;
    manifest["artifact_version"] = kArtifactVersion;
    manifest["config"] = config_json(config);
    manifest["split"] = json::parse(
        split_manifest_json(split, config.n_pool_articles, config.split_seed));
    if (config.resample_per_instance) {
        manifest["examples"] = {{"mode", "per-instance"}};
    } else {
        json by_dim = json::object();
        for (const auto& plan : plans) by_dim[to_string(plan.dimension)] =
            examples_json(plan.fixed_examples);
        manifest["examples"] = std::move(by_dim);
    }
    manifest["backend_stats"] = {{"calls", run.backend_calls},
                                 {"remote_calls", run.remote_calls},
                                 {"retries", backend->stats().retries.load()},
                                 {"cache_hits", cache_hits}};
    json dim_stats = json::object();
    for (const auto& [d, s] : run.stats)
        dim_stats[to_string(d)] = {{"attempted", s.attempted},
                                   {"scored", s.scored},
                                   {"excluded_parse_failure", s.excluded_parse_failure},
                                   {"clamped", s.clamped}};
    manifest["dimension_stats"] = std::move(dim_stats);
    manifest["exclusions"] = std::move(exclusions_detail);
    manifest["test_instances"] = test.size();
    run.manifest = std::move(manifest);

    if (!config.output_dir.empty()) {
        std::filesystem::create_directories(config.output_dir);
        write_file(config.output_dir / "predictions.jsonl",
                   predictions_to_jsonl(run.predictions));
        write_file(config.output_dir / "run_manifest.json", run.manifest.dump(2) + "\n");
    }
    return run;
}

}  // namespace

EvaluationRun run_evaluate_on(const Corpus& corpus, const RunConfig& config) {
    const Split split = split_corpus(corpus, config.n_pool_articles, config.split_seed);
    EvalInputs inputs;
    inputs.pool_corpus = &corpus;
    inputs.split = &split;
    inputs.test_records = &split.test;
    inputs.test_corpus = &corpus;
    return evaluate_records(config, inputs);
}

EvaluationRun run_evaluate(const RunConfig& config) {
    const Corpus corpus = load_corpus(config.corpus_path, config.load);
    return run_evaluate_on(corpus, config);
}

PairedScores build_paired_scores(const std::vector<Prediction>& predictions, const Corpus& corpus,
                                 Dimension dimension) {
    std::map<RecordKey, const SummaryRecord*> records;
    for (const auto& rec : corpus.records) records[{rec.doc_id, rec.system_id}] = &rec;

    PairedScores paired;
    paired.dimension = dimension;
    for (const auto& pred : predictions) {
        if (pred.dimension != dimension) continue;
        auto it = records.find({pred.doc_id, pred.system_id});
        if (it == records.end())
            throw_data("prediction references unknown record ('" + pred.doc_id + "', '" +
                       pred.system_id + "')");
        const auto human = it->second->human_score(dimension);
        if (!human)
            throw_data("record ('" + pred.doc_id + "', '" + pred.system_id +
                       "') has no human score for dimension " + to_string(dimension));
        paired.by_doc[pred.doc_id].push_back({pred.system_id, *human, pred.score});
    }
    if (paired.by_doc.empty())
        throw_data(std::string("no predictions for dimension ") + to_string(dimension));
    return paired;
}

std::map<Dimension, CorrelationReport> run_meta_eval(
    const std::vector<Prediction>& predictions, const Corpus& corpus, ZeroVariancePolicy policy,
    const std::map<Dimension, std::size_t>& excluded) {
    std::map<Dimension, CorrelationReport> reports;
    for (Dimension d : kAllDimensions) {
        if (std::none_of(predictions.begin(), predictions.end(),
                         [&](const Prediction& p) { return p.dimension == d; }))
            continue;
        CorrelationReport report = summary_level(build_paired_scores(predictions, corpus, d),
                                                 policy);
        if (auto it = excluded.find(d); it != excluded.end())
            report.instances_excluded_parse_failure = it->second;
        reports.emplace(d, report);
    }
    if (reports.empty()) throw_data("no predictions intersect the corpus dimensions");
    return reports;
}

std::map<std::uint64_t, std::map<Dimension, CorrelationReport>> run_seed_sweep(
    const RunConfig& config, const std::vector<std::uint64_t>& seeds) {
    if (seeds.size() < 2) throw_config("seed sweep needs at least 2 seeds");
    const Corpus corpus = load_corpus(config.corpus_path, config.load);

    std::map<std::uint64_t, std::map<Dimension, CorrelationReport>> by_seed;
    for (const std::uint64_t seed : seeds) {
        RunConfig cfg = config;
        cfg.cache_path = resolve_cache_path(config);  // share one cache across seeds
        cfg.sampler.seed = seed;
        for (auto& [d, settings] : cfg.sampler_overrides) settings.seed = seed;
        if (!config.output_dir.empty())
            cfg.output_dir = config.output_dir / ("seed_" + std::to_string(seed));
        const EvaluationRun run = run_evaluate_on(corpus, cfg);
        std::map<Dimension, std::size_t> excluded;
        for (const auto& [d, s] : run.stats) excluded[d] = s.excluded_parse_failure;
        by_seed[seed] = run_meta_eval(run.predictions, corpus, cfg.zero_variance, excluded);
    }
    return by_seed;
}

std::map<std::size_t, CountSweepEntry> run_count_sweep(const RunConfig& config,
                                                       const std::vector<std::size_t>& counts) {
    if (counts.empty()) throw_config("count sweep needs at least one count");
    for (std::size_t k : counts)
        if (k == 0) throw_config("in-context example counts must be at least 1");
    const Corpus corpus = load_corpus(config.corpus_path, config.load);

    std::map<std::size_t, CountSweepEntry> by_count;
    for (const std::size_t k : counts) {
        CountSweepEntry entry;
        if (k > config.n_pool_articles) {
            entry.skipped = true;
            entry.skip_reason = "pool has only " + std::to_string(config.n_pool_articles) +
                                " distinct articles";
            by_count[k] = std::move(entry);
            continue;
        }
        RunConfig cfg = config;
        cfg.cache_path = resolve_cache_path(config);
        cfg.sampler.k = k;
        for (auto& [d, settings] : cfg.sampler_overrides) settings.k = k;
        if (!config.output_dir.empty())
            cfg.output_dir = config.output_dir / ("k_" + std::to_string(k));
        try {
            const EvaluationRun run = run_evaluate_on(corpus, cfg);
            std::map<Dimension, std::size_t> excluded;
            for (const auto& [d, s] : run.stats) excluded[d] = s.excluded_parse_failure;
            entry.reports = run_meta_eval(run.predictions, corpus, cfg.zero_variance, excluded);
        } catch (const Error& e) {
            if (e.category() != ErrorCategory::budget) throw;
            entry.skipped = true;
            entry.skip_reason = e.what();
        }
        by_count[k] = std::move(entry);
    }
    return by_count;
}

SystemEvalResult run_system_eval(const RunConfig& config, const Corpus& systems_corpus) {
    const Corpus pool_source = load_corpus(config.corpus_path, config.load);
    const Split split = split_corpus(pool_source, config.n_pool_articles, config.split_seed);

    EvalInputs inputs;
    inputs.pool_corpus = &pool_source;
    inputs.split = &split;
    inputs.test_records = &systems_corpus.records;
    inputs.test_corpus = &systems_corpus;

    RunConfig cfg = config;
    if (!config.output_dir.empty()) cfg.output_dir = config.output_dir;
    const EvaluationRun run = evaluate_records(cfg, inputs);

    SystemEvalResult result;
    result.predictions = run.predictions;
    result.stats = run.stats;
    const bool have_references = systems_corpus.docs_missing_references.size() <
                                 systems_corpus.documents.size();
    result.report = system_aggregate(run.predictions, systems_corpus, have_references);
    return result;
}

// --- serialization ---

std::string predictions_to_jsonl(const std::vector<Prediction>& predictions) {
    std::ostringstream out;
    for (const auto& p : predictions) {
        json j;
        j["doc_id"] = p.doc_id;
        j["system_id"] = p.system_id;
        j["dimension"] = to_string(p.dimension);
        j["score"] = p.score;
        j["raw_response"] = p.raw_response;
        j["clamped"] = p.clamped;
        out << j.dump() << '\n';
    }
    return out.str();
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw_config("cannot open predictions file: " + path.string());
    std::vector<Prediction> predictions;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json j = json::parse(line);
            Prediction p;
            p.doc_id = j.at("doc_id").get<std::string>();
            p.system_id = j.at("system_id").get<std::string>();
            p.dimension = dimension_from_string(j.at("dimension").get<std::string>());
            p.score = j.at("score").get<double>();
            p.raw_response = j.value("raw_response", "");
            p.clamped = j.value("clamped", false);
            predictions.push_back(std::move(p));
        } catch (const json::exception& ex) {
            throw_data("predictions file " + path.string() + " line " +
                       std::to_string(line_no) + ": " + ex.what());
        }
    }
    return predictions;
}

std::string correlation_csv(const std::map<Dimension, CorrelationReport>& reports) {
    std::ostringstream out;
    out << "dimension,spearman_rho,kendall_tau\n";
    for (const auto& [d, r] : reports)
        out << to_string(d) << ',' << format_double(r.spearman_rho) << ','
            << format_double(r.kendall_tau) << '\n';
    return out.str();
}

json correlation_json(const std::map<Dimension, CorrelationReport>& reports) {
    json j = json::object();
    for (const auto& [d, r] : reports)
        j[to_string(d)] = {{"spearman_rho", r.spearman_rho},
                           {"kendall_tau", r.kendall_tau},
                           {"documents_used", r.documents_used},
                           {"documents_skipped_zero_variance",
                            r.documents_skipped_zero_variance},
                           {"instances_excluded_parse_failure",
                            r.instances_excluded_parse_failure},
                           {"zero_variance_policy", to_string(r.zero_variance_policy)}};
    return j;
}

std::string system_report_csv(const SystemReport& report) {
    std::ostringstream out;
    out << "system_id,coherence,consistency,fluency,relevance,overall,rouge_l\n";
    for (const auto& [system_id, s] : report.systems) {
        out << system_id;
        for (Dimension d : kAllDimensions) {
            out << ',';
            if (auto it = s.dimension_means.find(d); it != s.dimension_means.end())
                out << format_double(it->second);
        }
        out << ',' << format_double(s.overall_mean) << ',';
        if (s.rouge_l_mean) out << format_double(*s.rouge_l_mean);
        out << '\n';
    }
    for (const auto* marker : {"best_system", "worst_system"}) {
        const auto& source =
            std::string(marker) == "best_system" ? report.best_system : report.worst_system;
        out << marker;
        for (Dimension d : kAllDimensions) {
            out << ',';
            if (auto it = source.find(d); it != source.end()) out << it->second;
        }
        out << ",,\n";
    }
    return out.str();
}

json system_report_json(const SystemReport& report) {
    json systems = json::object();
    for (const auto& [system_id, s] : report.systems) {
        json dims = json::object();
        for (const auto& [d, mean] : s.dimension_means) dims[to_string(d)] = mean;
        json entry = {{"dimension_means", dims},
                      {"overall_mean", s.overall_mean},
                      {"predictions", s.predictions}};
        if (s.rouge_l_mean) entry["rouge_l_mean"] = *s.rouge_l_mean;
        systems[system_id] = std::move(entry);
    }
    json best = json::object(), worst = json::object();
    for (const auto& [d, sys] : report.best_system) best[to_string(d)] = sys;
    for (const auto& [d, sys] : report.worst_system) worst[to_string(d)] = sys;
    return json{{"systems", systems}, {"best_system", best}, {"worst_system", worst}};
}

std::string seed_sweep_csv(
    const std::map<std::uint64_t, std::map<Dimension, CorrelationReport>>& by_seed) {
    std::ostringstream out;
    out << "dimension,seed,spearman_rho,kendall_tau\n";
    for (Dimension d : kAllDimensions) {
        double min_rho = 1.0, max_rho = -1.0, min_tau = 1.0, max_tau = -1.0;
        bool any = false;
        for (const auto& [seed, reports] : by_seed) {
            auto it = reports.find(d);
            if (it == reports.end()) continue;
            any = true;
            out << to_string(d) << ',' << seed << ',' << format_double(it->second.spearman_rho)
                << ',' << format_double(it->second.kendall_tau) << '\n';
            min_rho = std::min(min_rho, it->second.spearman_rho);
            max_rho = std::max(max_rho, it->second.spearman_rho);
            min_tau = std::min(min_tau, it->second.kendall_tau);
            max_tau = std::max(max_tau, it->second.kendall_tau);
        }
        if (any)
            out << to_string(d) << ",range," << format_double(max_rho - min_rho) << ','
                << format_double(max_tau - min_tau) << '\n';
    }
    return out.str();
}

std::string count_sweep_csv(const std::map<std::size_t, CountSweepEntry>& by_count) {
    std::ostringstream out;
    out << "dimension,k,spearman_rho,kendall_tau,status\n";
    for (const auto& [k, entry] : by_count) {
        if (entry.skipped) {
            out << "-," << k << ",,,skipped: " << entry.skip_reason << '\n';
            continue;
        }
        for (const auto& [d, r] : entry.reports)
            out << to_string(d) << ',' << k << ',' << format_double(r.spearman_rho) << ','
                << format_double(r.kendall_tau) << ",ok\n";
    }
    return out.str();
}

json significance_json(const SignificanceResult& result, const BootstrapConfig& config,
                       Dimension dimension) {
    return json{{"dimension", to_string(dimension)},
                {"config",
                 {{"iterations", config.iterations},
                  {"sample_fraction", config.sample_fraction},
                  {"alpha", config.alpha},
                  {"statistic", to_string(config.statistic)},
                  {"seed", config.seed},
                  {"resample_unit", "document"},
                  {"zero_variance_policy", to_string(config.zero_variance_policy)}}},
                {"win_fraction_a", result.win_fraction_a},
                {"win_fraction_b", result.win_fraction_b},
                {"decision", to_string(result.decision)},
                {"redrawn_iterations", result.redrawn_iterations}};
}

std::string histogram_csv(const std::map<Dimension, std::vector<std::size_t>>& human,
                          const std::map<Dimension, std::vector<std::size_t>>& predicted,
                          std::size_t bins) {
    std::ostringstream out;
    out << "dimension,bin,lo,hi,human_count,predicted_count\n";
    for (const auto& [d, human_counts] : human) {
        const auto& pred_counts = predicted.at(d);
        for (std::size_t b = 0; b < bins; ++b) {
            out << to_string(d) << ',' << (b + 1) << ','
                << format_double(static_cast<double>(b) / static_cast<double>(bins)) << ','
                << format_double(static_cast<double>(b + 1) / static_cast<double>(bins)) << ','
                << human_counts[b] << ',' << pred_counts[b] << '\n';
        }
    }
    return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_config("cannot write file: " + path.string());
    out << content;
}

}  // namespace icleval
