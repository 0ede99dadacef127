#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "icleval/error.hpp"
#include "icleval/runner.hpp"

namespace {

using namespace icleval;

int exit_code_for(ErrorCategory category) {
    switch (category) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::data: return 3;
    case ErrorCategory::network: return 4;
    case ErrorCategory::parse: return 5;
    case ErrorCategory::budget: return 6;
    case ErrorCategory::internal: return 1;
    }
    return 1;
}

struct CliOptions {
    std::string corpus;
    std::string schema = "canonical";
    std::string annotations = "expert";
    double scale_min = 1.0;
    double scale_max = 5.0;
    std::size_t n_pool_articles = 4;
    std::uint64_t split_seed = 0;
    std::string sampler = "uniform";
    std::size_t k = 4;
    std::uint64_t sampler_seed = 0;
    std::string templates_dir;
    std::string backend = "remote";
    std::string endpoint;
    std::string api_key_env = "OPENAI_API_KEY";
    std::string model = "oracle";
    double noise_sigma = 0.1;
    std::uint64_t backend_seed = 0;
    std::string cache;
    std::vector<std::string> dimensions = {"coherence", "consistency", "fluency", "relevance"};
    std::string parse_failures = "exclude";
    std::string zero_variance = "skip";
    std::string out = "out";
    std::size_t context_window = 4096;
    std::size_t max_completion_tokens = 8;
    std::size_t parallelism = 4;
    std::size_t rpm = 0;
    bool resample_per_instance = false;
    std::size_t test_sample = 0;
    std::uint64_t test_sample_seed = 0;
};

RunConfig to_run_config(const CliOptions& opt) {
    RunConfig config;
    config.corpus_path = opt.corpus;
    config.load.schema = schema_from_string(opt.schema);
    config.load.scale = {opt.scale_min, opt.scale_max};
    config.load.annotations =
        opt.annotations == "turker" ? AnnotationSource::turker : AnnotationSource::expert;
    config.n_pool_articles = opt.n_pool_articles;
    config.split_seed = opt.split_seed;
    config.sampler = {procedure_from_string(opt.sampler), opt.k, opt.sampler_seed};
    config.template_dir = opt.templates_dir;
    config.backend.kind = backend_kind_from_string(opt.backend);
    config.backend.endpoint = opt.endpoint;
    config.backend.api_key_env = opt.api_key_env;
    config.backend.noise_sigma = opt.noise_sigma;
    config.backend.seed = opt.backend_seed;
    config.model_id = opt.model;
    config.cache_path = opt.cache;
    config.dimensions.clear();
    for (const auto& name : opt.dimensions)
        config.dimensions.push_back(dimension_from_string(name));
    config.parse_failures = parse_failure_policy_from_string(opt.parse_failures);
    config.zero_variance = zero_variance_policy_from_string(opt.zero_variance);
    config.output_dir = opt.out;
    config.context_window = opt.context_window;
    config.max_completion_tokens = opt.max_completion_tokens;
    config.parallelism = opt.parallelism;
    config.requests_per_minute = opt.rpm;
    config.resample_per_instance = opt.resample_per_instance;
    config.test_sample = opt.test_sample;
    config.test_sample_seed = opt.test_sample_seed;
    if (config.backend.kind == BackendKind::remote && config.model_id == "oracle")
        throw_config("remote backend requires --model (no default model is assumed)");
    return config;
}

void add_common_options(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--corpus", opt.corpus, "corpus file (line-delimited JSON)");
    cmd->add_option("--schema", opt.schema, "corpus schema: canonical|summeval");
    cmd->add_option("--annotations", opt.annotations,
                    "annotation source for the summeval schema: expert|turker");
    cmd->add_option("--scale-min", opt.scale_min, "raw annotation scale minimum");
    cmd->add_option("--scale-max", opt.scale_max, "raw annotation scale maximum");
    cmd->add_option("--out", opt.out, "output directory");
}

void add_split_options(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--n-pool-articles", opt.n_pool_articles,
                    "articles held aside as the in-context example pool");
    cmd->add_option("--split-seed", opt.split_seed, "seed for the pool/test split");
}

void add_eval_options(CLI::App* cmd, CliOptions& opt) {
    add_split_options(cmd, opt);
    cmd->add_option("--sampler", opt.sampler, "example sampling: uniform|stratified");
    cmd->add_option("-k,--k", opt.k, "number of in-context examples");
    cmd->add_option("--sampler-seed", opt.sampler_seed, "seed for example selection");
    cmd->add_option("--templates-dir", opt.templates_dir,
                    "prompt template directory (default: templates shipped with the repo)");
    cmd->add_option("--backend", opt.backend,
                    "backend kind: remote|perfect-oracle|noisy-oracle|replay");
    cmd->add_option("--endpoint", opt.endpoint, "OpenAI-compatible completions endpoint");
    cmd->add_option("--api-key-env", opt.api_key_env,
                    "environment variable holding the bearer token");
    cmd->add_option("--model", opt.model, "model id sent to the remote backend");
    cmd->add_option("--noise-sigma", opt.noise_sigma, "noisy-oracle noise stddev");
    cmd->add_option("--backend-seed", opt.backend_seed, "noisy-oracle seed");
    cmd->add_option("--cache", opt.cache, "completion cache file (default: <out>/cache.jsonl)");
    cmd->add_option("--dimensions", opt.dimensions, "dimensions to evaluate")->delimiter(',');
    cmd->add_option("--parse-failures", opt.parse_failures,
                    "unparseable responses: exclude|strict");
    cmd->add_option("--zero-variance", opt.zero_variance, "zero-variance documents: skip|zero");
    cmd->add_option("--context-window", opt.context_window, "model context window (tokens)");
    cmd->add_option("--max-completion-tokens", opt.max_completion_tokens,
                    "completion token cap");
    cmd->add_option("--parallelism", opt.parallelism, "concurrent backend calls");
    cmd->add_option("--rpm", opt.rpm, "request-per-minute limit (0 = unthrottled)");
    cmd->add_flag("--resample-per-instance", opt.resample_per_instance,
                  "draw a fresh example set for every test instance");
    cmd->add_option("--test-sample", opt.test_sample,
                    "evaluate a random sample of N test records (0 = all)");
    cmd->add_option("--test-sample-seed", opt.test_sample_seed, "seed for --test-sample");
}

void print_reports(const std::map<Dimension, CorrelationReport>& reports) {
    for (const auto& [d, r] : reports)
        std::printf("%-12s rho=%8.3f tau=%8.3f  (docs used=%zu skipped=%zu excluded=%zu)\n",
                    to_string(d), r.spearman_rho, r.kendall_tau, r.documents_used,
                    r.documents_skipped_zero_variance, r.instances_excluded_parse_failure);
}

std::map<Dimension, std::size_t> exclusions_from_manifest(const std::filesystem::path& path) {
    std::map<Dimension, std::size_t> excluded;
    std::ifstream in(path);
    if (!in) return excluded;
    try {
        nlohmann::json manifest = nlohmann::json::parse(in);
        for (const auto& [name, stats] : manifest.at("dimension_stats").items())
            excluded[dimension_from_string(name)] =
                stats.value("excluded_parse_failure", std::size_t{0});
    } catch (...) {
        // a foreign or partial manifest is not an error; diagnostics just stay 0
    }
    return excluded;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Few-shot LLM summary evaluation and meta-evaluation"};
    app.set_config("--config", "", "read options from a config file");
    app.require_subcommand(1);

    CliOptions opt;
    std::string predictions_path, pred_a_path, pred_b_path, systems_corpus_path;
    std::string systems_schema = "canonical";
    std::string dimension_name = "coherence";
    std::string statistic_name = "spearman";
    std::size_t iterations = 1000;
    double fraction = 0.8, alpha = 0.05;
    std::uint64_t bootstrap_seed = 0;
    bool keep_deltas = false;
    std::size_t bins = 20;
    std::vector<std::uint64_t> seeds;
    std::vector<std::size_t> counts;

    auto* split_cmd = app.add_subcommand("split", "materialize a pool/test split manifest");
    add_common_options(split_cmd, opt);
    add_split_options(split_cmd, opt);

    auto* eval_cmd = app.add_subcommand("evaluate", "run the evaluation pipeline");
    add_common_options(eval_cmd, opt);
    add_eval_options(eval_cmd, opt);

    auto* meta_cmd = app.add_subcommand("meta-eval",
                                        "correlate predictions with human judgments");
    add_common_options(meta_cmd, opt);
    meta_cmd->add_option("--predictions", predictions_path, "predictions.jsonl from evaluate")
        ->required();
    meta_cmd->add_option("--zero-variance", opt.zero_variance,
                         "zero-variance documents: skip|zero");

    auto* signi_cmd = app.add_subcommand("significance",
                                         "pairwise bootstrap test between two prediction sets");
    add_common_options(signi_cmd, opt);
    signi_cmd->add_option("--pred-a", pred_a_path, "first predictions file")->required();
    signi_cmd->add_option("--pred-b", pred_b_path, "second predictions file")->required();
    signi_cmd->add_option("--dimension", dimension_name, "dimension under test");
    signi_cmd->add_option("--statistic", statistic_name, "spearman|kendall");
    signi_cmd->add_option("--iterations", iterations, "bootstrap iterations");
    signi_cmd->add_option("--fraction", fraction, "document sample fraction per iteration");
    signi_cmd->add_option("--alpha", alpha, "significance level");
    signi_cmd->add_option("--seed", bootstrap_seed, "bootstrap seed");
    signi_cmd->add_flag("--keep-deltas", keep_deltas, "also write per-iteration deltas CSV");
    signi_cmd->add_option("--zero-variance", opt.zero_variance,
                          "zero-variance documents: skip|zero");

    auto* system_cmd = app.add_subcommand("system-eval",
                                          "evaluate and rank systems on a summaries corpus");
    add_common_options(system_cmd, opt);
    add_eval_options(system_cmd, opt);
    system_cmd->add_option("--systems-corpus", systems_corpus_path,
                           "corpus with the system summaries to score")
        ->required();
    system_cmd->add_option("--systems-schema", systems_schema,
                           "schema of the systems corpus: canonical|summeval");

    auto* sweep_seeds_cmd = app.add_subcommand("sweep-seeds",
                                               "repeat evaluation across sampler seeds");
    add_common_options(sweep_seeds_cmd, opt);
    add_eval_options(sweep_seeds_cmd, opt);
    sweep_seeds_cmd->add_option("--seeds", seeds, "sampler seeds")->delimiter(',')->required();

    auto* sweep_counts_cmd = app.add_subcommand("sweep-counts",
                                                "repeat evaluation across example counts");
    add_common_options(sweep_counts_cmd, opt);
    add_eval_options(sweep_counts_cmd, opt);
    sweep_counts_cmd->add_option("--counts", counts, "example counts")->delimiter(',')->required();

    auto* hist_cmd = app.add_subcommand("histogram",
                                        "export human vs predicted score distributions");
    add_common_options(hist_cmd, opt);
    hist_cmd->add_option("--predictions", predictions_path, "predictions.jsonl from evaluate")
        ->required();
    hist_cmd->add_option("--bins", bins, "number of equal-width bins over [0,1]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const std::filesystem::path out_dir = opt.out;

        if (split_cmd->parsed()) {
            const Corpus corpus = load_corpus(opt.corpus, to_run_config(opt).load);
            const Split split = split_corpus(corpus, opt.n_pool_articles, opt.split_seed);
            write_file(out_dir / "split_manifest.json",
                       split_manifest_json(split, opt.n_pool_articles, opt.split_seed) + "\n");
            std::printf("pool: %zu records over %zu articles; test: %zu records\n",
                        split.pool.size(), split.pool_doc_ids.size(), split.test.size());
        } else if (eval_cmd->parsed()) {
            const RunConfig config = to_run_config(opt);
            const EvaluationRun run = run_evaluate(config);
            std::printf("predictions: %zu (cache hits %zu, backend calls %zu, remote %zu)\n",
                        run.predictions.size(), run.cache_hits, run.backend_calls,
                        run.remote_calls);
            for (const auto& [d, s] : run.stats)
                std::printf("%-12s attempted=%zu scored=%zu excluded=%zu clamped=%zu\n",
                            to_string(d), s.attempted, s.scored, s.excluded_parse_failure,
                            s.clamped);
        } else if (meta_cmd->parsed()) {
            const RunConfig config = to_run_config(opt);
            const Corpus corpus = load_corpus(opt.corpus, config.load);
            const auto predictions = load_predictions(predictions_path);
            const auto excluded = exclusions_from_manifest(
                std::filesystem::path(predictions_path).parent_path() / "run_manifest.json");
            const auto reports =
                run_meta_eval(predictions, corpus, config.zero_variance, excluded);
            write_file(out_dir / "correlations.csv", correlation_csv(reports));
            write_file(out_dir / "correlations.json", correlation_json(reports).dump(2) + "\n");
            print_reports(reports);
        } else if (signi_cmd->parsed()) {
            const RunConfig config = to_run_config(opt);
            const Corpus corpus = load_corpus(opt.corpus, config.load);
            const Dimension d = dimension_from_string(dimension_name);
            BootstrapConfig bcfg;
            bcfg.iterations = iterations;
            bcfg.sample_fraction = fraction;
            bcfg.alpha = alpha;
            bcfg.statistic = statistic_from_string(statistic_name);
            bcfg.seed = bootstrap_seed;
            bcfg.keep_deltas = keep_deltas;
            bcfg.zero_variance_policy = config.zero_variance;
            const auto paired_a = build_paired_scores(load_predictions(pred_a_path), corpus, d);
            const auto paired_b = build_paired_scores(load_predictions(pred_b_path), corpus, d);
            const SignificanceResult result = bootstrap_compare(paired_a, paired_b, bcfg);
            write_file(out_dir / "significance.json",
                       significance_json(result, bcfg, d).dump(2) + "\n");
            if (keep_deltas) {
                std::ostringstream deltas;
                deltas << "iteration,delta\n";
                for (std::size_t i = 0; i < result.deltas.size(); ++i)
                    deltas << i << ',' << result.deltas[i] << '\n';
                write_file(out_dir / "significance_deltas.csv", deltas.str());
            }
            std::printf("win_fraction_a=%.3f win_fraction_b=%.3f decision=%s\n",
                        result.win_fraction_a, result.win_fraction_b,
                        to_string(result.decision));
        } else if (system_cmd->parsed()) {
            const RunConfig config = to_run_config(opt);
            LoadOptions systems_load = config.load;
            systems_load.schema = schema_from_string(systems_schema);
            const Corpus systems_corpus = load_corpus(systems_corpus_path, systems_load);
            const SystemEvalResult result = run_system_eval(config, systems_corpus);
            write_file(out_dir / "system_report.csv", system_report_csv(result.report));
            write_file(out_dir / "system_report.json",
                       system_report_json(result.report).dump(2) + "\n");
            write_file(out_dir / "system_predictions.jsonl",
                       predictions_to_jsonl(result.predictions));
            for (const auto& [system_id, s] : result.report.systems)
                std::printf("%-12s overall=%.3f\n", system_id.c_str(), s.overall_mean);
        } else if (sweep_seeds_cmd->parsed()) {
            const RunConfig config = to_run_config(opt);
            const auto by_seed = run_seed_sweep(config, seeds);
            write_file(out_dir / "seed_sweep.csv", seed_sweep_csv(by_seed));
            for (const auto& [seed, reports] : by_seed) {
                std::printf("seed %llu:\n", static_cast<unsigned long long>(seed));
                print_reports(reports);
            }
        } else if (sweep_counts_cmd->parsed()) {
            const RunConfig config = to_run_config(opt);
            const auto by_count = run_count_sweep(config, counts);
            write_file(out_dir / "count_sweep.csv", count_sweep_csv(by_count));
            for (const auto& [k, entry] : by_count) {
                if (entry.skipped)
                    std::printf("k=%zu skipped: %s\n", k, entry.skip_reason.c_str());
                else {
                    std::printf("k=%zu:\n", k);
                    print_reports(entry.reports);
                }
            }
        } else if (hist_cmd->parsed()) {
            const RunConfig config = to_run_config(opt);
            const Corpus corpus = load_corpus(opt.corpus, config.load);
            const auto predictions = load_predictions(predictions_path);
            std::map<RecordKey, const SummaryRecord*> records;
            for (const auto& rec : corpus.records) records[{rec.doc_id, rec.system_id}] = &rec;
            std::map<Dimension, std::vector<std::size_t>> human_hist, pred_hist;
            for (Dimension d : kAllDimensions) {
                std::vector<double> human, predicted;
                for (const auto& p : predictions) {
                    if (p.dimension != d) continue;
                    predicted.push_back(p.score);
                    auto it = records.find({p.doc_id, p.system_id});
                    if (it == records.end())
                        throw_data("prediction references unknown record ('" + p.doc_id +
                                   "', '" + p.system_id + "')");
                    if (auto score = it->second->human_score(d)) human.push_back(*score);
                }
                if (predicted.empty()) continue;
                human_hist[d] = score_histogram(human, bins);
                pred_hist[d] = score_histogram(predicted, bins);
            }
            write_file(out_dir / "histogram.csv", histogram_csv(human_hist, pred_hist, bins));
            std::printf("histogram written for %zu dimensions\n", human_hist.size());
        }
        return 0;
    } catch (const Error& e) {
        std::fprintf(stderr, "error (%s): %s\n", to_string(e.category()), e.what());
        return exit_code_for(e.category());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
