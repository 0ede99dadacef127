#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace icleval {

// The four quality dimensions. Each carries a context requirement:
// consistency is judged against the source text, relevance against a
// reference summary, fluency and coherence against the summary alone.
enum class Dimension { coherence, consistency, fluency, relevance };

constexpr Dimension kAllDimensions[] = {Dimension::coherence, Dimension::consistency,
                                        Dimension::fluency, Dimension::relevance};

const char* to_string(Dimension d);
Dimension dimension_from_string(const std::string& name);
bool needs_source(Dimension d);
bool needs_reference(Dimension d);

// A source article plus its reference summaries.
struct Document {
    std::string doc_id;
    std::string source_text;
    std::vector<std::string> references;
};

// One system's summary of one document, with human annotations.
// `human_scores` holds [0,1] values (annotators averaged, then affinely
// mapped from the raw scale); `raw_scores` preserves the per-annotator
// values exactly as loaded. Records without annotations are allowed and
// simply carry empty maps.
struct SummaryRecord {
    std::string doc_id;
    std::string system_id;
    std::string summary_text;
    std::map<Dimension, double> human_scores;
    std::map<Dimension, std::vector<double>> raw_scores;
    std::map<Dimension, bool> raw_scalar;  // raw value was a plain number, not an array

    std::optional<double> human_score(Dimension d) const {
        auto it = human_scores.find(d);
        if (it == human_scores.end()) return std::nullopt;
        return it->second;
    }
};

struct ScoreScale {
    double min = 1.0;
    double max = 5.0;
};

struct Corpus {
    std::vector<Document> documents;
    std::vector<SummaryRecord> records;
    ScoreScale raw_score_scale;
    // doc_ids whose reference list is empty; relevance evaluation over these
    // fails at prompt-build time.
    std::set<std::string> docs_missing_references;

    const Document* find_document(const std::string& doc_id) const;
    std::size_t systems_per_document() const;  // 0 if the corpus is not rectangular
};

struct RecordKey {
    std::string doc_id;
    std::string system_id;
    auto operator<=>(const RecordKey&) const = default;
};

struct Split {
    std::vector<SummaryRecord> pool;
    std::vector<SummaryRecord> test;
    std::set<std::string> pool_doc_ids;
};

enum class CorpusSchema { canonical, summeval };
enum class AnnotationSource { expert, turker };

CorpusSchema schema_from_string(const std::string& name);

struct LoadOptions {
    CorpusSchema schema = CorpusSchema::canonical;
    ScoreScale scale;  // the raw annotation scale, declared by the caller
    AnnotationSource annotations = AnnotationSource::expert;  // summeval schema only
};

// Reads a line-delimited JSON corpus. Canonical records carry doc_id,
// system_id, source, references, summary, scores; the summeval schema maps
// the published SummEval annotation layout onto the same model. Scores may
// be a single number or a per-annotator array; annotators are averaged
// before normalization. Malformed input raises a data error naming the line.
Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options);

// Affine map from the raw annotation scale to [0,1].
double normalize_score(double raw, const ScoreScale& scale);

// Serializes back to canonical line-delimited JSON. Loading the result
// reproduces every stored field; normalization-derived values are recomputed.
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
std::string corpus_to_jsonl(const Corpus& corpus);

// Picks n_pool_articles documents uniformly at random under the seed. All
// records of the chosen documents form the pool; everything else is the test
// set, so no doc_id ever straddles the two sides.
Split split_corpus(const Corpus& corpus, std::size_t n_pool_articles, std::uint64_t seed);

std::string split_manifest_json(const Split& split, std::size_t n_pool_articles,
                                std::uint64_t seed);

}  // namespace icleval
