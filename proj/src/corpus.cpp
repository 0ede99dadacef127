#include "icleval/corpus.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "icleval/error.hpp"
#include "icleval/rng.hpp"

namespace icleval {

using nlohmann::json;

const char* to_string(Dimension d) {
    switch (d) {
    case Dimension::coherence: return "coherence";
    case Dimension::consistency: return "consistency";
    case Dimension::fluency: return "fluency";
    case Dimension::relevance: return "relevance";
    }
    return "?";
}

Dimension dimension_from_string(const std::string& name) {
    for (Dimension d : kAllDimensions)
        if (name == to_string(d)) return d;
    throw_config("unknown dimension '" + name + "'");
}

bool needs_source(Dimension d) { return d == Dimension::consistency; }
bool needs_reference(Dimension d) { return d == Dimension::relevance; }

const Document* Corpus::find_document(const std::string& doc_id) const {
    for (const auto& doc : documents)
        if (doc.doc_id == doc_id) return &doc;
    return nullptr;
}

std::size_t Corpus::systems_per_document() const {
    if (documents.empty()) return 0;
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& rec : records) counts[rec.doc_id]++;
    const std::size_t first = counts.begin()->second;
    for (const auto& [_, n] : counts)
        if (n != first) return 0;
    return first;
}

double normalize_score(double raw, const ScoreScale& scale) {
    if (!(scale.min < scale.max))
        throw_config("invalid score scale: min must be less than max");
    if (raw < scale.min || raw > scale.max) {
        std::ostringstream os;
        os << "raw score " << raw << " outside declared scale [" << scale.min << ", "
           << scale.max << "]";
        throw_data(os.str());
    }
    return (raw - scale.min) / (scale.max - scale.min);
}

namespace {

[[noreturn]] void record_error(std::size_t line_no, const std::string& what) {
    throw_data("record at line " + std::to_string(line_no) + ": " + what);
}

std::vector<double> score_values(const json& value, std::size_t line_no, const char* dim_name,
                                 bool* was_scalar) {
    std::vector<double> out;
    if (value.is_number()) {
        out.push_back(value.get<double>());
        *was_scalar = true;
    } else if (value.is_array()) {
        *was_scalar = false;
        for (const auto& v : value) {
            if (!v.is_number())
                record_error(line_no, std::string("non-numeric ") + dim_name + " score entry");
            out.push_back(v.get<double>());
        }
        if (out.empty())
            record_error(line_no, std::string("empty ") + dim_name + " score array");
    } else {
        record_error(line_no, std::string(dim_name) + " score must be a number or array");
    }
    return out;
}

struct RawRecord {
    std::string doc_id;
    std::string system_id;
    std::string source;
    std::vector<std::string> references;
    std::string summary;
    std::map<Dimension, std::vector<double>> raw_scores;
    std::map<Dimension, bool> raw_scalar;
    std::size_t line_no = 0;
};

RawRecord parse_canonical(const json& j, std::size_t line_no) {
    RawRecord r;
    r.line_no = line_no;
    for (const char* field : {"doc_id", "system_id", "source", "summary"})
        if (!j.contains(field) || !j.at(field).is_string())
            record_error(line_no, std::string("missing or non-string field '") + field + "'");
    r.doc_id = j.at("doc_id").get<std::string>();
    r.system_id = j.at("system_id").get<std::string>();
    r.source = j.at("source").get<std::string>();
    r.summary = j.at("summary").get<std::string>();
    if (j.contains("references")) {
        if (!j.at("references").is_array())
            record_error(line_no, "'references' must be an array of strings");
        for (const auto& ref : j.at("references")) {
            if (!ref.is_string()) record_error(line_no, "non-string reference entry");
            r.references.push_back(ref.get<std::string>());
        }
    }
    if (j.contains("scores")) {
        const auto& scores = j.at("scores");
        if (!scores.is_object()) record_error(line_no, "'scores' must be an object");
        for (Dimension d : kAllDimensions) {
            if (!scores.contains(to_string(d))) continue;
            bool scalar = false;
            r.raw_scores[d] = score_values(scores.at(to_string(d)), line_no, to_string(d), &scalar);
            r.raw_scalar[d] = scalar;
        }
    }
    return r;
}

// Published SummEval annotation layout: id / model_id / text / decoded /
// references / {expert,turker}_annotations, the latter being arrays of
// one object per annotator with the four dimension keys.
RawRecord parse_summeval(const json& j, std::size_t line_no, AnnotationSource ann) {
    RawRecord r;
    r.line_no = line_no;
    for (const char* field : {"id", "model_id", "decoded"})
        if (!j.contains(field) || !j.at(field).is_string())
            record_error(line_no, std::string("missing or non-string field '") + field + "'");
    r.doc_id = j.at("id").get<std::string>();
    r.system_id = j.at("model_id").get<std::string>();
    r.summary = j.at("decoded").get<std::string>();
    if (j.contains("text") && j.at("text").is_string())
        r.source = j.at("text").get<std::string>();
    if (j.contains("references") && j.at("references").is_array())
        for (const auto& ref : j.at("references"))
            if (ref.is_string()) r.references.push_back(ref.get<std::string>());

    const char* key = ann == AnnotationSource::expert ? "expert_annotations" : "turker_annotations";
    if (!j.contains(key) || !j.at(key).is_array())
        record_error(line_no, std::string("missing annotation array '") + key + "'");
    for (const auto& annotator : j.at(key)) {
        if (!annotator.is_object()) record_error(line_no, "annotation entry must be an object");
        for (Dimension d : kAllDimensions) {
            if (!annotator.contains(to_string(d)))
                record_error(line_no,
                             std::string("annotation entry missing '") + to_string(d) + "'");
            r.raw_scores[d].push_back(annotator.at(to_string(d)).get<double>());
            r.raw_scalar[d] = false;
        }
    }
    return r;
}

}  // namespace

CorpusSchema schema_from_string(const std::string& name) {
    if (name == "canonical") return CorpusSchema::canonical;
    if (name == "summeval") return CorpusSchema::summeval;
    throw_config("unknown corpus schema '" + name + "'");
}

Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options) {
    std::ifstream in(path);
    if (!in) throw_config("cannot open corpus file: " + path.string());

    Corpus corpus;
    corpus.raw_score_scale = options.scale;

    std::unordered_map<std::string, std::size_t> doc_index;
    std::set<RecordKey> seen_keys;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& ex) {
            record_error(line_no, std::string("invalid JSON: ") + ex.what());
        }
        RawRecord raw = options.schema == CorpusSchema::canonical
                            ? parse_canonical(j, line_no)
                            : parse_summeval(j, line_no, options.annotations);
        if (raw.doc_id.empty()) record_error(line_no, "empty doc_id");
        if (raw.summary.empty()) record_error(line_no, "empty summary");

        auto [it, inserted] = doc_index.try_emplace(raw.doc_id, corpus.documents.size());
        if (inserted) {
            if (raw.source.empty()) record_error(line_no, "empty source text");
            corpus.documents.push_back({raw.doc_id, raw.source, raw.references});
            if (raw.references.empty()) corpus.docs_missing_references.insert(raw.doc_id);
        } else {
            const Document& doc = corpus.documents[it->second];
            if (!raw.source.empty() && raw.source != doc.source_text)
                record_error(line_no, "conflicting source text for doc_id '" + raw.doc_id + "'");
        }

        RecordKey key{raw.doc_id, raw.system_id};
        if (!seen_keys.insert(key).second)
            record_error(line_no, "duplicate (doc_id, system_id) pair ('" + raw.doc_id + "', '" +
                                      raw.system_id + "')");

        SummaryRecord rec;
        rec.doc_id = raw.doc_id;
        rec.system_id = raw.system_id;
        rec.summary_text = raw.summary;
        rec.raw_scores = raw.raw_scores;
        rec.raw_scalar = raw.raw_scalar;
        for (const auto& [dim, values] : raw.raw_scores) {
            double sum = 0.0;
            for (double v : values) {
                if (v < options.scale.min || v > options.scale.max) {
                    std::ostringstream os;
                    os << "record at line " << raw.line_no << ": " << to_string(dim) << " score "
                       << v << " outside declared scale [" << options.scale.min << ", "
                       << options.scale.max << "]";
                    throw_data(os.str());
                }
                sum += v;
            }
            rec.human_scores[dim] =
                normalize_score(sum / static_cast<double>(values.size()), options.scale);
        }
        corpus.records.push_back(std::move(rec));
    }

    if (corpus.records.empty()) throw_data("empty corpus: " + path.string());
    return corpus;
}

std::string corpus_to_jsonl(const Corpus& corpus) {
    std::unordered_map<std::string, const Document*> docs;
    for (const auto& doc : corpus.documents) docs[doc.doc_id] = &doc;

    std::ostringstream out;
    for (const auto& rec : corpus.records) {
        const Document* doc = docs.at(rec.doc_id);
        json j;
        j["doc_id"] = rec.doc_id;
        j["system_id"] = rec.system_id;
        j["source"] = doc->source_text;
        j["references"] = doc->references;
        j["summary"] = rec.summary_text;
        json scores = json::object();
        for (const auto& [dim, values] : rec.raw_scores) {
            const bool scalar = rec.raw_scalar.count(dim) && rec.raw_scalar.at(dim);
            if (scalar && values.size() == 1)
                scores[to_string(dim)] = values[0];
            else
                scores[to_string(dim)] = values;
        }
        j["scores"] = std::move(scores);
        out << j.dump() << '\n';
    }
    return out.str();
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw_config("cannot write corpus file: " + path.string());
    out << corpus_to_jsonl(corpus);
}

Split split_corpus(const Corpus& corpus, std::size_t n_pool_articles, std::uint64_t seed) {
    const std::size_t n_docs = corpus.documents.size();
    if (n_pool_articles == 0 || n_pool_articles >= n_docs)
        throw_config("n_pool_articles must be in (0, " + std::to_string(n_docs) +
                     "); got " + std::to_string(n_pool_articles));

    Rng rng(seed);
    Split split;
    for (std::size_t i : rng.sample_indices(n_docs, n_pool_articles))
        split.pool_doc_ids.insert(corpus.documents[i].doc_id);

    for (const auto& rec : corpus.records) {
        if (split.pool_doc_ids.count(rec.doc_id))
            split.pool.push_back(rec);
        else
            split.test.push_back(rec);
    }
    return split;
}

std::string split_manifest_json(const Split& split, std::size_t n_pool_articles,
                                std::uint64_t seed) {
    json j;
    j["n_pool_articles"] = n_pool_articles;
    j["seed"] = seed;
    j["pool_doc_ids"] = split.pool_doc_ids;
    auto keys = [](const std::vector<SummaryRecord>& records) {
        json arr = json::array();
        for (const auto& rec : records)
            arr.push_back({{"doc_id", rec.doc_id}, {"system_id", rec.system_id}});
        return arr;
    };
    j["pool"] = keys(split.pool);
    j["test"] = keys(split.test);
    return j.dump(2);
}

}  // namespace icleval
