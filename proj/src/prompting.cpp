#include "icleval/prompting.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "icleval/error.hpp"

#ifndef ICLEVAL_DEFAULT_TEMPLATE_DIR
#define ICLEVAL_DEFAULT_TEMPLATE_DIR "templates"
#endif

namespace icleval {

namespace {

constexpr const char* kScoreSlot = "{score}";

std::string rstrip(std::string text) {
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\n' ||
                             text.back() == '\r'))
        text.pop_back();
    return text;
}

void validate_placeholders(const std::string& block, Dimension d) {
    const bool has_source = block.find("{source}") != std::string::npos;
    const bool has_reference = block.find("{reference}") != std::string::npos;
    if (block.find("{summary}") == std::string::npos)
        throw_config("template for " + std::string(to_string(d)) + " lacks {summary}");
    if (needs_source(d) != has_source)
        throw_config("template for " + std::string(to_string(d)) +
                     (needs_source(d) ? " lacks {source}" : " must not use {source}"));
    if (needs_reference(d) != has_reference)
        throw_config("template for " + std::string(to_string(d)) +
                     (needs_reference(d) ? " lacks {reference}" : " must not use {reference}"));
    const std::string stripped = rstrip(block);
    const std::size_t slot_len = std::char_traits<char>::length(kScoreSlot);
    if (stripped.size() < slot_len || stripped.substr(stripped.size() - slot_len) != kScoreSlot ||
        stripped.find(kScoreSlot) != stripped.size() - slot_len)
        throw_config("template for " + std::string(to_string(d)) +
                     " must end with exactly one {score} placeholder");
}

}  // namespace

PromptTemplate PromptTemplate::parse(const std::string& text, Dimension dimension) {
    const std::size_t sep = text.find("\n\n");
    if (sep == std::string::npos)
        throw_config("template must contain an instruction paragraph, a blank line, and a block");
    PromptTemplate tmpl;
    tmpl.dimension = dimension;
    tmpl.instruction_text = rstrip(text.substr(0, sep));
    std::string block = text.substr(sep + 2);
    while (!block.empty() && block.front() == '\n') block.erase(block.begin());
    tmpl.block_layout = rstrip(block);
    if (tmpl.instruction_text.empty()) throw_config("template instruction is empty");
    validate_placeholders(tmpl.block_layout, dimension);
    return tmpl;
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path, Dimension dimension) {
    std::ifstream in(path);
    if (!in) throw_config("cannot open template file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), dimension);
}

std::map<Dimension, PromptTemplate> load_template_set(const std::filesystem::path& dir) {
    std::map<Dimension, PromptTemplate> set;
    for (Dimension d : kAllDimensions)
        set.emplace(d, PromptTemplate::load(dir / (std::string(to_string(d)) + ".tmpl"), d));
    return set;
}

std::filesystem::path default_template_dir() { return ICLEVAL_DEFAULT_TEMPLATE_DIR; }

std::string format_score(double score) {
    if (!(score >= 0.0 && score <= 1.0))
        throw_data("score " + std::to_string(score) + " outside [0,1]");
    // round half away from zero on the hundredths grid
    const int cents = static_cast<int>(std::floor(score * 100.0 + 0.5));
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%d.%02d", cents / 100, cents % 100);
    return buf;
}

std::size_t estimate_tokens(const std::string& text) { return (text.size() + 3) / 4; }

namespace {

struct BlockFields {
    std::string summary;
    std::optional<std::string> source;
    std::optional<std::string> reference;
};

// Single pass over the layout; substituted text is never rescanned, so
// placeholder-looking strings inside summaries or sources stay literal.
// An absent `score` truncates the block at the score slot (test instance).
std::string render_block(const PromptTemplate& tmpl, const BlockFields& fields,
                         const std::optional<std::string>& score, const std::string& who) {
    if (fields.summary.empty()) throw_data(who + ": empty summary");
    if (needs_source(tmpl.dimension) && (!fields.source || fields.source->empty()))
        throw_data(who + ": missing source");
    if (needs_reference(tmpl.dimension) && (!fields.reference || fields.reference->empty()))
        throw_data(who + ": missing reference");

    const std::string& layout = tmpl.block_layout;
    std::string out;
    out.reserve(layout.size() + fields.summary.size());
    std::size_t pos = 0;
    while (pos < layout.size()) {
        const std::size_t open = layout.find('{', pos);
        if (open == std::string::npos) {
            out.append(layout, pos, std::string::npos);
            break;
        }
        out.append(layout, pos, open - pos);
        const std::size_t close = layout.find('}', open);
        if (close == std::string::npos) {
            out.append(layout, open, std::string::npos);
            break;
        }
        const std::string name = layout.substr(open + 1, close - open - 1);
        if (name == "summary") {
            out += fields.summary;
        } else if (name == "source" && fields.source) {
            out += *fields.source;
        } else if (name == "reference" && fields.reference) {
            out += *fields.reference;
        } else if (name == "score") {
            if (!score) return rstrip(out);
            out += *score;
        } else {
            out.append(layout, open, close - open + 1);  // unknown: keep literal
        }
        pos = close + 1;
    }
    return out;
}

BlockFields fields_for_example(const PoolExample& ex, const Corpus& corpus,
                               const std::string& who) {
    BlockFields fields;
    fields.summary = ex.record.summary_text;
    const Document* doc = corpus.find_document(ex.record.doc_id);
    if (!doc) throw_data(who + ": doc_id '" + ex.record.doc_id + "' not in corpus");
    fields.source = doc->source_text;
    if (!doc->references.empty()) fields.reference = doc->references.front();
    return fields;
}

}  // namespace

RenderedPrompt render_prompt(const PromptTemplate& tmpl, const std::vector<PoolExample>& examples,
                             const EvaluationInstance& test, const Corpus& corpus,
                             bool allow_zero_shot) {
    if (test.dimension != tmpl.dimension)
        throw_config("test instance dimension does not match the template");
    if (examples.empty() && !allow_zero_shot)
        throw_config("no in-context examples given and zero-shot mode not enabled");

    std::ostringstream out;
    out << tmpl.instruction_text;

    std::size_t i = 0;
    for (const auto& ex : examples) {
        ++i;
        const std::string who = "example " + std::to_string(i) + " ('" + ex.record.doc_id +
                                "', '" + ex.record.system_id + "')";
        out << "\n\n"
            << render_block(tmpl, fields_for_example(ex, corpus, who),
                            format_score(ex.aspect_score), who);
    }

    BlockFields test_fields{test.summary_text, test.source_text, test.reference_text};
    out << "\n\n" << render_block(tmpl, test_fields, std::nullopt, "test instance");

    RenderedPrompt prompt;
    prompt.text = out.str();
    prompt.example_count = examples.size();
    prompt.estimated_tokens = estimate_tokens(prompt.text);
    return prompt;
}

BudgetCheck check_budget(const RenderedPrompt& prompt, std::size_t context_window,
                         std::size_t reserved_completion) {
    if (context_window <= reserved_completion)
        throw_config("context window must exceed the reserved completion tokens");
    BudgetCheck result;
    result.estimated_tokens = prompt.estimated_tokens;
    result.limit = context_window - reserved_completion;
    result.ok = prompt.estimated_tokens <= result.limit;
    result.overshoot = result.ok ? 0 : prompt.estimated_tokens - result.limit;
    return result;
}

}  // namespace icleval
