#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "icleval/corpus.hpp"
#include "icleval/sampling.hpp"

namespace icleval {

// One summary to be scored, with whatever context its dimension requires.
struct EvaluationInstance {
    std::string summary_text;
    std::optional<std::string> source_text;
    std::optional<std::string> reference_text;
    Dimension dimension = Dimension::coherence;
};

// A per-dimension prompt layout loaded from a template file. The file holds
// the instruction paragraph, a blank line, then the example block with
// {source} / {reference} / {summary} / {score} placeholders. The block must
// end at the score placeholder so the rendered prompt can stop at the score
// label of the test instance.
struct PromptTemplate {
    Dimension dimension = Dimension::coherence;
    std::string instruction_text;
    std::string block_layout;

    static PromptTemplate load(const std::filesystem::path& path, Dimension dimension);
    static PromptTemplate parse(const std::string& text, Dimension dimension);
};

// Loads <dir>/<dimension>.tmpl for every dimension.
std::map<Dimension, PromptTemplate> load_template_set(const std::filesystem::path& dir);

// The template set shipped with the repo (compile-time default path).
std::filesystem::path default_template_dir();

struct RenderedPrompt {
    std::string text;
    std::size_t example_count = 0;
    std::size_t estimated_tokens = 0;
};

// Fixed two-decimal rendering of a score in [0,1] ("0.00".."1.00"),
// round half away from zero.
std::string format_score(double score);

// Deliberately crude token estimate: ceil(characters / 4). Good enough to
// decide whether a prompt plausibly fits a context window; documented as
// approximate wherever it is surfaced.
std::size_t estimate_tokens(const std::string& text);

// Instruction, then one block per in-context example (in the order given),
// then the test block cut off at the score label. Set allow_zero_shot to
// render with no examples at all.
RenderedPrompt render_prompt(const PromptTemplate& tmpl, const std::vector<PoolExample>& examples,
                             const EvaluationInstance& test, const Corpus& corpus,
                             bool allow_zero_shot = false);

struct BudgetCheck {
    bool ok = false;
    std::size_t estimated_tokens = 0;
    std::size_t limit = 0;      // context_window - reserved_completion
    std::size_t overshoot = 0;  // tokens over the limit when !ok
};

// Pass iff estimated prompt tokens + reserved completion tokens fit in the
// context window. Never truncates; failing prompts are the caller's problem.
BudgetCheck check_budget(const RenderedPrompt& prompt, std::size_t context_window,
                         std::size_t reserved_completion);

}  // namespace icleval
