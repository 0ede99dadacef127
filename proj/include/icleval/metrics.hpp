#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "icleval/backend.hpp"
#include "icleval/corpus.hpp"

namespace icleval {

// Human/predicted score pairs for one dimension, grouped by document.
// Correlations are computed within a document (across its systems) and then
// averaged over documents.
struct ScorePair {
    std::string system_id;
    double human = 0.0;
    double predicted = 0.0;
};

struct PairedScores {
    Dimension dimension = Dimension::coherence;
    std::map<std::string, std::vector<ScorePair>> by_doc;
};

enum class ZeroVariancePolicy { skip, zero };

ZeroVariancePolicy zero_variance_policy_from_string(const std::string& name);
const char* to_string(ZeroVariancePolicy p);

struct CorrelationReport {
    Dimension dimension = Dimension::coherence;
    double spearman_rho = 0.0;
    double kendall_tau = 0.0;
    std::size_t documents_used = 0;
    std::size_t documents_skipped_zero_variance = 0;
    std::size_t instances_excluded_parse_failure = 0;
    ZeroVariancePolicy zero_variance_policy = ZeroVariancePolicy::skip;
};

// Spearman rank correlation: Pearson correlation of average ranks, with
// tied values sharing the mean rank. Requires length >= 2 and nonzero
// variance on both sides.
double spearman(std::span<const double> x, std::span<const double> y);

// Kendall tau-b: (concordant - discordant) / sqrt((n0-n1)(n0-n2)) with the
// usual tie corrections. Same preconditions as spearman.
double kendall_tau(std::span<const double> x, std::span<const double> y);

// Per-document rho and tau across systems, averaged over usable documents.
// Documents where either score list is constant are skipped and counted, or
// scored as zero under ZeroVariancePolicy::zero.
CorrelationReport summary_level(const PairedScores& paired,
                                ZeroVariancePolicy policy = ZeroVariancePolicy::skip);

// ROUGE-L F-measure over lowercase alphanumeric tokens: longest common
// subsequence length L, P = L/|candidate|, R = L/|reference|, F = 2PR/(P+R).
double rouge_l(const std::string& candidate, const std::string& reference);

struct SystemSummary {
    std::map<Dimension, double> dimension_means;
    double overall_mean = 0.0;
    std::optional<double> rouge_l_mean;
    std::size_t predictions = 0;
};

struct SystemReport {
    std::map<std::string, SystemSummary> systems;
    std::map<Dimension, std::string> best_system;
    std::map<Dimension, std::string> worst_system;
};

// Per-system mean predicted score per dimension plus the overall mean.
// When compute_rouge is set and documents carry references, also the mean
// ROUGE-L of each system's summaries against the first reference.
SystemReport system_aggregate(const std::vector<Prediction>& predictions, const Corpus& corpus,
                              bool compute_rouge = false);

// Equal-width histogram over [0,1]; interior bins are right-open, the final
// bin right-closed. Scores outside [0,1] are an error.
std::vector<std::size_t> score_histogram(std::span<const double> scores, std::size_t bins);

}  // namespace icleval
