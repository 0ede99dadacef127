#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icleval/metrics.hpp"

namespace icleval {

enum class Statistic { spearman, kendall };

Statistic statistic_from_string(const std::string& name);
const char* to_string(Statistic s);

struct BootstrapConfig {
    std::size_t iterations = 1000;
    double sample_fraction = 0.8;
    double alpha = 0.05;
    Statistic statistic = Statistic::spearman;
    std::uint64_t seed = 0;
    bool keep_deltas = false;
    ZeroVariancePolicy zero_variance_policy = ZeroVariancePolicy::skip;
};

enum class Decision { a_better, b_better, inconclusive };

const char* to_string(Decision d);

struct SignificanceResult {
    double win_fraction_a = 0.0;  // fraction of iterations where A strictly beat B
    double win_fraction_b = 0.0;  // ties count as non-wins for both sides
    Decision decision = Decision::inconclusive;
    std::vector<double> deltas;  // per-iteration (stat_a - stat_b), when kept
    std::size_t redrawn_iterations = 0;
};

// Paired bootstrap over documents: each iteration draws
// floor(sample_fraction * D) documents without replacement, computes the
// configured summary-level statistic for both metrics on that subsample,
// and counts strict wins. A side is declared better when its win fraction
// reaches 1 - alpha; with ties counted for neither side, identical metrics
// come out inconclusive. Per-iteration streams derive from (seed, index),
// so results do not depend on execution order.
SignificanceResult bootstrap_compare(const PairedScores& pred_a, const PairedScores& pred_b,
                                     const BootstrapConfig& config);

}  // namespace icleval
