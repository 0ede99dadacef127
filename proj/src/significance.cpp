#include "icleval/significance.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>

#include "icleval/error.hpp"
#include "icleval/rng.hpp"

namespace icleval {

Statistic statistic_from_string(const std::string& name) {
    if (name == "spearman") return Statistic::spearman;
    if (name == "kendall") return Statistic::kendall;
    throw_config("unknown statistic '" + name + "'");
}

const char* to_string(Statistic s) { return s == Statistic::spearman ? "spearman" : "kendall"; }

const char* to_string(Decision d) {
    switch (d) {
    case Decision::a_better: return "a_better";
    case Decision::b_better: return "b_better";
    case Decision::inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

void check_same_keys(const PairedScores& a, const PairedScores& b) {
    std::set<std::pair<std::string, std::string>> keys_a, keys_b;
    for (const auto& [doc, pairs] : a.by_doc)
        for (const auto& p : pairs) keys_a.emplace(doc, p.system_id);
    for (const auto& [doc, pairs] : b.by_doc)
        for (const auto& p : pairs) keys_b.emplace(doc, p.system_id);
    if (keys_a == keys_b) return;

    std::vector<std::pair<std::string, std::string>> diff;
    std::set_symmetric_difference(keys_a.begin(), keys_a.end(), keys_b.begin(), keys_b.end(),
                                  std::back_inserter(diff));
    std::ostringstream os;
    os << "bootstrap inputs cover different keys; symmetric difference has " << diff.size()
       << " entries:";
    for (std::size_t i = 0; i < diff.size() && i < 8; ++i)
        os << " ('" << diff[i].first << "', '" << diff[i].second << "')";
    if (diff.size() > 8) os << " ...";
    throw_data(os.str());
}

// Mean per-document statistic over the chosen documents, or nullopt when no
// document in the subsample is usable.
std::optional<double> subsample_statistic(const PairedScores& paired,
                                          const std::vector<const std::string*>& docs,
                                          Statistic stat, ZeroVariancePolicy policy) {
    double sum = 0.0;
    std::size_t used = 0;
    for (const std::string* doc : docs) {
        const auto& pairs = paired.by_doc.at(*doc);
        std::vector<double> human, predicted;
        human.reserve(pairs.size());
        predicted.reserve(pairs.size());
        for (const auto& p : pairs) {
            human.push_back(p.human);
            predicted.push_back(p.predicted);
        }
        const bool degenerate = human.size() < 2 ||
                                std::all_of(human.begin(), human.end(),
                                            [&](double v) { return v == human.front(); }) ||
                                std::all_of(predicted.begin(), predicted.end(),
                                            [&](double v) { return v == predicted.front(); });
        if (degenerate) {
            if (policy == ZeroVariancePolicy::zero) ++used;
            continue;
        }
        sum += stat == Statistic::spearman ? spearman(human, predicted)
                                           : kendall_tau(human, predicted);
        ++used;
    }
    if (used == 0) return std::nullopt;
    return sum / static_cast<double>(used);
}

}  // namespace

SignificanceResult bootstrap_compare(const PairedScores& pred_a, const PairedScores& pred_b,
                                     const BootstrapConfig& config) {
    if (config.iterations == 0) throw_config("bootstrap iterations must be at least 1");
    if (!(config.sample_fraction > 0.0 && config.sample_fraction <= 1.0))
        throw_config("sample fraction must be in (0, 1]");
    check_same_keys(pred_a, pred_b);

    std::vector<const std::string*> all_docs;
    for (const auto& [doc, _] : pred_a.by_doc) all_docs.push_back(&doc);
    const std::size_t n_docs = all_docs.size();
    const auto n_draw = static_cast<std::size_t>(config.sample_fraction *
                                                 static_cast<double>(n_docs));
    if (n_draw == 0)
        throw_config("sample fraction " + std::to_string(config.sample_fraction) +
                     " selects zero of " + std::to_string(n_docs) + " documents");

    SignificanceResult result;
    if (config.keep_deltas) result.deltas.reserve(config.iterations);
    std::size_t wins_a = 0, wins_b = 0;

    for (std::size_t iter = 0; iter < config.iterations; ++iter) {
        Rng rng(hash_combine(config.seed, static_cast<std::uint64_t>(iter)));
        std::optional<double> stat_a, stat_b;
        constexpr std::size_t kMaxRedraws = 1000;
        std::size_t attempts = 0;
        for (;;) {
            std::vector<const std::string*> docs;
            docs.reserve(n_draw);
            for (std::size_t idx : rng.sample_indices(n_docs, n_draw))
                docs.push_back(all_docs[idx]);
            stat_a = subsample_statistic(pred_a, docs, config.statistic,
                                         config.zero_variance_policy);
            stat_b = subsample_statistic(pred_b, docs, config.statistic,
                                         config.zero_variance_policy);
            if (stat_a && stat_b) break;
            result.redrawn_iterations++;
            if (++attempts >= kMaxRedraws)
                throw_data("bootstrap cannot find a usable subsample after " +
                           std::to_string(kMaxRedraws) + " redraws");
        }
        if (*stat_a > *stat_b)
            ++wins_a;
        else if (*stat_b > *stat_a)
            ++wins_b;
        if (config.keep_deltas) result.deltas.push_back(*stat_a - *stat_b);
    }

    const auto iters = static_cast<double>(config.iterations);
    result.win_fraction_a = static_cast<double>(wins_a) / iters;
    result.win_fraction_b = static_cast<double>(wins_b) / iters;
    if (result.win_fraction_a >= 1.0 - config.alpha)
        result.decision = Decision::a_better;
    else if (result.win_fraction_b >= 1.0 - config.alpha)
        result.decision = Decision::b_better;
    else
        result.decision = Decision::inconclusive;
    return result;
}

}  // namespace icleval
