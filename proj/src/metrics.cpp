#include "icleval/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "icleval/error.hpp"

namespace icleval {

ZeroVariancePolicy zero_variance_policy_from_string(const std::string& name) {
    if (name == "skip") return ZeroVariancePolicy::skip;
    if (name == "zero") return ZeroVariancePolicy::zero;
    throw_config("unknown zero-variance policy '" + name + "'");
}

const char* to_string(ZeroVariancePolicy p) {
    return p == ZeroVariancePolicy::skip ? "skip" : "zero";
}

namespace {

bool is_constant(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

void check_correlation_inputs(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw_data("correlation inputs differ in length (" + std::to_string(x.size()) + " vs " +
                   std::to_string(y.size()) + ")");
    if (x.size() < 2) throw_data("correlation needs at least 2 observations");
    if (is_constant(x) || is_constant(y))
        throw_data("correlation undefined for a zero-variance input");
}

// Average ranks, 1-based; tied values share the mean of their rank range.
std::vector<double> average_ranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    const double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double cov = 0.0, var_x = 0.0, var_y = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    return cov / std::sqrt(var_x * var_y);
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
    check_correlation_inputs(x, y);
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    return pearson(rx, ry);
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
    check_correlation_inputs(x, y);
    long long concordant = 0, discordant = 0, ties_x_only = 0, ties_y_only = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            const double dx = x[i] - x[j];
            const double dy = y[i] - y[j];
            if (dx == 0.0 && dy == 0.0) continue;  // tied in both: drops out entirely
            if (dx == 0.0)
                ++ties_x_only;
            else if (dy == 0.0)
                ++ties_y_only;
            else if (dx * dy > 0.0)
                ++concordant;
            else
                ++discordant;
        }
    }
    // (n0 - n1) = pairs not tied in x = C + D + pairs tied in y only, and
    // symmetrically for y; only the product matters.
    const double cd = static_cast<double>(concordant + discordant);
    const double denom = std::sqrt((cd + static_cast<double>(ties_y_only)) *
                                   (cd + static_cast<double>(ties_x_only)));
    return static_cast<double>(concordant - discordant) / denom;
}

CorrelationReport summary_level(const PairedScores& paired, ZeroVariancePolicy policy) {
    CorrelationReport report;
    report.dimension = paired.dimension;
    report.zero_variance_policy = policy;

    double rho_sum = 0.0, tau_sum = 0.0;
    std::size_t used = 0, skipped = 0;
    for (const auto& [doc_id, pairs] : paired.by_doc) {
        std::vector<double> human, predicted;
        human.reserve(pairs.size());
        predicted.reserve(pairs.size());
        for (const auto& p : pairs) {
            human.push_back(p.human);
            predicted.push_back(p.predicted);
        }
        const bool degenerate =
            human.size() < 2 || is_constant(human) || is_constant(predicted);
        if (degenerate) {
            if (policy == ZeroVariancePolicy::skip) {
                ++skipped;
                continue;
            }
            ++used;  // contributes 0 to both sums
            continue;
        }
        rho_sum += spearman(human, predicted);
        tau_sum += kendall_tau(human, predicted);
        ++used;
    }
    if (used == 0) throw_data("no usable documents for summary-level correlation");
    report.spearman_rho = rho_sum / static_cast<double>(used);
    report.kendall_tau = tau_sum / static_cast<double>(used);
    report.documents_used = used;
    report.documents_skipped_zero_variance = skipped;
    return report;
}

namespace {

std::vector<std::string> tokenize_lower(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (const char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            current.push_back(
                static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<std::size_t> prev(b.size() + 1, 0), curr(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1])
                curr[j] = prev[j - 1] + 1;
            else
                curr[j] = std::max(prev[j], curr[j - 1]);
        }
        std::swap(prev, curr);
    }
    return prev[b.size()];
}

}  // namespace

double rouge_l(const std::string& candidate, const std::string& reference) {
    const auto cand = tokenize_lower(candidate);
    const auto ref = tokenize_lower(reference);
    if (cand.empty() || ref.empty()) return 0.0;
    const auto lcs = static_cast<double>(lcs_length(cand, ref));
    if (lcs == 0.0) return 0.0;
    const double precision = lcs / static_cast<double>(cand.size());
    const double recall = lcs / static_cast<double>(ref.size());
    return 2.0 * precision * recall / (precision + recall);
}

SystemReport system_aggregate(const std::vector<Prediction>& predictions, const Corpus& corpus,
                              bool compute_rouge) {
    if (predictions.empty()) throw_data("no predictions to aggregate");

    struct Accum {
        std::map<Dimension, std::pair<double, std::size_t>> by_dim;  // sum, count
        double rouge_sum = 0.0;
        std::size_t rouge_count = 0;
        std::size_t total = 0;
    };
    std::map<std::string, Accum> acc;
    for (const auto& pred : predictions) {
        auto& a = acc[pred.system_id];
        auto& [sum, count] = a.by_dim[pred.dimension];
        sum += pred.score;
        ++count;
        ++a.total;
    }

    if (compute_rouge) {
        // one ROUGE-L per (doc, system) summary against the first reference
        std::set<RecordKey> scored;
        for (const auto& rec : corpus.records) {
            if (!acc.count(rec.system_id)) continue;
            if (!scored.insert({rec.doc_id, rec.system_id}).second) continue;
            const Document* doc = corpus.find_document(rec.doc_id);
            if (!doc || doc->references.empty()) continue;
            auto& a = acc[rec.system_id];
            a.rouge_sum += rouge_l(rec.summary_text, doc->references.front());
            a.rouge_count++;
        }
    }

    SystemReport report;
    for (const auto& [system_id, a] : acc) {
        SystemSummary s;
        double overall_sum = 0.0;
        for (const auto& [dim, sum_count] : a.by_dim) {
            const double mean = sum_count.first / static_cast<double>(sum_count.second);
            s.dimension_means[dim] = mean;
            overall_sum += mean;
        }
        s.overall_mean = overall_sum / static_cast<double>(a.by_dim.size());
        if (a.rouge_count > 0) s.rouge_l_mean = a.rouge_sum / static_cast<double>(a.rouge_count);
        s.predictions = a.total;
        report.systems.emplace(system_id, std::move(s));
    }

    for (Dimension d : kAllDimensions) {
        std::optional<std::pair<std::string, double>> best, worst;
        for (const auto& [system_id, s] : report.systems) {
            auto it = s.dimension_means.find(d);
            if (it == s.dimension_means.end()) continue;
            if (!best || it->second > best->second) best = {system_id, it->second};
            if (!worst || it->second < worst->second) worst = {system_id, it->second};
        }
        if (best) report.best_system[d] = best->first;
        if (worst) report.worst_system[d] = worst->first;
    }
    return report;
}

std::vector<std::size_t> score_histogram(std::span<const double> scores, std::size_t bins) {
    if (bins == 0) throw_config("histogram needs at least one bin");
    std::vector<std::size_t> counts(bins, 0);
    for (const double s : scores) {
        if (!(s >= 0.0 && s <= 1.0))
            throw_data("histogram score " + std::to_string(s) + " outside [0,1]");
        auto bin = static_cast<std::size_t>(s * static_cast<double>(bins));
        if (bin >= bins) bin = bins - 1;  // 1.0 lands in the final, right-closed bin
        counts[bin]++;
    }
    return counts;
}

}  // namespace icleval
