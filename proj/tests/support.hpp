#pragma once

// Shared fixtures and independent oracles for the test suites. The oracles
// here deliberately use different algorithms from the library (counting
// ranks instead of sorting, subset enumeration instead of backtracking) so
// they can vouch for it.

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "icleval/corpus.hpp"
#include "icleval/rng.hpp"
#include "icleval/sampling.hpp"

namespace testsupport {

// --- independent statistics oracles ---

// Average ranks by direct counting: rank = #smaller + (#equal + 1) / 2.
inline std::vector<double> oracle_ranks(const std::vector<double>& v) {
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::size_t smaller = 0, equal = 0;
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (v[j] < v[i]) ++smaller;
            if (v[j] == v[i]) ++equal;
        }
        ranks[i] = static_cast<double>(smaller) + (static_cast<double>(equal) + 1.0) / 2.0;
    }
    return ranks;
}

inline double oracle_spearman(const std::vector<double>& x, const std::vector<double>& y) {
    const auto rx = oracle_ranks(x);
    const auto ry = oracle_ranks(y);
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sx += rx[i];
        sy += ry[i];
        sxy += rx[i] * ry[i];
        sxx += rx[i] * rx[i];
        syy += ry[i] * ry[i];
    }
    const double num = n * sxy - sx * sy;
    const double den = std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
    return num / den;
}

// Tau-b from the textbook definition: n0 = n(n-1)/2, n1/n2 from tie-group
// sizes, C - D by pair enumeration.
inline double oracle_kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    long long concordant = 0, discordant = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double prod = (x[i] - x[j]) * (y[i] - y[j]);
            if (prod > 0) ++concordant;
            if (prod < 0) ++discordant;
        }
    }
    auto tie_pairs = [](const std::vector<double>& v) {
        long long pairs = 0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            long long group = 0;
            for (std::size_t j = 0; j < v.size(); ++j)
                if (v[j] == v[i]) ++group;
            pairs += group - 1;  // counts each ordered tie pair once per member
        }
        return pairs / 2;
    };
    const double n0 = static_cast<double>(n) * (static_cast<double>(n) - 1.0) / 2.0;
    const double n1 = static_cast<double>(tie_pairs(x));
    const double n2 = static_cast<double>(tie_pairs(y));
    return (static_cast<double>(concordant) - static_cast<double>(discordant)) /
           std::sqrt((n0 - n1) * (n0 - n2));
}

// True iff some 4-subset of the pool covers all four buckets with four
// distinct articles; checked by plain subset enumeration.
inline bool oracle_full_assignment_exists(const std::vector<icleval::PoolExample>& pool) {
    const std::size_t n = pool.size();
    std::vector<int> bucket(n);
    for (std::size_t i = 0; i < n; ++i) bucket[i] = icleval::assign_bucket(pool[i].aspect_score);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            for (std::size_t c = b + 1; c < n; ++c)
                for (std::size_t d = c + 1; d < n; ++d) {
                    const int mask = (1 << bucket[a]) | (1 << bucket[b]) | (1 << bucket[c]) |
                                     (1 << bucket[d]);
                    if (mask != 0b11110) continue;
                    const std::string* docs[4] = {&pool[a].record.doc_id, &pool[b].record.doc_id,
                                                  &pool[c].record.doc_id, &pool[d].record.doc_id};
                    bool distinct = true;
                    for (int i = 0; i < 4 && distinct; ++i)
                        for (int j = i + 1; j < 4; ++j)
                            if (*docs[i] == *docs[j]) {
                                distinct = false;
                                break;
                            }
                    if (distinct) return true;
                }
    return false;
}

// --- synthetic corpora ---

// Rectangular corpus with raw scale (0,1). Human scores are random points
// on the 0.01 grid, pairwise distinct within each (document, dimension), so
// two-decimal score rendering stays lossless and rank-based statistics see
// no accidental ties.
inline icleval::Corpus make_synthetic_corpus(std::size_t n_docs, std::size_t n_systems,
                                             std::uint64_t seed) {
    icleval::Corpus corpus;
    corpus.raw_score_scale = {0.0, 1.0};
    icleval::Rng rng(seed);
    for (std::size_t d = 0; d < n_docs; ++d) {
        const std::string doc_id = "doc" + std::to_string(d);
        corpus.documents.push_back(
            {doc_id, "Source article number " + std::to_string(d) + " about topic " +
                         std::to_string(d * 7 % 13) + ".",
             {"Reference summary for article " + std::to_string(d) + "."}});
        std::vector<std::vector<double>> grids;
        for (std::size_t dim = 0; dim < 4; ++dim) {
            std::vector<double> grid;
            for (std::size_t g : rng.sample_indices(101, n_systems))
                grid.push_back(static_cast<double>(g) / 100.0);
            grids.push_back(std::move(grid));
        }
        for (std::size_t s = 0; s < n_systems; ++s) {
            icleval::SummaryRecord rec;
            rec.doc_id = doc_id;
            rec.system_id = "sys" + std::to_string(s);
            rec.summary_text = "Summary of article " + std::to_string(d) + " from system " +
                               std::to_string(s) + ".";
            std::size_t dim_index = 0;
            for (icleval::Dimension dim : icleval::kAllDimensions) {
                const double score = grids[dim_index++][s];
                rec.human_scores[dim] = score;
                rec.raw_scores[dim] = {score};
                rec.raw_scalar[dim] = true;
            }
            corpus.records.push_back(std::move(rec));
        }
    }
    return corpus;
}

inline std::filesystem::path write_temp_corpus(const icleval::Corpus& corpus,
                                               const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "icleval_tests";
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    icleval::save_corpus(corpus, path);
    return path;
}

// Scratch directory that cleans up after itself.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("icleval_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

// Pool whose article/bucket structure is easy to control in tests.
inline std::vector<icleval::PoolExample> make_pool(
    const std::vector<std::pair<std::string, double>>& doc_scores) {
    std::vector<icleval::PoolExample> pool;
    int i = 0;
    for (const auto& [doc_id, score] : doc_scores) {
        icleval::SummaryRecord rec;
        rec.doc_id = doc_id;
        rec.system_id = "sys" + std::to_string(i++);
        rec.summary_text = "pool summary " + std::to_string(i);
        rec.human_scores[icleval::Dimension::coherence] = score;
        pool.push_back({std::move(rec), score});
    }
    return pool;
}

}  // namespace testsupport
