#include "icleval/sampling.hpp"

#include <algorithm>
#include <optional>
#include <string>

#include "icleval/error.hpp"
#include "icleval/rng.hpp"

namespace icleval {

SamplingProcedure procedure_from_string(const std::string& name) {
    if (name == "uniform") return SamplingProcedure::uniform;
    if (name == "stratified") return SamplingProcedure::stratified;
    throw_config("unknown sampling procedure '" + name + "'");
}

const char* to_string(SamplingProcedure p) {
    return p == SamplingProcedure::uniform ? "uniform" : "stratified";
}

std::vector<PoolExample> build_pool(const std::vector<SummaryRecord>& pool_records,
                                    Dimension dimension) {
    std::vector<PoolExample> pool;
    pool.reserve(pool_records.size());
    for (const auto& rec : pool_records) {
        const auto score = rec.human_score(dimension);
        if (!score)
            throw_data("pool record ('" + rec.doc_id + "', '" + rec.system_id +
                       "') has no human score for dimension " + to_string(dimension));
        pool.push_back({rec, *score});
    }
    return pool;
}

int assign_bucket(double score) {
    if (!(score >= 0.0 && score <= 1.0))
        throw_data("bucket score " + std::to_string(score) + " outside [0,1]");
    if (score <= 0.25) return 1;
    if (score <= 0.5) return 2;
    if (score <= 0.75) return 3;
    return 4;
}

namespace {

struct ArticleGroup {
    std::string doc_id;
    std::vector<std::size_t> examples;  // indices into the pool
};

// Groups pool examples by source article, first-appearance order.
std::vector<ArticleGroup> group_by_article(const std::vector<PoolExample>& pool) {
    std::vector<ArticleGroup> groups;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const std::string& doc = pool[i].record.doc_id;
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const ArticleGroup& g) { return g.doc_id == doc; });
        if (it == groups.end())
            groups.push_back({doc, {i}});
        else
            it->examples.push_back(i);
    }
    return groups;
}

void check_enough_articles(std::size_t n_articles, std::size_t k) {
    if (k == 0) throw_config("sampler k must be at least 1");
    if (n_articles < k)
        throw_data("pool has " + std::to_string(n_articles) +
                   " distinct articles; need at least " + std::to_string(k));
}

// Target bucket per slot. k=4 is the canonical one-per-bucket case; smaller
// k draws distinct buckets at random, larger k cycles bucket ids.
std::vector<int> target_buckets(std::size_t k, Rng& rng) {
    if (k == 4) return {1, 2, 3, 4};
    std::vector<int> buckets;
    if (k < 4) {
        for (std::size_t i : rng.sample_indices(4, k)) buckets.push_back(static_cast<int>(i) + 1);
        std::sort(buckets.begin(), buckets.end());
    } else {
        for (std::size_t i = 0; i < k; ++i) buckets.push_back(static_cast<int>(i % 4) + 1);
    }
    return buckets;
}

// Depth-first exhaustive search for a complete assignment: slot i takes an
// example in bucket slots[i], all source articles pairwise distinct.
// Candidates are visited in the (seed-shuffled) order given, so the first
// complete assignment found is deterministic for a seed.
bool search_assignment(const std::vector<int>& slots, std::size_t slot,
                       const std::vector<std::vector<std::size_t>>& by_bucket,
                       const std::vector<PoolExample>& pool,
                       std::vector<std::size_t>& chosen, std::vector<std::string>& used_docs) {
    if (slot == slots.size()) return true;
    for (std::size_t cand : by_bucket[static_cast<std::size_t>(slots[slot]) - 1]) {
        const std::string& doc = pool[cand].record.doc_id;
        if (std::find(used_docs.begin(), used_docs.end(), doc) != used_docs.end()) continue;
        chosen.push_back(cand);
        used_docs.push_back(doc);
        if (search_assignment(slots, slot + 1, by_bucket, pool, chosen, used_docs)) return true;
        chosen.pop_back();
        used_docs.pop_back();
    }
    return false;
}

}  // namespace

std::vector<PoolExample> sample_uniform(const std::vector<PoolExample>& pool,
                                        const SamplerConfig& config) {
    const auto groups = group_by_article(pool);
    check_enough_articles(groups.size(), config.k);

    Rng rng(config.seed);
    std::vector<PoolExample> out;
    for (std::size_t gi : rng.sample_indices(groups.size(), config.k)) {
        const ArticleGroup& group = groups[gi];
        const std::size_t pick = static_cast<std::size_t>(rng.bounded(group.examples.size()));
        out.push_back(pool[group.examples[pick]]);
    }
    return out;
}

std::vector<PoolExample> sample_stratified(const std::vector<PoolExample>& pool,
                                           const SamplerConfig& config) {
    if (pool.empty()) throw_data("stratified sampling over an empty pool");
    const auto groups = group_by_article(pool);
    check_enough_articles(groups.size(), config.k);

    Rng rng(config.seed);
    const std::vector<int> slots = target_buckets(config.k, rng);

    std::vector<std::vector<std::size_t>> by_bucket(4);
    for (std::size_t i = 0; i < pool.size(); ++i)
        by_bucket[static_cast<std::size_t>(assign_bucket(pool[i].aspect_score)) - 1].push_back(i);
    for (auto& bucket : by_bucket) rng.shuffle(bucket);

    std::vector<std::size_t> chosen;
    std::vector<std::string> used_docs;
    if (search_assignment(slots, 0, by_bucket, pool, chosen, used_docs)) {
        std::vector<PoolExample> out;
        for (std::size_t idx : chosen) out.push_back(pool[idx]);
        return out;
    }

    // No complete distinct-bucket assignment exists. Fill each slot from its
    // own bucket when possible, otherwise from a randomly chosen non-empty
    // bucket, always from an article not used yet.
    chosen.clear();
    used_docs.clear();
    auto unused_candidates = [&](int bucket) {
        std::vector<std::size_t> cands;
        for (std::size_t idx : by_bucket[static_cast<std::size_t>(bucket) - 1]) {
            const std::string& doc = pool[idx].record.doc_id;
            if (std::find(used_docs.begin(), used_docs.end(), doc) == used_docs.end())
                cands.push_back(idx);
        }
        return cands;
    };
    for (int slot_bucket : slots) {
        std::vector<std::size_t> cands = unused_candidates(slot_bucket);
        if (cands.empty()) {
            std::vector<int> open_buckets;
            for (int b = 1; b <= 4; ++b)
                if (!unused_candidates(b).empty()) open_buckets.push_back(b);
            if (open_buckets.empty())
                throw_data("stratified fallback exhausted distinct articles");
            const int b = open_buckets[rng.bounded(open_buckets.size())];
            cands = unused_candidates(b);
        }
        const std::size_t idx = cands[rng.bounded(cands.size())];
        chosen.push_back(idx);
        used_docs.push_back(pool[idx].record.doc_id);
    }

    std::vector<PoolExample> out;
    for (std::size_t idx : chosen) out.push_back(pool[idx]);
    return out;
}

std::vector<PoolExample> sample(const std::vector<PoolExample>& pool,
                                const SamplerConfig& config) {
    return config.procedure == SamplingProcedure::uniform ? sample_uniform(pool, config)
                                                          : sample_stratified(pool, config);
}

}  // namespace icleval
