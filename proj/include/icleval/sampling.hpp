#pragma once

#include <cstdint>
#include <vector>

#include "icleval/corpus.hpp"

namespace icleval {

// A pool record paired with its human score on the dimension under
// evaluation; this score drives bucket assignment and is what the prompt
// shows next to the demonstration summary.
struct PoolExample {
    SummaryRecord record;
    double aspect_score = 0.0;
};

enum class SamplingProcedure { uniform, stratified };

SamplingProcedure procedure_from_string(const std::string& name);
const char* to_string(SamplingProcedure p);

struct SamplerConfig {
    SamplingProcedure procedure = SamplingProcedure::uniform;
    std::size_t k = 4;
    std::uint64_t seed = 0;
    Dimension dimension = Dimension::coherence;
};

// Builds the example pool for one dimension. Pool records lacking a human
// score on that dimension are rejected (they cannot serve as demonstrations).
std::vector<PoolExample> build_pool(const std::vector<SummaryRecord>& pool_records,
                                    Dimension dimension);

// Score buckets over [0,1]: [0,0.25] -> 1, (0.25,0.5] -> 2,
// (0.5,0.75] -> 3, (0.75,1.0] -> 4.
int assign_bucket(double score);

// Picks k source articles at random, then one summary uniformly at random
// from each. Outputs have pairwise-distinct doc_ids.
std::vector<PoolExample> sample_uniform(const std::vector<PoolExample>& pool,
                                        const SamplerConfig& config);

// Picks one example per score bucket with all articles distinct, via
// exhaustive search in seed-shuffled candidate order. Slots whose bucket
// cannot be represented fall back to a uniformly chosen non-empty bucket,
// still keeping articles distinct. For k < 4 the target buckets are k
// distinct buckets drawn at random; for k > 4 the bucket ids cycle.
std::vector<PoolExample> sample_stratified(const std::vector<PoolExample>& pool,
                                           const SamplerConfig& config);

std::vector<PoolExample> sample(const std::vector<PoolExample>& pool, const SamplerConfig& config);

}  // namespace icleval
