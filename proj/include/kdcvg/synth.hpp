#pragma once

#include "kdcvg/ackb.hpp"
#include "kdcvg/llm.hpp"
#include "kdcvg/policy.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kdcvg {

/// Held-out query of the synthetic benchmark.
struct SynthQuery {
    SellingPoint target;
    Script ground_truth;
    Embedding embedding;
    std::string best_ref_id;       // argmax of the single-reference mock pipeline CIDEr
    double best_ref_cider = 0.0;
    double random_ref_cider = 0.0; // mean over every record in the base
};

struct SynthBenchmark {
    KnowledgeBase kb;
    std::vector<SynthQuery> queries;
};

struct SynthOptions {
    int corpus_size = 96;
    int query_count = 32;
    int dim = 64;
    int relevant_dim = 8;          // rank of the hidden relevance subspace
    double relevant_weight = 1.0;  // class component
    double style_weight = 1.0;     // shared distractor component
    double attribute_spread = 0.6; // attribute offset from the product prototype
    double noise = 0.3;            // per-record jitter of both components
};

/// Template-grammar corpus with external embeddings. Text and script follow
/// the product and attribute (the class) plus one of four style clusters of
/// selling-point words. Embeddings combine a class prototype inside a hidden
/// low-rank subspace with a style prototype in its complement, so raw cosine
/// mixes relevance with style while a bilinear score can reweight the hidden
/// subspace. Queries draw a fresh item of a class present in the base.
/// Throws when corpus_size < 8, or when the best reference fails to beat a
/// random one on average.
SynthBenchmark synth_benchmark(std::uint64_t seed, const SynthOptions& options);
SynthBenchmark synth_benchmark(std::uint64_t seed, int corpus_size = 96, int dim = 64, int query_count = 32);

/// Held-out reward of one query given the retrieved ids (ordered).
double held_out_reward(const SynthQuery& query, std::span<const std::string> ids, const KnowledgeBase& kb,
                       LlmClient& llm);

struct StrategyScore {
    std::string strategy;
    double mean_cider = 0.0;  // percent
};

struct BenchReport {
    std::uint64_t seed = 0;
    int corpus_size = 0;
    int query_count = 0;
    std::vector<StrategyScore> scores;  // none, random, cosine, scgat
    double oracle_cider = 0.0;          // mean best-reference CIDEr, percent
    double train_initial_reward = 0.0;  // mean over the first 50 steps
    double train_final_reward = 0.0;    // mean over the last 50 steps

    double score(std::string_view strategy) const;
    std::string to_json() const;
    std::string to_table() const;
};

/// Runs none/random/cosine with k = config.k, trains SC-GAT on the base with
/// config and retrieves with the trained parameters.
BenchReport run_retrieval_bench(const SynthBenchmark& bench, const TrainConfig& config, LlmClient& llm,
                                std::uint64_t seed, AttentionParams* trained = nullptr);

}  // namespace kdcvg
