#pragma once

#include "kdcvg/ackb.hpp"
#include "kdcvg/llm.hpp"
#include "kdcvg/rng.hpp"
#include "kdcvg/scgat.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace kdcvg {

struct TrainConfig {
    int steps = 400;
    double learning_rate = 1e-4;
    int k = 3;
    int batch = 4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double baseline_decay = 0.9;
    double init_eps = 0.01;
    std::uint64_t seed = 1234;

    void validate() const;
};

struct PolicyState {
    AttentionParams params;
    Matrix m_q, m_k, v_q, v_k;
    std::int64_t step = 0;
    double baseline = 0.0;
    bool baseline_ready = false;
    std::uint64_t rng_seed = 0;

    static PolicyState fresh(AttentionParams params, std::uint64_t seed);
};

/// Ordered draw of k candidates without replacement (Plackett-Luce).
struct Selection {
    std::vector<std::size_t> indices;
    double log_prob = 0.0;
};

/// Draws from the categorical over weights, removes the pick, renormalizes,
/// and repeats k times. Throws when k > N.
Selection sample_selection(const AttentionWeights& weights, int k, Rng& rng);

/// Cached forward quantities of one episode.
struct Episode {
    Vector query;
    std::vector<Vector> candidates;  // the pool the selection was drawn from
    std::vector<std::size_t> selection;
    double reward = 0.0;
};

struct PolicyGradient {
    Matrix d_q;
    Matrix d_k;
};

/// d log pi(selection) / d(W_q, W_k) through the sequential softmax and the
/// bilinear score (matrices laid out like W_q and W_k).
PolicyGradient log_prob_gradient(const Episode& episode, const AttentionParams& params);

/// Mean over the batch of (R - baseline) * grad log pi. Ascent direction on J.
PolicyGradient reinforce_gradient(std::span<const Episode> batch, const AttentionParams& params, double baseline);

/// Bias-corrected Adam step that ascends J (descends -J). Throws
/// TrainingError on a non-finite gradient.
PolicyState adam_step(const PolicyState& state, const PolicyGradient& gradient, const TrainConfig& config);

/// CIDEr of the script composed from the selected records against the
/// query record's ground truth. LLM failures propagate as LlmError.
double episode_reward(std::span<const std::string> selected_ids, const CreativeRecord& query, const KnowledgeBase& kb,
                      LlmClient& llm, const NGramStats& stats);

struct TrainLogEntry {
    int step = 0;
    double mean_reward = 0.0;
    double baseline = 0.0;
    int skipped = 0;
};

struct TrainResult {
    AttentionParams params;
    std::vector<TrainLogEntry> log;
};

/// REINFORCE over leave-one-out retrieval episodes, round-robin queries.
TrainResult train_retrieval(const KnowledgeBase& kb, const TrainConfig& config, LlmClient& llm);
TrainResult train_retrieval(const KnowledgeBase& kb, const TrainConfig& config, LlmClient& llm,
                            AttentionParams initial);

/// {"step":…, "mean_reward":…, "baseline":…, "skipped":…} per line.
std::string training_log_jsonl(const std::vector<TrainLogEntry>& log);

}  // namespace kdcvg
