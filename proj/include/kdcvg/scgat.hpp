#pragma once

#include "kdcvg/ackb.hpp"
#include "kdcvg/types.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace kdcvg {

/// Learnable query/key projections of the semantic-correlation attention scorer.
struct AttentionParams {
    Matrix w_q;
    Matrix w_k;

    int dim() const { return static_cast<int>(w_q.rows()); }

    static AttentionParams identity(int dim);
    /// W_q = W_k = I + eps * N(0, 1) noise from a seeded generator.
    static AttentionParams init(int dim, double eps, std::uint64_t seed);

    /// Throws unless both matrices are finite, square and the same size.
    void validate() const;

    bool operator==(const AttentionParams& o) const { return w_q == o.w_q && w_k == o.w_k; }
};

struct AttentionWeights {
    Vector weights;

    std::size_t size() const { return static_cast<std::size_t>(weights.size()); }
};

enum class RetrievalStrategy { none, random, cosine, scgat };

std::string to_string(RetrievalStrategy s);
RetrievalStrategy strategy_from_string(std::string_view name);

struct RetrievalItem {
    std::string id;
    double weight = 0.0;

    bool operator==(const RetrievalItem&) const = default;
};

struct RetrievalResult {
    RetrievalStrategy strategy = RetrievalStrategy::scgat;
    std::vector<RetrievalItem> items;

    /// {"strategy": ..., "items": [{"id": ..., "weight": ...}]}
    std::string to_json() const;
};

/// s_i = (W_q q) . (W_k c_i) / sqrt(d) for every candidate.
Vector raw_scores(const Embedding& query, std::span<const Embedding> candidates, const AttentionParams& params);

/// Max-subtracted softmax over the full candidate set.
AttentionWeights softmax_weights(const Vector& scores);

/// Highest min(k, N) weights, descending; ties by ascending id.
RetrievalResult top_k(const AttentionWeights& weights, std::span<const std::string> ids, int k);

/// embed -> raw_scores -> softmax_weights -> top_k over every record.
RetrievalResult retrieve(std::string_view query_text, const KnowledgeBase& kb, const AttentionParams& params, int k);
RetrievalResult retrieve(const Embedding& query, const KnowledgeBase& kb, const AttentionParams& params, int k);

/// None / Random / COS comparison strategies. Random draws k distinct ids
/// from a generator seeded with rng_seed; cosine ranks unprojected cosine
/// similarity. Passing RetrievalStrategy::scgat throws.
RetrievalResult baseline_retrieve(RetrievalStrategy strategy, std::string_view query_text, const KnowledgeBase& kb,
                                  int k, std::uint64_t rng_seed);
RetrievalResult baseline_retrieve(RetrievalStrategy strategy, const Embedding& query, const KnowledgeBase& kb, int k,
                                  std::uint64_t rng_seed);

inline constexpr const char* kParamsFormat = "SCGAT/1";

void save_params(const AttentionParams& params, const std::filesystem::path& path);
AttentionParams load_params(const std::filesystem::path& path);

}  // namespace kdcvg
