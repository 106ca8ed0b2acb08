#include "kdcvg/scgat.hpp"

#include "kdcvg/embedder.hpp"
#include "kdcvg/errors.hpp"
#include "kdcvg/json_io.hpp"
#include "kdcvg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace kdcvg {

using json_io::json;

AttentionParams AttentionParams::identity(int dim) {
    return {Matrix::Identity(dim, dim), Matrix::Identity(dim, dim)};
}

AttentionParams AttentionParams::init(int dim, double eps, std::uint64_t seed) {
    Rng rng(seed);
    AttentionParams p = identity(dim);
    for (Matrix* m : {&p.w_q, &p.w_k}) {
        for (Eigen::Index c = 0; c < dim; ++c) {
            for (Eigen::Index r = 0; r < dim; ++r) (*m)(r, c) += eps * rng.normal();
        }
    }
    return p;
}

void AttentionParams::validate() const {
    if (w_q.rows() != w_q.cols() || w_k.rows() != w_k.cols() || w_q.rows() != w_k.rows() || w_q.rows() < 1) {
        throw DimensionError("attention projections must be square and equally sized");
    }
    if (!w_q.allFinite() || !w_k.allFinite()) throw Error("attention projections contain non-finite values");
}

std::string to_string(RetrievalStrategy s) {
    switch (s) {
        case RetrievalStrategy::none: return "none";
        case RetrievalStrategy::random: return "random";
        case RetrievalStrategy::cosine: return "cosine";
        case RetrievalStrategy::scgat: return "scgat";
    }
    return "unknown";
}

RetrievalStrategy strategy_from_string(std::string_view name) {
    if (name == "none") return RetrievalStrategy::none;
    if (name == "random") return RetrievalStrategy::random;
    if (name == "cosine") return RetrievalStrategy::cosine;
    if (name == "scgat") return RetrievalStrategy::scgat;
    throw ConfigError("unknown retrieval strategy '" + std::string(name) + "'");
}

std::string RetrievalResult::to_json() const {
    json items_json = json::array();
    for (const auto& item : items) items_json.push_back({{"id", item.id}, {"weight", item.weight}});
    return json{{"strategy", to_string(strategy)}, {"items", items_json}}.dump();
}

Vector raw_scores(const Embedding& query, std::span<const Embedding> candidates, const AttentionParams& params) {
    const int d = params.dim();
    if (query.dim() != d) {
        throw DimensionError("query dimension mismatch: expected d=" + std::to_string(d) + ", got " +
                             std::to_string(query.dim()));
    }
    const Vector projected_query = params.w_q * query.values;
    const Vector key_side = params.w_k.transpose() * projected_query;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    Vector scores(static_cast<Eigen::Index>(candidates.size()));
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i].dim() != d) {
            throw DimensionError("candidate " + std::to_string(i) + " dimension mismatch: expected d=" +
                                 std::to_string(d) + ", got " + std::to_string(candidates[i].dim()));
        }
        scores[static_cast<Eigen::Index>(i)] = key_side.dot(candidates[i].values) * inv_sqrt_d;
    }
    return scores;
}

AttentionWeights softmax_weights(const Vector& scores) {
    if (scores.size() == 0) throw Error("softmax over an empty candidate set");
    if (!scores.allFinite()) throw Error("softmax over non-finite scores");
    const Vector shifted = (scores.array() - scores.maxCoeff()).exp().matrix();
    return {shifted / shifted.sum()};
}

RetrievalResult top_k(const AttentionWeights& weights, std::span<const std::string> ids, int k) {
    if (k < 1) throw Error("k must be >= 1");
    if (ids.size() != weights.size()) throw DimensionError("weights and ids differ in length");
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto n = std::min(static_cast<std::size_t>(k), order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          const double wa = weights.weights[static_cast<Eigen::Index>(a)];
                          const double wb = weights.weights[static_cast<Eigen::Index>(b)];
                          if (wa != wb) return wa > wb;
                          return ids[a] < ids[b];
                      });
    RetrievalResult result;
    result.strategy = RetrievalStrategy::scgat;
    for (std::size_t i = 0; i < n; ++i) {
        result.items.push_back({ids[order[i]], weights.weights[static_cast<Eigen::Index>(order[i])]});
    }
    return result;
}

namespace {

std::vector<Embedding> embeddings_of(const KnowledgeBase& kb) {
    std::vector<Embedding> out;
    out.reserve(kb.size());
    for (const auto& rec : kb.records()) out.push_back(rec.embedding);
    return out;
}

std::vector<std::string> ids_of(const KnowledgeBase& kb) {
    std::vector<std::string> out;
    out.reserve(kb.size());
    for (const auto& rec : kb.records()) out.push_back(rec.id());
    return out;
}

}  // namespace

RetrievalResult retrieve(const Embedding& query, const KnowledgeBase& kb, const AttentionParams& params, int k) {
    if (kb.empty()) throw Error("retrieval against an empty knowledge base");
    const auto candidates = embeddings_of(kb);
    const auto ids = ids_of(kb);
    return top_k(softmax_weights(raw_scores(query, candidates, params)), ids, k);
}

RetrievalResult retrieve(std::string_view query_text, const KnowledgeBase& kb, const AttentionParams& params, int k) {
    return retrieve(kb.embed(query_text), kb, params, k);
}

RetrievalResult baseline_retrieve(RetrievalStrategy strategy, const Embedding& query, const KnowledgeBase& kb, int k,
                                  std::uint64_t rng_seed) {
    if (k < 1) throw Error("k must be >= 1");
    const auto ids = ids_of(kb);
    const std::size_t n = std::min(static_cast<std::size_t>(k), ids.size());
    RetrievalResult result;
    result.strategy = strategy;
    switch (strategy) {
        case RetrievalStrategy::none:
            break;
        case RetrievalStrategy::random: {
            // Partial Fisher-Yates. Weights are uniform, so the result is
            // ordered by the id tie-break like every other strategy.
            Rng rng(rng_seed);
            std::vector<std::size_t> pool(ids.size());
            std::iota(pool.begin(), pool.end(), std::size_t{0});
            const double w = 1.0 / static_cast<double>(ids.size());
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t j = i + rng.below(pool.size() - i);
                std::swap(pool[i], pool[j]);
                result.items.push_back({ids[pool[i]], w});
            }
            std::sort(result.items.begin(), result.items.end(),
                      [](const RetrievalItem& a, const RetrievalItem& b) { return a.id < b.id; });
            break;
        }
        case RetrievalStrategy::cosine: {
            Vector sims(static_cast<Eigen::Index>(ids.size()));
            for (std::size_t i = 0; i < ids.size(); ++i) {
                sims[static_cast<Eigen::Index>(i)] = cosine_similarity(query, kb.records()[i].embedding);
            }
            result = top_k(AttentionWeights{sims}, ids, k);
            result.strategy = RetrievalStrategy::cosine;
            break;
        }
        case RetrievalStrategy::scgat:
            throw Error("scgat is not a baseline strategy; use retrieve()");
    }
    return result;
}

RetrievalResult baseline_retrieve(RetrievalStrategy strategy, std::string_view query_text, const KnowledgeBase& kb,
                                  int k, std::uint64_t rng_seed) {
    if (strategy == RetrievalStrategy::none) return {RetrievalStrategy::none, {}};
    if (strategy == RetrievalStrategy::random) return baseline_retrieve(strategy, Embedding::zeros(kb.embedder().dim), kb, k, rng_seed);
    return baseline_retrieve(strategy, kb.embed(query_text), kb, k, rng_seed);
}

void save_params(const AttentionParams& params, const std::filesystem::path& path) {
    params.validate();
    json doc{{"format", kParamsFormat},
             {"dim", params.dim()},
             {"w_q", json_io::matrix_to_json(params.w_q)},
             {"w_k", json_io::matrix_to_json(params.w_k)}};
    json_io::write_text_file(path, doc.dump() + "\n");
}

AttentionParams load_params(const std::filesystem::path& path) {
    const json doc = json_io::read_json_file(path);
    json_io::require_format(doc, kParamsFormat);
    AttentionParams p{json_io::matrix_from_json(doc.at("w_q"), "w_q"), json_io::matrix_from_json(doc.at("w_k"), "w_k")};
    p.validate();
    if (doc.contains("dim") && doc.at("dim").get<int>() != p.dim()) throw ParseError("params dim header mismatch");
    return p;
}

}  // namespace kdcvg
