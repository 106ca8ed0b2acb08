#include "kdcvg/policy.hpp"

#include "kdcvg/cider.hpp"
#include "kdcvg/errors.hpp"
#include "kdcvg/log.hpp"
#include "kdcvg/optim.hpp"
#include "kdcvg/script.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace kdcvg {

void TrainConfig::validate() const {
    if (steps < 1) throw ConfigError("training steps must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
    if (k < 1) throw ConfigError("k must be >= 1");
    if (batch < 1) throw ConfigError("batch must be >= 1");
    if (!(baseline_decay >= 0.0 && baseline_decay < 1.0)) throw ConfigError("baseline decay must be in [0, 1)");
}

PolicyState PolicyState::fresh(AttentionParams params, std::uint64_t seed) {
    params.validate();
    PolicyState s;
    const int d = params.dim();
    s.m_q = s.m_k = s.v_q = s.v_k = Matrix::Zero(d, d);
    s.params = std::move(params);
    s.rng_seed = seed;
    return s;
}

Selection sample_selection(const AttentionWeights& weights, int k, Rng& rng) {
    const auto n = weights.size();
    if (k < 1 || static_cast<std::size_t>(k) > n) {
        throw Error("cannot select " + std::to_string(k) + " of " + std::to_string(n) + " candidates");
    }
    std::vector<bool> taken(n, false);
    Selection sel;
    for (int draw = 0; draw < k; ++draw) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!taken[i]) total += weights.weights[static_cast<Eigen::Index>(i)];
        }
        const double target = rng.uniform() * total;
        double acc = 0.0;
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i]) continue;
            pick = i;  // last untaken index absorbs rounding at the top end
            acc += weights.weights[static_cast<Eigen::Index>(i)];
            if (target < acc) break;
        }
        taken[pick] = true;
        sel.indices.push_back(pick);
        sel.log_prob += std::log(weights.weights[static_cast<Eigen::Index>(pick)] / total);
    }
    return sel;
}

PolicyGradient log_prob_gradient(const Episode& episode, const AttentionParams& params) {
    const int d = params.dim();
    const std::size_t n = episode.candidates.size();
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

    const Vector projected_query = params.w_q * episode.query;
    Vector scores(static_cast<Eigen::Index>(n));
    std::vector<Vector> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
        keys[i] = params.w_k * episode.candidates[i];
        scores[static_cast<Eigen::Index>(i)] = projected_query.dot(keys[i]) * inv_sqrt_d;
    }

    // d log pi / d s_i accumulated over the sequential draws.
    Vector ds = Vector::Zero(static_cast<Eigen::Index>(n));
    std::vector<bool> taken(n, false);
    for (const std::size_t pick : episode.selection) {
        double max_score = -INFINITY;
        for (std::size_t i = 0; i < n; ++i) {
            if (!taken[i]) max_score = std::max(max_score, scores[static_cast<Eigen::Index>(i)]);
        }
        double z = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!taken[i]) z += std::exp(scores[static_cast<Eigen::Index>(i)] - max_score);
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!taken[i]) ds[static_cast<Eigen::Index>(i)] -= std::exp(scores[static_cast<Eigen::Index>(i)] - max_score) / z;
        }
        ds[static_cast<Eigen::Index>(pick)] += 1.0;
        taken[pick] = true;
    }

    Vector weighted = Vector::Zero(d);
    for (std::size_t i = 0; i < n; ++i) weighted += ds[static_cast<Eigen::Index>(i)] * episode.candidates[i];

    // s_i = (W_q q)^T (W_k c_i) / sqrt(d):
    //   ds_i/dW_q = (W_k c_i) q^T / sqrt(d),  ds_i/dW_k = (W_q q) c_i^T / sqrt(d)
    return {(params.w_k * weighted) * episode.query.transpose() * inv_sqrt_d,
            projected_query * weighted.transpose() * inv_sqrt_d};
}

PolicyGradient reinforce_gradient(std::span<const Episode> batch, const AttentionParams& params, double baseline) {
    const int d = params.dim();
    PolicyGradient g{Matrix::Zero(d, d), Matrix::Zero(d, d)};
    if (batch.empty()) return g;
    for (const auto& ep : batch) {
        const double advantage = ep.reward - baseline;
        if (advantage == 0.0) continue;
        const auto lg = log_prob_gradient(ep, params);
        g.d_q += advantage * lg.d_q;
        g.d_k += advantage * lg.d_k;
    }
    g.d_q /= static_cast<double>(batch.size());
    g.d_k /= static_cast<double>(batch.size());
    return g;
}

PolicyState adam_step(const PolicyState& state, const PolicyGradient& gradient, const TrainConfig& config) {
    const int d = state.params.dim();
    if (gradient.d_q.rows() != d || gradient.d_q.cols() != d || gradient.d_k.rows() != d || gradient.d_k.cols() != d) {
        throw DimensionError("gradient shape does not match the attention parameters");
    }
    if (!gradient.d_q.allFinite() || !gradient.d_k.allFinite()) {
        throw TrainingError("non-finite policy gradient at step " + std::to_string(state.step + 1));
    }
    PolicyState next = state;
    next.step = state.step + 1;
    const AdamHyper hyper{config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps};
    // Ascent on J is descent on -J.
    adam_update(next.params.w_q, next.m_q, next.v_q, -gradient.d_q, next.step, hyper);
    adam_update(next.params.w_k, next.m_k, next.v_k, -gradient.d_k, next.step, hyper);
    return next;
}

double episode_reward(std::span<const std::string> selected_ids, const CreativeRecord& query, const KnowledgeBase& kb,
                      LlmClient& llm, const NGramStats& stats) {
    std::vector<ContextEntry> context;
    context.reserve(selected_ids.size());
    for (const auto& id : selected_ids) {
        const auto* rec = kb.find(id);
        if (!rec) throw Error("selected id \"" + id + "\" not in the knowledge base");
        context.push_back({rec->id(), rec->selling_point.text, rec->script});
    }
    const Composition comp = compose_script(query.selling_point, context, llm);
    const Script refs[] = {query.script};
    return cider_score(comp.script, refs, stats);
}

TrainResult train_retrieval(const KnowledgeBase& kb, const TrainConfig& config, LlmClient& llm) {
    return train_retrieval(kb, config, llm, AttentionParams::init(kb.embedder().dim, config.init_eps, config.seed));
}

TrainResult train_retrieval(const KnowledgeBase& kb, const TrainConfig& config, LlmClient& llm,
                            AttentionParams initial) {
    config.validate();
    if (kb.size() < 2) throw TrainingError("retrieval training needs at least 2 records");
    if (initial.dim() != kb.embedder().dim) throw DimensionError("initial params do not match the embedding dim");

    const auto& records = kb.records();
    const std::size_t n = records.size();
    const int k = std::min<int>(config.k, static_cast<int>(n - 1));

    PolicyState state = PolicyState::fresh(std::move(initial), config.seed);
    TrainResult result;
    result.log.reserve(static_cast<std::size_t>(config.steps));

    for (int step = 1; step <= config.steps; ++step) {
        std::vector<Episode> episodes;
        int skipped = 0;
        for (int b = 0; b < config.batch; ++b) {
            const std::size_t slot = static_cast<std::size_t>(step - 1) * config.batch + b;
            const std::size_t qi = slot % n;
            const CreativeRecord& query = records[qi];

            Episode ep;
            ep.query = query.embedding.values;
            std::vector<Embedding> pool;
            std::vector<std::string> pool_ids;
            pool.reserve(n - 1);
            for (std::size_t i = 0; i < n; ++i) {
                if (i == qi) continue;
                pool.push_back(records[i].embedding);
                pool_ids.push_back(records[i].id());
                ep.candidates.push_back(records[i].embedding.values);
            }
            const AttentionWeights weights = softmax_weights(raw_scores(query.embedding, pool, state.params));
            Rng rng(derive_seed(config.seed, slot));
            const Selection sel = sample_selection(weights, k, rng);
            std::vector<std::string> chosen;
            for (const auto idx : sel.indices) chosen.push_back(pool_ids[idx]);
            try {
                ep.reward = episode_reward(chosen, query, kb, llm, kb.ngram_stats());
            } catch (const LlmError& e) {
                log::warn("step " + std::to_string(step) + ": skipping episode for " + query.id() + ": " + e.what());
                ++skipped;
                continue;
            }
            ep.selection = sel.indices;
            episodes.push_back(std::move(ep));
        }

        TrainLogEntry entry{step, 0.0, state.baseline, skipped};
        if (!episodes.empty()) {
            double mean = 0.0;
            for (const auto& ep : episodes) mean += ep.reward;
            mean /= static_cast<double>(episodes.size());
            if (!state.baseline_ready) {
                state.baseline = mean;
                state.baseline_ready = true;
            }
            const PolicyGradient grad = reinforce_gradient(episodes, state.params, state.baseline);
            state = adam_step(state, grad, config);
            state.baseline = config.baseline_decay * state.baseline + (1.0 - config.baseline_decay) * mean;
            entry.mean_reward = mean;
            entry.baseline = state.baseline;
        }
        result.log.push_back(entry);
    }
    result.params = state.params;
    return result;
}

std::string training_log_jsonl(const std::vector<TrainLogEntry>& log) {
    std::ostringstream out;
    for (const auto& e : log) {
        out << nlohmann::json{{"step", e.step}, {"mean_reward", e.mean_reward}, {"baseline", e.baseline}, {"skipped", e.skipped}}
                   .dump()
            << "\n";
    }
    return out.str();
}

}  // namespace kdcvg
