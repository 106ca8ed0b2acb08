#include "kdcvg/cider.hpp"

#include "kdcvg/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

namespace kdcvg {
namespace {

using NGramCounts = std::map<NGram, int>;

NGramCounts count_ngrams(const Tokens& tokens, int n) {
    NGramCounts counts;
    if (tokens.size() < static_cast<std::size_t>(n)) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        ++counts[NGram(tokens.begin() + i, tokens.begin() + i + n)];
    }
    return counts;
}

using TfIdf = std::map<NGram, double>;

TfIdf tfidf(const NGramCounts& counts, const NGramStats& stats) {
    int total = 0;
    for (const auto& [gram, count] : counts) total += count;
    TfIdf vec;
    if (total == 0) return vec;
    const double log_corpus = std::log(static_cast<double>(stats.corpus_size));
    for (const auto& [gram, count] : counts) {
        const int df = std::max(stats.df(gram), 1);
        const double w = (static_cast<double>(count) / total) * (log_corpus - std::log(static_cast<double>(df)));
        vec.emplace(gram, w);
    }
    return vec;
}

double cosine(const TfIdf& a, const TfIdf& b) {
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (const auto& [gram, w] : a) {
        na += w * w;
        if (auto it = b.find(gram); it != b.end()) dot += w * it->second;
    }
    for (const auto& [gram, w] : b) nb += w * w;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

Tokens tokenize(std::string_view text) {
    std::string cleaned = to_lower_ascii(text);
    for (char& c : cleaned) {
        const auto u = static_cast<unsigned char>(c);
        if (u < 0x80 && std::ispunct(u)) c = ' ';
    }
    Tokens tokens;
    std::istringstream in(cleaned);
    std::string tok;
    while (in >> tok) tokens.push_back(std::move(tok));
    return tokens;
}

int NGramStats::df(const NGram& gram) const {
    const auto it = doc_freq.find(gram);
    return it == doc_freq.end() ? 0 : it->second;
}

NGramStats build_idf(std::span<const Tokens> references, int max_n) {
    if (references.empty()) throw Error("cannot build n-gram statistics from an empty corpus");
    if (max_n < 1) throw Error("max_n must be >= 1");
    NGramStats stats;
    stats.max_n = max_n;
    stats.corpus_size = static_cast<int>(references.size());
    for (const auto& doc : references) {
        std::set<NGram> seen;
        for (int n = 1; n <= max_n; ++n) {
            for (auto& [gram, count] : count_ngrams(doc, n)) seen.insert(gram);
        }
        for (const auto& gram : seen) ++stats.doc_freq[gram];
    }
    return stats;
}

double cider_score(const Tokens& candidate, std::span<const Tokens> references, const NGramStats& stats) {
    if (stats.corpus_size < 1) throw Error("n-gram statistics are not built");
    if (references.empty()) throw Error("CIDEr needs at least one reference");
    double total = 0.0;
    for (int n = 1; n <= stats.max_n; ++n) {
        const TfIdf cand = tfidf(count_ngrams(candidate, n), stats);
        double per_order = 0.0;
        for (const auto& ref : references) per_order += cosine(cand, tfidf(count_ngrams(ref, n), stats));
        total += per_order / static_cast<double>(references.size());
    }
    return std::clamp(total / stats.max_n, 0.0, 1.0);
}

double cider_score(const Script& candidate, std::span<const Script> references, const NGramStats& stats) {
    std::vector<Tokens> ref_tokens;
    ref_tokens.reserve(references.size());
    for (const auto& r : references) ref_tokens.push_back(tokenize(r.content_text()));
    return cider_score(tokenize(candidate.content_text()), ref_tokens, stats);
}

}  // namespace kdcvg
