#pragma once

#include "kdcvg/types.hpp"

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kdcvg {

using Tokens = std::vector<std::string>;
using NGram = std::vector<std::string>;

/// Lowercase, ASCII punctuation to spaces, split on whitespace.
Tokens tokenize(std::string_view text);

/// Document frequencies over a reference corpus. The order n of an n-gram is
/// its length, so a single map keyed by token tuple covers every order.
struct NGramStats {
    int max_n = 4;
    int corpus_size = 0;
    std::map<NGram, int> doc_freq;

    /// Stored frequency, or 0 for an n-gram absent from the corpus.
    int df(const NGram& gram) const;

    bool operator==(const NGramStats&) const = default;
};

NGramStats build_idf(std::span<const Tokens> references, int max_n = 4);

/// Plain CIDEr in [0, 1] (no x10 scaling, no length penalty, no clipping).
///
/// For each order n the candidate and every reference become TF-IDF vectors
/// with weight (count / total n-grams of that order) * log(corpus / max(df, 1));
/// the per-order score is the mean cosine against the references (0 when
/// either vector is zero) and the result is the mean over orders 1..max_n.
double cider_score(const Tokens& candidate, std::span<const Tokens> references, const NGramStats& stats);
double cider_score(const Script& candidate, std::span<const Script> references, const NGramStats& stats);

}  // namespace kdcvg
