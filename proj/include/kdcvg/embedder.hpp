#pragma once

#include "kdcvg/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace kdcvg {

enum class EmbedderKind { hashed_ngram, external };

std::string to_string(EmbedderKind kind);
EmbedderKind embedder_kind_from_string(std::string_view name);

struct EmbedderSpec {
    EmbedderKind kind = EmbedderKind::hashed_ngram;
    int dim = 64;
    int ngram_size = 3;
    std::uint64_t hash_seed = 0x5eedULL;

    /// Throws ConfigError when dim < 8 or ngram_size < 1.
    void validate() const;

    bool operator==(const EmbedderSpec&) const = default;
};

/// Splits UTF-8 text into per-code-point substrings. Invalid bytes are kept
/// as single-byte characters.
std::vector<std::string> utf8_chars(std::string_view text);

/// Overlapping character n-grams of the ASCII-lowercased text.
std::vector<std::string> char_ngrams(std::string_view text, int n);

/// Seeded 64-bit hash of one n-gram (FNV-1a over the bytes, SplitMix finalizer).
std::uint64_t ngram_hash(std::string_view gram, std::uint64_t seed);

/// Deterministic text -> unit vector map standing in for a frozen text encoder.
/// Each n-gram adds +-1 to bucket hash % dim (sign from the hash's top bit);
/// the sum is L2-normalized. Text with no n-gram yields the zero vector.
/// Only valid for EmbedderKind::hashed_ngram.
Embedding embed_text(std::string_view text, const EmbedderSpec& spec);

/// L2-normalizes a supplied vector (external embedder path). Zero stays zero.
Embedding normalize_embedding(Vector values);

double cosine_similarity(const Embedding& a, const Embedding& b);

}  // namespace kdcvg
