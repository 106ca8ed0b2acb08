#include "kdcvg/embedder.hpp"

#include "kdcvg/errors.hpp"
#include "kdcvg/rng.hpp"

namespace kdcvg {

std::string to_string(EmbedderKind kind) {
    return kind == EmbedderKind::hashed_ngram ? "hashed-ngram" : "external";
}

EmbedderKind embedder_kind_from_string(std::string_view name) {
    if (name == "hashed-ngram") return EmbedderKind::hashed_ngram;
    if (name == "external") return EmbedderKind::external;
    throw ConfigError("unknown embedder kind '" + std::string(name) + "'");
}

void EmbedderSpec::validate() const {
    if (dim < 8) throw ConfigError("embedder dim must be >= 8, got " + std::to_string(dim));
    if (ngram_size < 1) throw ConfigError("embedder ngram_size must be >= 1, got " + std::to_string(ngram_size));
}

std::vector<std::string> utf8_chars(std::string_view text) {
    std::vector<std::string> chars;
    std::size_t i = 0;
    while (i < text.size()) {
        const auto lead = static_cast<unsigned char>(text[i]);
        std::size_t len = 1;
        if (lead >= 0xF0 && lead < 0xF8) len = 4;
        else if (lead >= 0xE0) len = lead < 0xF0 ? 3 : 1;
        else if (lead >= 0xC0) len = 2;
        if (i + len > text.size()) len = 1;
        for (std::size_t j = 1; j < len; ++j) {
            if ((static_cast<unsigned char>(text[i + j]) & 0xC0) != 0x80) {
                len = 1;
                break;
            }
        }
        chars.emplace_back(text.substr(i, len));
        i += len;
    }
    return chars;
}

std::vector<std::string> char_ngrams(std::string_view text, int n) {
    const auto chars = utf8_chars(to_lower_ascii(text));
    std::vector<std::string> grams;
    if (n < 1 || chars.size() < static_cast<std::size_t>(n)) return grams;
    grams.reserve(chars.size() - n + 1);
    for (std::size_t i = 0; i + n <= chars.size(); ++i) {
        std::string gram;
        for (int j = 0; j < n; ++j) gram += chars[i + j];
        grams.push_back(std::move(gram));
    }
    return grams;
}

std::uint64_t ngram_hash(std::string_view gram, std::uint64_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
    for (const char c : gram) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return mix64(h);
}

Embedding embed_text(std::string_view text, const EmbedderSpec& spec) {
    spec.validate();
    if (spec.kind != EmbedderKind::hashed_ngram) {
        throw ConfigError("external embedder cannot embed text; supply the vector instead");
    }
    Vector acc = Vector::Zero(spec.dim);
    for (const auto& gram : char_ngrams(text, spec.ngram_size)) {
        const std::uint64_t h = ngram_hash(gram, spec.hash_seed);
        const auto bucket = static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(spec.dim));
        acc[bucket] += (h >> 63) ? -1.0 : 1.0;
    }
    return normalize_embedding(std::move(acc));
}

Embedding normalize_embedding(Vector values) {
    if (!values.allFinite()) throw Error("embedding contains non-finite values");
    const double n = values.norm();
    if (n > 0.0) values /= n;
    return Embedding(std::move(values));
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim()) {
        throw DimensionError("embedding dimension mismatch: expected " + std::to_string(a.dim()) + ", got " +
                             std::to_string(b.dim()));
    }
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return a.values.dot(b.values) / (na * nb);
}

}  // namespace kdcvg
