#pragma once

#include "kdcvg/cider.hpp"
#include "kdcvg/embedder.hpp"
#include "kdcvg/types.hpp"

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace kdcvg {

struct CreativeRecord {
    SellingPoint selling_point;
    Script script;
    Embedding embedding;
    std::optional<LatentTrajectory> trajectory;

    const std::string& id() const { return selling_point.id; }

    bool operator==(const CreativeRecord&) const = default;
};

/// Advertising creative knowledge base. Immutable after construction:
/// records sorted by id, ids unique, n-gram statistics built over every
/// reference script.
class KnowledgeBase {
public:
    KnowledgeBase() = default;

    /// Validates and sorts the records and rebuilds the n-gram statistics.
    KnowledgeBase(std::vector<CreativeRecord> records, EmbedderSpec embedder, int max_n = 4);

    /// Restores a persisted base without recomputing statistics.
    static KnowledgeBase restore(std::vector<CreativeRecord> records, EmbedderSpec embedder, NGramStats stats);

    const std::vector<CreativeRecord>& records() const { return records_; }
    const EmbedderSpec& embedder() const { return embedder_; }
    const NGramStats& ngram_stats() const { return stats_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    const CreativeRecord* find(std::string_view id) const;

    /// Embeds query text with this base's embedder.
    Embedding embed(std::string_view text) const { return embed_text(text, embedder_); }

    /// Mean whitespace token count of the selling points.
    double mean_selling_point_tokens() const;

    bool operator==(const KnowledgeBase&) const = default;

private:
    std::vector<CreativeRecord> records_;
    EmbedderSpec embedder_;
    NGramStats stats_;
};

/// Builds a knowledge base from JSONL records:
/// {"id", "selling_point", "script": {"subject","scene","motion"},
///  "embedding"?: [..], "trajectory"?: {"frames": [[..], ..]}}
/// Blank lines are skipped. With the hashed embedder any supplied
/// "embedding" is ignored; with the external embedder it is required.
KnowledgeBase ingest(std::istream& source, const EmbedderSpec& spec);
KnowledgeBase ingest_file(const std::filesystem::path& path, const EmbedderSpec& spec);

inline constexpr const char* kKbFormat = "ACKB/1";

/// JSON persistence with a "format": "ACKB/1" header. Saving writes a
/// temporary file and renames it into place.
void save_kb(const KnowledgeBase& kb, const std::filesystem::path& path);
KnowledgeBase load_kb(const std::filesystem::path& path);

}  // namespace kdcvg
