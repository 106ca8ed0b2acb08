#include "kdcvg/ackb.hpp"

#include "kdcvg/errors.hpp"
#include "kdcvg/json_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace kdcvg {

using json_io::json;

namespace {

void validate_record(const CreativeRecord& rec, int dim) {
    if (rec.id().empty()) throw IngestError("record with empty id");
    if (trim(rec.selling_point.text).empty()) throw IngestError("record " + rec.id() + ": empty selling point");
    if (rec.script.raw.empty()) throw IngestError("record " + rec.id() + ": empty script");
    if (!rec.script.structured) throw IngestError("record " + rec.id() + ": missing structured script");
    if (trim(rec.script.structured->motion).empty()) {
        throw IngestError("record " + rec.id() + ": script has no motion component");
    }
    if (rec.embedding.dim() != dim) {
        throw IngestError("record " + rec.id() + ": embedding dim " + std::to_string(rec.embedding.dim()) +
                          " != configured " + std::to_string(dim));
    }
}

void sort_and_check_ids(std::vector<CreativeRecord>& records) {
    std::stable_sort(records.begin(), records.end(),
                     [](const CreativeRecord& a, const CreativeRecord& b) { return a.id() < b.id(); });
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].id() == records[i - 1].id()) throw IngestError("duplicate record id \"" + records[i].id() + "\"");
    }
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key) || !obj.at(key).is_string()) {
        throw ParseError(where + ": missing string field \"" + key + "\"");
    }
    return obj.at(key).get<std::string>();
}

json record_to_json(const CreativeRecord& rec) {
    const auto& sc = *rec.script.structured;
    json j{{"id", rec.id()},
           {"selling_point", rec.selling_point.text},
           {"script", {{"subject", sc.subject}, {"scene", sc.scene}, {"motion", sc.motion}}},
           {"embedding", json_io::vector_to_json(rec.embedding.values)}};
    if (rec.trajectory) j["trajectory"] = {{"frames", json_io::matrix_to_json(rec.trajectory->frames())}};
    return j;
}

CreativeRecord record_from_json(const json& j, const std::string& where, const EmbedderSpec& spec, bool persisted) {
    if (!j.is_object()) throw ParseError(where + ": expected a JSON object");
    CreativeRecord rec;
    rec.selling_point.id = require_string(j, "id", where);
    rec.selling_point.text = require_string(j, "selling_point", where);
    if (!j.contains("script") || !j.at("script").is_object()) {
        throw IngestError("record " + rec.id() + ": missing structured script");
    }
    const auto& s = j.at("script");
    const std::string sw = where + " (record " + rec.id() + " script)";
    rec.script = Script::from_components(
        {trim(require_string(s, "subject", sw)), trim(require_string(s, "scene", sw)), trim(require_string(s, "motion", sw))});

    if (persisted || spec.kind == EmbedderKind::external) {
        if (!j.contains("embedding")) throw IngestError("record " + rec.id() + ": missing embedding");
        Vector v = json_io::vector_from_json(j.at("embedding"), where + " embedding");
        rec.embedding = persisted ? Embedding(std::move(v)) : normalize_embedding(std::move(v));
    } else {
        rec.embedding = embed_text(rec.selling_point.text, spec);
    }
    if (j.contains("trajectory") && !j.at("trajectory").is_null()) {
        rec.trajectory = json_io::trajectory_from_json(j.at("trajectory"));
    }
    return rec;
}

json embedder_to_json(const EmbedderSpec& spec) {
    return {{"kind", to_string(spec.kind)},
            {"dim", spec.dim},
            {"ngram_size", spec.ngram_size},
            {"hash_seed", spec.hash_seed}};
}

EmbedderSpec embedder_from_json(const json& j) {
    EmbedderSpec spec;
    spec.kind = embedder_kind_from_string(j.at("kind").get<std::string>());
    spec.dim = j.at("dim").get<int>();
    spec.ngram_size = j.at("ngram_size").get<int>();
    spec.hash_seed = j.at("hash_seed").get<std::uint64_t>();
    spec.validate();
    return spec;
}

}  // namespace

KnowledgeBase::KnowledgeBase(std::vector<CreativeRecord> records, EmbedderSpec embedder, int max_n)
    : records_(std::move(records)), embedder_(embedder) {
    embedder_.validate();
    if (records_.empty()) throw IngestError("knowledge base has no records");
    for (const auto& rec : records_) validate_record(rec, embedder_.dim);
    sort_and_check_ids(records_);
    std::vector<Tokens> docs;
    docs.reserve(records_.size());
    for (const auto& rec : records_) docs.push_back(tokenize(rec.script.content_text()));
    stats_ = build_idf(docs, max_n);
}

KnowledgeBase KnowledgeBase::restore(std::vector<CreativeRecord> records, EmbedderSpec embedder, NGramStats stats) {
    KnowledgeBase kb;
    kb.records_ = std::move(records);
    kb.embedder_ = embedder;
    kb.stats_ = std::move(stats);
    for (const auto& rec : kb.records_) validate_record(rec, embedder.dim);
    sort_and_check_ids(kb.records_);
    if (kb.stats_.corpus_size != static_cast<int>(kb.records_.size())) {
        throw ParseError("n-gram statistics cover " + std::to_string(kb.stats_.corpus_size) + " documents but the base has " +
                         std::to_string(kb.records_.size()) + " records");
    }
    return kb;
}

const CreativeRecord* KnowledgeBase::find(std::string_view id) const {
    auto it = std::lower_bound(records_.begin(), records_.end(), id,
                               [](const CreativeRecord& r, std::string_view key) { return r.id() < key; });
    return it != records_.end() && it->id() == id ? &*it : nullptr;
}

double KnowledgeBase::mean_selling_point_tokens() const {
    if (records_.empty()) return 0.0;
    std::size_t total = 0;
    for (const auto& rec : records_) {
        std::istringstream in(rec.selling_point.text);
        std::string w;
        while (in >> w) ++total;
    }
    return static_cast<double>(total) / static_cast<double>(records_.size());
}

KnowledgeBase ingest(std::istream& source, const EmbedderSpec& spec) {
    spec.validate();
    std::vector<CreativeRecord> records;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string where = "line " + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(where + ": malformed JSON (" + e.what() + ")");
        }
        CreativeRecord rec = record_from_json(j, where, spec, false);
        if (!seen.insert(rec.id()).second) throw IngestError("duplicate record id \"" + rec.id() + "\" at " + where);
        records.push_back(std::move(rec));
    }
    return KnowledgeBase(std::move(records), spec);
}

KnowledgeBase ingest_file(const std::filesystem::path& path, const EmbedderSpec& spec) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    return ingest(in, spec);
}

void save_kb(const KnowledgeBase& kb, const std::filesystem::path& path) {
    json records = json::array();
    for (const auto& rec : kb.records()) records.push_back(record_to_json(rec));
    json df = json::array();
    for (const auto& [gram, count] : kb.ngram_stats().doc_freq) df.push_back({gram, count});
    json doc{{"format", kKbFormat},
             {"embedder", embedder_to_json(kb.embedder())},
             {"ngram_stats",
              {{"max_n", kb.ngram_stats().max_n}, {"corpus_size", kb.ngram_stats().corpus_size}, {"doc_freq", df}}},
             {"records", records}};
    json_io::write_text_file(path, doc.dump() + "\n");
}

KnowledgeBase load_kb(const std::filesystem::path& path) {
    const json doc = json_io::read_json_file(path);
    json_io::require_format(doc, kKbFormat);
    try {
        const EmbedderSpec spec = embedder_from_json(doc.at("embedder"));
        NGramStats stats;
        const auto& js = doc.at("ngram_stats");
        stats.max_n = js.at("max_n").get<int>();
        stats.corpus_size = js.at("corpus_size").get<int>();
        for (const auto& entry : js.at("doc_freq")) {
            stats.doc_freq.emplace(entry.at(0).get<NGram>(), entry.at(1).get<int>());
        }
        std::vector<CreativeRecord> records;
        std::size_t i = 0;
        for (const auto& jr : doc.at("records")) {
            records.push_back(record_from_json(jr, path.string() + " record " + std::to_string(i++), spec, true));
        }
        return KnowledgeBase::restore(std::move(records), spec, std::move(stats));
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace kdcvg
