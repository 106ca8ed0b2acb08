#include "kdcvg/ackb.hpp"
#include "kdcvg/embedder.hpp"
#include "kdcvg/errors.hpp"
#include "kdcvg/json_io.hpp"
#include "support.hpp"

#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

using namespace kdcvg;

namespace {

std::string line(const std::string& id, const std::string& sp, const std::string& subj, const std::string& scene,
                 const std::string& motion) {
    nlohmann::json j{{"id", id}, {"selling_point", sp}, {"script", {{"subject", subj}, {"scene", scene}, {"motion", motion}}}};
    return j.dump() + "\n";
}

std::string three_records() {
    return line("r2", "Whitening toothpaste for coffee lovers", "toothpaste tube on counter", "white marble bathroom",
                "brush sweeps across teeth") +
           line("r1", "Balance oral pH with mint", "mint leaves", "white marble counter",
                "water droplet falls and ripples") +
           "\n" +
           line("r3", "Trail shoes that grip wet rock", "trail shoe", "mossy forest path", "runner leaps over a stream");
}

KnowledgeBase ingest_string(const std::string& text, const EmbedderSpec& spec = {}) {
    std::istringstream in(text);
    return ingest(in, spec);
}

}  // namespace

TEST_CASE("empty text embeds to the zero vector") {
    const Embedding e = embed_text("", EmbedderSpec{});
    CHECK(e.dim() == 64);
    CHECK(e.is_zero());
    CHECK(embed_text("ab", EmbedderSpec{}).is_zero());  // shorter than one trigram
}

TEST_CASE("embedding is deterministic and unit length") {
    const EmbedderSpec spec;
    const Embedding a = embed_text("Balance Oral pH", spec);
    const Embedding b = embed_text("Balance Oral pH", spec);
    CHECK(a == b);
    CHECK(cosine_similarity(a, b) == 1.0);
    CHECK(std::abs(a.norm() - 1.0) <= 1e-9);
    CHECK(embed_text("balance oral ph", spec) == a);  // lowercased before hashing
}

TEST_CASE("hash seed changes the embedding") {
    EmbedderSpec s1, s2;
    s2.hash_seed = s1.hash_seed + 1;
    CHECK_FALSE(embed_text("mint toothpaste", s1) == embed_text("mint toothpaste", s2));
}

TEST_CASE("texts without shared trigrams are orthogonal at dim 65536") {
    EmbedderSpec spec;
    spec.dim = 65536;
    const std::string x = "quartz sphinx";
    const std::string y = "wolf dyke jab";
    // Independent enumeration of both bucket sets: no trigram and no bucket in common.
    std::set<std::string> gx, gy;
    std::set<std::uint64_t> bx, by;
    for (const auto& g : char_ngrams(x, 3)) {
        gx.insert(g);
        bx.insert(ngram_hash(g, spec.hash_seed) % 65536);
    }
    for (const auto& g : char_ngrams(y, 3)) {
        gy.insert(g);
        by.insert(ngram_hash(g, spec.hash_seed) % 65536);
    }
    for (const auto& g : gx) CHECK(gy.count(g) == 0);
    for (const auto b : bx) CHECK(by.count(b) == 0);
    CHECK(cosine_similarity(embed_text(x, spec), embed_text(y, spec)) == 0.0);
}

TEST_CASE("single trigram embeds to a signed basis vector") {
    const EmbedderSpec spec;
    const Embedding e = embed_text("abc", spec);
    const std::uint64_t h = ngram_hash("abc", spec.hash_seed);
    const auto bucket = static_cast<Eigen::Index>(h % 64);
    CHECK(e.values[bucket] == ((h >> 63) ? -1.0 : 1.0));
    CHECK(e.values.cwiseAbs().sum() == 1.0);
}

TEST_CASE("character n-grams count code points") {
    CHECK(utf8_chars("héllo").size() == 5);
    CHECK(char_ngrams("héllo", 3).size() == 3);
    CHECK(char_ngrams("ab", 3).empty());
}

TEST_CASE("embedder spec validation") {
    EmbedderSpec spec;
    spec.dim = 7;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.dim = 8;
    spec.ngram_size = 0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("ingest builds a sorted base with statistics over every record") {
    const KnowledgeBase kb = ingest_string(three_records());
    REQUIRE(kb.size() == 3);
    CHECK(kb.ngram_stats().corpus_size == 3);
    CHECK(kb.records()[0].id() == "r1");
    CHECK(kb.records()[1].id() == "r2");
    CHECK(kb.records()[2].id() == "r3");
    for (const auto& r : kb.records()) {
        CHECK(r.script.structured.has_value());
        CHECK(std::abs(r.embedding.norm() - 1.0) <= 1e-9);
        CHECK(r.embedding == embed_text(r.selling_point.text, kb.embedder()));
    }
    CHECK(kb.find("r3") != nullptr);
    CHECK(kb.find("r4") == nullptr);
}

TEST_CASE("ingest is deterministic") {
    CHECK(ingest_string(three_records()) == ingest_string(three_records()));
}

TEST_CASE("duplicate id names the id") {
    const std::string text = line("r1", "a b c", "x", "y", "z falls") + line("r1", "d e f", "x", "y", "z falls");
    try {
        ingest_string(text);
        FAIL("expected IngestError");
    } catch (const IngestError& e) {
        CHECK(std::string(e.what()).find("\"r1\"") != std::string::npos);
    }
}

TEST_CASE("malformed line reports its line number") {
    const std::string text = line("r1", "a b c", "x", "y", "z falls") + "{not json\n";
    try {
        ingest_string(text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("missing structured script names the record") {
    const std::string text = R"({"id": "r9", "selling_point": "fresh breath", "script": "a raw script"})" "\n";
    try {
        ingest_string(text);
        FAIL("expected IngestError");
    } catch (const IngestError& e) {
        CHECK(std::string(e.what()).find("r9") != std::string::npos);
    }
}

TEST_CASE("external embeddings are required and normalized") {
    EmbedderSpec spec;
    spec.kind = EmbedderKind::external;
    spec.dim = 8;
    CHECK_THROWS_AS(ingest_string(line("r1", "a b c", "x", "y", "z falls"), spec), IngestError);
    nlohmann::json j = nlohmann::json::parse(line("r1", "a b c", "x", "y", "z falls"));
    j["embedding"] = {3, 4, 0, 0, 0, 0, 0, 0};
    const KnowledgeBase kb = ingest_string(j.dump() + "\n", spec);
    CHECK(kb.records()[0].embedding.values[0] == doctest::Approx(0.6));
    CHECK(kb.records()[0].embedding.values[1] == doctest::Approx(0.8));
}

TEST_CASE("selling point length statistic of a 10-record fixture") {
    const char* sps[] = {
        "Whitening toothpaste that keeps coffee stains away all day",
        "Balance oral pH with natural mint and herbs",
        "Trail shoes that grip wet rock on every climb",
        "Cold brew coffee smooth enough to drink black",
        "Matte lipstick that stays put through long dinners",
        "Wireless headphones that silence the morning commute",
        "Detergent that lifts grass stains from football kits",
        "Juice pressed from oranges picked the same morning",
        "Backpack with hidden zips for crowded night markets",
        "Foaming face wash gentle enough for daily use",
    };
    std::string text;
    for (int i = 0; i < 10; ++i) text += line("r" + std::to_string(i), sps[i], "s", "t", "m falls");
    const KnowledgeBase kb = ingest_string(text);
    const double mean = kb.mean_selling_point_tokens();
    CHECK(mean >= 8.0);
    CHECK(mean <= 9.0);
}

TEST_CASE("trajectory field is carried through ingest") {
    nlohmann::json j = nlohmann::json::parse(line("r1", "a b c", "x", "y", "z falls"));
    j["trajectory"] = {{"frames", {{0.0, 1.0}, {0.5, 1.5}, {1.0, 2.0}}}};
    const KnowledgeBase kb = ingest_string(j.dump() + "\n");
    REQUIRE(kb.records()[0].trajectory.has_value());
    CHECK(kb.records()[0].trajectory->frame_count() == 3);
    CHECK(kb.records()[0].trajectory->frames()(2, 1) == 2.0);
}

TEST_CASE("persistence roundtrip is the identity") {
    testing::TempDir dir("ackb");
    const KnowledgeBase kb = ingest_string(three_records());
    save_kb(kb, dir / "kb.json");
    const KnowledgeBase back = load_kb(dir / "kb.json");
    CHECK(back == kb);
    CHECK(back.ngram_stats().doc_freq == kb.ngram_stats().doc_freq);
    for (std::size_t i = 0; i < kb.size(); ++i) {
        CHECK(back.records()[i].embedding.values == kb.records()[i].embedding.values);
    }
}

TEST_CASE("truncated file fails to load") {
    testing::TempDir dir("ackb_trunc");
    const KnowledgeBase kb = ingest_string(three_records());
    save_kb(kb, dir / "kb.json");
    std::ifstream in(dir / "kb.json");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string full = buf.str();
    std::ofstream(dir / "cut.json") << full.substr(0, full.size() / 2);
    CHECK_THROWS_AS(load_kb(dir / "cut.json"), ParseError);
}

TEST_CASE("format version mismatch is rejected") {
    testing::TempDir dir("ackb_ver");
    save_kb(ingest_string(three_records()), dir / "kb.json");
    auto j = json_io::read_json_file(dir / "kb.json");
    j["format"] = "ACKB/2";
    std::ofstream(dir / "v2.json") << j.dump();
    CHECK_THROWS_AS(load_kb(dir / "v2.json"), FormatVersionError);
}
