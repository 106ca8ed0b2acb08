#include "kdcvg/config.hpp"
#include "kdcvg/errors.hpp"
#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <fstream>

using namespace kdcvg;

TEST_CASE("empty document gives module defaults") {
    const Config c = parse_config("{}");
    CHECK(c.embedder == EmbedderSpec{});
    CHECK(c.retrieval.k == 3);
    CHECK(c.rl.steps == 400);
    CHECK(c.rl.learning_rate == 1e-4);
    CHECK(c.rl.batch == 4);
    CHECK(c.rl.seed == 1234);
    CHECK(c.motion.model.d_lat == 16);
    CHECK(c.motion.model.rank == 128);
    CHECK(c.motion.train.steps == 400);
    CHECK(c.motion.euler_steps == 100);
    CHECK(c.llm.mode == LlmMode::mock);
}

TEST_CASE("overrides apply per key") {
    const Config c = parse_config(R"({
        "embedder": {"dim": 128},
        "retrieval": {"k": 5, "init_eps": 0.02},
        "rl": {"steps": 10, "lr": 0.001},
        "motion": {"rank": 4, "euler_steps": 50},
        "llm": {"mode": "http", "endpoint": "http://localhost:9/x", "timeout_ms": 100}
    })");
    CHECK(c.embedder.dim == 128);
    CHECK(c.embedder.ngram_size == 3);
    CHECK(c.rl.steps == 10);
    CHECK(c.rl.learning_rate == 0.001);
    CHECK(c.motion.model.rank == 4);
    CHECK(c.motion.euler_steps == 50);
    CHECK(c.llm.mode == LlmMode::http);
    CHECK(c.llm.timeout_ms == 100);
    const auto train = c.train_config();
    CHECK(train.k == 5);
    CHECK(train.init_eps == 0.02);
}

TEST_CASE("serialized config parses back") {
    const Config c = parse_config(R"({"rl": {"steps": 12}, "paths": {"kb": "x.json"}})");
    const Config again = parse_config(c.to_json());
    CHECK(again.to_json() == c.to_json());
    CHECK(again.paths.kb == "x.json");
}

TEST_CASE("unknown keys, wrong types and bad values are rejected") {
    CHECK_THROWS_AS(parse_config(R"({"retreival": {}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"rl": {"stepz": 3}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"rl": {"steps": "many"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"rl": {"steps": 0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"embedder": {"dim": 4}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"llm": {"mode": "carrier pigeon"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config("[1, 2]"), ConfigError);
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
}

TEST_CASE("config file loading") {
    testing::TempDir dir("config");
    std::ofstream(dir / "c.json") << R"({"retrieval": {"k": 2}})";
    CHECK(load_config(dir / "c.json").retrieval.k == 2);
    CHECK_THROWS(load_config(dir / "missing.json"));
}
