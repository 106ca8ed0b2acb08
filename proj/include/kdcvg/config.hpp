#pragma once

#include "kdcvg/embedder.hpp"
#include "kdcvg/motion.hpp"
#include "kdcvg/policy.hpp"

#include <filesystem>
#include <string>

namespace kdcvg {

struct RetrievalConfig {
    int k = 3;
    double init_eps = 0.01;
};

struct MotionConfig {
    VelocityModelSpec model;
    int frames = 17;
    MdTrainConfig train;
    int euler_steps = 100;
};

enum class LlmMode { mock, http };

struct LlmConfig {
    LlmMode mode = LlmMode::mock;
    std::string endpoint = "http://127.0.0.1:8080/v1/script";
    int timeout_ms = 30000;
};

struct PathsConfig {
    std::string kb = "kb.json";
    std::string models = "models";
    std::string reports = "reports";
};

/// Pipeline configuration. Every field has the module default; a JSON file
/// overrides any subset. Unknown sections or keys are rejected.
struct Config {
    EmbedderSpec embedder;
    RetrievalConfig retrieval;
    TrainConfig rl;
    MotionConfig motion;
    LlmConfig llm;
    PathsConfig paths;

    /// Train settings with the retrieval section folded in.
    TrainConfig train_config() const;
    void validate() const;
    std::string to_json() const;
};

Config parse_config(std::string_view json_text);
Config load_config(const std::filesystem::path& path);

}  // namespace kdcvg
