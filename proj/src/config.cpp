#include "kdcvg/config.hpp"

#include "kdcvg/errors.hpp"
#include "kdcvg/json_io.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace kdcvg {
namespace {

using nlohmann::json;

class Section {
public:
    Section(const json& doc, std::string name) : name_(std::move(name)) {
        if (!doc.contains(name_)) return;
        node_ = &doc.at(name_);
        if (!node_->is_object()) throw ConfigError("config section \"" + name_ + "\" must be an object");
    }

    template <typename T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        if (!node_ || !node_->contains(key)) return;
        try {
            out = node_->at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError("config key " + name_ + "." + key + " has the wrong type");
        }
    }

    void finish() const {
        if (!node_) return;
        for (const auto& [key, value] : node_->items()) {
            if (!seen_.count(key)) throw ConfigError("unknown config key " + name_ + "." + key);
        }
    }

private:
    std::string name_;
    const json* node_ = nullptr;
    std::set<std::string> seen_;
};

}  // namespace

TrainConfig Config::train_config() const {
    TrainConfig c = rl;
    c.k = retrieval.k;
    c.init_eps = retrieval.init_eps;
    return c;
}

void Config::validate() const {
    embedder.validate();
    train_config().validate();
    if (retrieval.k < 1) throw ConfigError("retrieval.k must be >= 1");
    if (motion.model.d_lat < 1) throw ConfigError("motion.d_lat must be >= 1");
    if (motion.model.rank < 1) throw ConfigError("motion.rank must be >= 1");
    if (motion.frames < 3) throw ConfigError("motion.frames must be >= 3");
    if (motion.train.steps < 1) throw ConfigError("motion.steps must be >= 1");
    if (!(motion.train.learning_rate > 0.0)) throw ConfigError("motion.lr must be > 0");
    if (motion.train.t_samples < 1) throw ConfigError("motion.t_samples must be >= 1");
    if (motion.euler_steps < 1) throw ConfigError("motion.euler_steps must be >= 1");
    if (llm.timeout_ms < 1) throw ConfigError("llm.timeout_ms must be >= 1");
}

Config parse_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    static const std::set<std::string> sections = {"embedder", "retrieval", "rl", "motion", "llm", "paths"};
    for (const auto& [key, value] : doc.items()) {
        if (!sections.count(key)) throw ConfigError("unknown config section \"" + key + "\"");
    }

    Config c;
    {
        Section s(doc, "embedder");
        std::string kind = to_string(c.embedder.kind);
        s.read("kind", kind);
        c.embedder.kind = embedder_kind_from_string(kind);
        s.read("dim", c.embedder.dim);
        s.read("ngram_size", c.embedder.ngram_size);
        s.read("hash_seed", c.embedder.hash_seed);
        s.finish();
    }
    {
        Section s(doc, "retrieval");
        s.read("k", c.retrieval.k);
        s.read("init_eps", c.retrieval.init_eps);
        s.finish();
    }
    {
        Section s(doc, "rl");
        s.read("steps", c.rl.steps);
        s.read("lr", c.rl.learning_rate);
        s.read("batch", c.rl.batch);
        s.read("seed", c.rl.seed);
        s.read("baseline_decay", c.rl.baseline_decay);
        s.finish();
    }
    {
        Section s(doc, "motion");
        s.read("d_lat", c.motion.model.d_lat);
        s.read("frames", c.motion.frames);
        s.read("rank", c.motion.model.rank);
        s.read("scale", c.motion.model.scale);
        s.read("model_seed", c.motion.model.seed);
        s.read("steps", c.motion.train.steps);
        s.read("lr", c.motion.train.learning_rate);
        s.read("t_samples", c.motion.train.t_samples);
        s.read("euler_steps", c.motion.euler_steps);
        s.read("seed", c.motion.train.seed);
        s.finish();
    }
    {
        Section s(doc, "llm");
        std::string mode = c.llm.mode == LlmMode::mock ? "mock" : "http";
        s.read("mode", mode);
        if (mode == "mock") c.llm.mode = LlmMode::mock;
        else if (mode == "http") c.llm.mode = LlmMode::http;
        else throw ConfigError("llm.mode must be \"mock\" or \"http\"");
        s.read("endpoint", c.llm.endpoint);
        s.read("timeout_ms", c.llm.timeout_ms);
        s.finish();
    }
    {
        Section s(doc, "paths");
        s.read("kb", c.paths.kb);
        s.read("models", c.paths.models);
        s.read("reports", c.paths.reports);
        s.finish();
    }
    c.validate();
    return c;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string Config::to_json() const {
    json doc{{"embedder",
              {{"kind", to_string(embedder.kind)},
               {"dim", embedder.dim},
               {"ngram_size", embedder.ngram_size},
               {"hash_seed", embedder.hash_seed}}},
             {"retrieval", {{"k", retrieval.k}, {"init_eps", retrieval.init_eps}}},
             {"rl",
              {{"steps", rl.steps}, {"lr", rl.learning_rate}, {"batch", rl.batch}, {"seed", rl.seed},
               {"baseline_decay", rl.baseline_decay}}},
             {"motion",
              {{"d_lat", motion.model.d_lat},
               {"frames", motion.frames},
               {"rank", motion.model.rank},
               {"scale", motion.model.scale},
               {"model_seed", motion.model.seed},
               {"steps", motion.train.steps},
               {"lr", motion.train.learning_rate},
               {"t_samples", motion.train.t_samples},
               {"euler_steps", motion.euler_steps},
               {"seed", motion.train.seed}}},
             {"llm",
              {{"mode", llm.mode == LlmMode::mock ? "mock" : "http"},
               {"endpoint", llm.endpoint},
               {"timeout_ms", llm.timeout_ms}}},
             {"paths", {{"kb", paths.kb}, {"models", paths.models}, {"reports", paths.reports}}}};
    return doc.dump(2);
}

}  // namespace kdcvg
