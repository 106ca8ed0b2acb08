// kdcvg: command-line front end for the knowledge-driven creative video
// generation pipeline. Exit codes: 0 success, 1 usage error, 2 data error.

#include "kdcvg/ackb.hpp"
#include "kdcvg/config.hpp"
#include "kdcvg/errors.hpp"
#include "kdcvg/evalkit.hpp"
#include "kdcvg/json_io.hpp"
#include "kdcvg/motion.hpp"
#include "kdcvg/policy.hpp"
#include "kdcvg/scgat.hpp"
#include "kdcvg/script.hpp"
#include "kdcvg/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
    std::string config_path;
    std::string format = "json";
};

kdcvg::Config load(const Globals& g) {
    return g.config_path.empty() ? kdcvg::Config{} : kdcvg::load_config(g.config_path);
}

template <typename T>
void override_with(T& target, const std::optional<T>& flag) {
    if (flag) target = *flag;
}

std::unique_ptr<kdcvg::LlmClient> make_llm(const kdcvg::Config& c) {
    if (c.llm.mode == kdcvg::LlmMode::http) {
        return std::make_unique<kdcvg::HttpLlmClient>(c.llm.endpoint, c.llm.timeout_ms);
    }
    return std::make_unique<kdcvg::MockLlmClient>();
}

// Writes the document to `out` when given; prints it (or the table) to stdout.
void emit(const Globals& g, const json& doc, const std::string& table, const std::string& out = {}) {
    if (!out.empty()) kdcvg::json_io::write_text_file(out, doc.dump(2) + "\n");
    if (g.format == "table") std::cout << table;
    else std::cout << doc.dump(2) << "\n";
}

std::string kv_table(const json& doc) {
    std::string s;
    for (const auto& [k, v] : doc.items()) s += k + ": " + (v.is_string() ? v.get<std::string>() : v.dump()) + "\n";
    return s;
}

std::vector<kdcvg::ContextEntry> retrieve_context(const kdcvg::KnowledgeBase& kb, const std::string& query,
                                                  kdcvg::RetrievalStrategy strategy, const std::string& params_path,
                                                  int k, std::uint64_t seed, kdcvg::RetrievalResult* out) {
    kdcvg::RetrievalResult res;
    if (strategy == kdcvg::RetrievalStrategy::scgat) {
        if (params_path.empty()) throw CLI::ValidationError("--params", "required for --strategy scgat");
        res = kdcvg::retrieve(query, kb, kdcvg::load_params(params_path), k);
    } else {
        res = kdcvg::baseline_retrieve(strategy, query, kb, k, seed);
    }
    if (out) *out = res;
    return kdcvg::context_from_retrieval(res, kb);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kdcvg: retrieval-augmented ad script composition and motion-reference video latents"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config_path, "JSON config file; flags override its values")->check(CLI::ExistingFile);
    app.add_option("--format", g.format, "stdout format")->check(CLI::IsMember({"json", "table"}));

    // ingest
    auto* ingest = app.add_subcommand("ingest", "build a knowledge base from JSONL records");
    std::string ingest_in, ingest_out;
    std::optional<int> ingest_dim;
    ingest->add_option("jsonl", ingest_in, "input JSONL")->required()->check(CLI::ExistingFile);
    ingest->add_option("--out", ingest_out, "knowledge base JSON")->required();
    ingest->add_option("--dim", ingest_dim, "embedding dimension");

    // train-retrieval
    auto* train = app.add_subcommand("train-retrieval", "REINFORCE training of the attention parameters");
    std::string train_kb, train_out, train_log;
    std::optional<int> train_steps, train_batch, train_k;
    std::optional<double> train_lr;
    std::optional<std::uint64_t> train_seed;
    train->add_option("--kb", train_kb, "knowledge base JSON")->required()->check(CLI::ExistingFile);
    train->add_option("--out", train_out, "parameters JSON")->required();
    train->add_option("--log", train_log, "training log JSONL (default <out>.log.jsonl)");
    train->add_option("--steps", train_steps, "training steps");
    train->add_option("--lr", train_lr, "Adam learning rate");
    train->add_option("--batch", train_batch, "queries per step");
    train->add_option("--k", train_k, "references per selection");
    train->add_option("--seed", train_seed, "training seed");

    // retrieve
    auto* retr = app.add_subcommand("retrieve", "rank knowledge-base records for a query");
    std::string retr_kb, retr_params, retr_query, retr_strategy = "scgat";
    std::optional<int> retr_k;
    std::uint64_t retr_seed = 0;
    retr->add_option("--kb", retr_kb, "knowledge base JSON")->required()->check(CLI::ExistingFile);
    retr->add_option("--params", retr_params, "trained parameters (scgat)")->check(CLI::ExistingFile);
    retr->add_option("--query", retr_query, "selling point text")->required();
    retr->add_option("--k", retr_k, "number of references");
    retr->add_option("--strategy", retr_strategy, "retrieval strategy")
        ->check(CLI::IsMember({"scgat", "cosine", "random", "none"}));
    retr->add_option("--seed", retr_seed, "seed for the random strategy");

    // compose-script
    auto* compose = app.add_subcommand("compose-script", "retrieve, adapt and synthesize a script");
    std::string comp_kb, comp_params, comp_query, comp_strategy = "scgat";
    std::optional<int> comp_k;
    std::uint64_t comp_seed = 0;
    compose->add_option("--kb", comp_kb, "knowledge base JSON")->required()->check(CLI::ExistingFile);
    compose->add_option("--params", comp_params, "trained parameters (scgat)")->check(CLI::ExistingFile);
    compose->add_option("--query", comp_query, "target selling point")->required();
    compose->add_option("--k", comp_k, "number of references");
    compose->add_option("--strategy", comp_strategy, "retrieval strategy")
        ->check(CLI::IsMember({"scgat", "cosine", "random", "none"}));
    compose->add_option("--seed", comp_seed, "seed for the random strategy");

    // train-motion
    auto* tmotion = app.add_subcommand("train-motion", "fit the low-rank adapter to a reference trajectory");
    std::string tm_ref, tm_out, tm_log;
    std::optional<int> tm_steps, tm_rank;
    std::optional<double> tm_lr;
    std::optional<std::uint64_t> tm_seed;
    tmotion->add_option("--reference", tm_ref, "reference trajectory JSON")->required()->check(CLI::ExistingFile);
    tmotion->add_option("--out", tm_out, "model JSON")->required();
    tmotion->add_option("--log", tm_log, "loss log JSONL (default <out>.loss.jsonl)");
    tmotion->add_option("--steps", tm_steps, "training steps");
    tmotion->add_option("--lr", tm_lr, "Adam learning rate");
    tmotion->add_option("--rank", tm_rank, "adapter rank");
    tmotion->add_option("--seed", tm_seed, "noise and t-sampling seed");

    // generate
    auto* gen = app.add_subcommand("generate", "integrate the velocity field to a latent trajectory");
    std::string gen_model, gen_mode, gen_ref, gen_out;
    std::uint64_t gen_seed = 0;
    std::optional<int> gen_steps, gen_frames;
    gen->add_option("--model", gen_model, "model JSON")->required()->check(CLI::ExistingFile);
    gen->add_option("--mode", gen_mode, "start from noise or from the inverted reference")
        ->required()
        ->check(CLI::IsMember({"noise", "rfi"}));
    gen->add_option("--reference", gen_ref, "reference trajectory (rfi)")->check(CLI::ExistingFile);
    gen->add_option("--seed", gen_seed, "noise seed");
    gen->add_option("--out", gen_out, "output trajectory JSON")->required();
    gen->add_option("--steps", gen_steps, "Euler steps");
    gen->add_option("--frames", gen_frames, "frame count (noise mode)");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "metric suite on latent trajectories");
    std::vector<std::string> eval_traj;
    std::string eval_script, eval_out;
    std::uint64_t eval_proj_seed = 0;
    eval->add_option("--traj", eval_traj, "trajectory JSON files")->required()->check(CLI::ExistingFile);
    eval->add_option("--script", eval_script, "script text for textual alignment")->required();
    eval->add_option("--out", eval_out, "report JSON");
    eval->add_option("--projection-seed", eval_proj_seed, "seed of the frame projection");

    // bench-retrieval
    auto* bench = app.add_subcommand("bench-retrieval", "synthetic benchmark sweep over the four strategies");
    std::optional<std::uint64_t> bench_seed;
    std::string bench_out;
    int bench_corpus = 96, bench_queries = 32;
    bench->add_option("--seed", bench_seed, "benchmark seed (default: rl.seed)");
    bench->add_option("--out", bench_out, "report JSON");
    bench->add_option("--corpus-size", bench_corpus, "knowledge base size")->check(CLI::Range(8, 100000));
    bench->add_option("--queries", bench_queries, "held-out query count")->check(CLI::Range(1, 100000));

    // reproduce-table2
    auto* t2 = app.add_subcommand("reproduce-table2", "Min-Max aggregation of raw metric values");
    std::string t2_raw;
    t2->add_option("--raw", t2_raw, "CSV of raw metrics (default: the bundled published values)")
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        kdcvg::Config cfg = load(g);

        if (*ingest) {
            override_with(cfg.embedder.dim, ingest_dim);
            cfg.validate();
            const auto kb = kdcvg::ingest_file(ingest_in, cfg.embedder);
            kdcvg::save_kb(kb, ingest_out);
            json doc{{"records", kb.size()}, {"dim", kb.embedder().dim}, {"out", ingest_out}};
            emit(g, doc, kv_table(doc));
        } else if (*train) {
            override_with(cfg.rl.steps, train_steps);
            override_with(cfg.rl.learning_rate, train_lr);
            override_with(cfg.rl.batch, train_batch);
            override_with(cfg.retrieval.k, train_k);
            override_with(cfg.rl.seed, train_seed);
            cfg.validate();
            const auto kb = kdcvg::load_kb(train_kb);
            auto llm = make_llm(cfg);
            const auto result = kdcvg::train_retrieval(kb, cfg.train_config(), *llm);
            kdcvg::save_params(result.params, train_out);
            const std::string log_path = train_log.empty() ? train_out + ".log.jsonl" : train_log;
            kdcvg::json_io::write_text_file(log_path, kdcvg::training_log_jsonl(result.log));
            const auto& last = result.log.back();
            json doc{{"steps", result.log.size()},
                     {"final_mean_reward", last.mean_reward},
                     {"final_baseline", last.baseline},
                     {"params", train_out},
                     {"log", log_path}};
            emit(g, doc, kv_table(doc));
        } else if (*retr) {
            override_with(cfg.retrieval.k, retr_k);
            cfg.validate();
            const auto kb = kdcvg::load_kb(retr_kb);
            kdcvg::RetrievalResult res;
            retrieve_context(kb, retr_query, kdcvg::strategy_from_string(retr_strategy), retr_params,
                             cfg.retrieval.k, retr_seed, &res);
            std::string table;
            for (const auto& item : res.items) table += item.id + "  " + std::to_string(item.weight) + "\n";
            emit(g, json::parse(res.to_json()), table);
        } else if (*compose) {
            override_with(cfg.retrieval.k, comp_k);
            cfg.validate();
            const auto kb = kdcvg::load_kb(comp_kb);
            kdcvg::RetrievalResult res;
            const auto context = retrieve_context(kb, comp_query, kdcvg::strategy_from_string(comp_strategy),
                                                  comp_params, cfg.retrieval.k, comp_seed, &res);
            auto llm = make_llm(cfg);
            const auto comp = kdcvg::compose_script(kdcvg::SellingPoint{"query", comp_query}, context, *llm);
            json refs = json::array();
            for (const auto& c : context) refs.push_back(c.id);
            json doc{{"script", comp.script.raw},
                     {"references", refs},
                     {"prompt", comp.bundle.serialize()},
                     {"adaptation_fallback", comp.adapted.fallback_used}};
            if (!comp.adapted.warning.empty()) doc["warning"] = comp.adapted.warning;
            emit(g, doc, comp.script.raw + "\n\n" + comp.bundle.serialize() + "\n");
        } else if (*tmotion) {
            override_with(cfg.motion.train.steps, tm_steps);
            override_with(cfg.motion.train.learning_rate, tm_lr);
            override_with(cfg.motion.model.rank, tm_rank);
            override_with(cfg.motion.train.seed, tm_seed);
            cfg.validate();
            const auto reference = kdcvg::load_trajectory(tm_ref);
            auto spec = cfg.motion.model;
            spec.d_lat = reference.latent_dim();
            const auto base = kdcvg::make_velocity_model(spec);
            const auto result = kdcvg::train_mr_lora(reference, base, cfg.motion.train);
            kdcvg::save_model(result.model, tm_out);
            std::string log;
            for (std::size_t i = 0; i < result.loss_log.size(); ++i) {
                log += json{{"step", i + 1}, {"loss", result.loss_log[i]}}.dump() + "\n";
            }
            const std::string log_path = tm_log.empty() ? tm_out + ".loss.jsonl" : tm_log;
            kdcvg::json_io::write_text_file(log_path, log);
            json doc{{"initial_loss", result.initial_loss},
                     {"final_loss", result.final_loss},
                     {"rank", result.model.lora.rank},
                     {"model", tm_out},
                     {"log", log_path}};
            emit(g, doc, kv_table(doc));
        } else if (*gen) {
            override_with(cfg.motion.euler_steps, gen_steps);
            override_with(cfg.motion.frames, gen_frames);
            cfg.validate();
            const auto model = kdcvg::load_model(gen_model);
            const auto mode = kdcvg::generation_mode_from_string(gen_mode);
            std::optional<kdcvg::LatentTrajectory> reference;
            if (!gen_ref.empty()) reference = kdcvg::load_trajectory(gen_ref);
            if (mode == kdcvg::GenerationMode::from_inversion && !reference) {
                throw CLI::ValidationError("--reference", "required for --mode rfi");
            }
            const auto traj =
                kdcvg::generate(model, mode, reference, cfg.motion.euler_steps, gen_seed, cfg.motion.frames);
            kdcvg::save_trajectory(traj, gen_out);
            json doc{{"frames", traj.frame_count()}, {"d_lat", traj.latent_dim()}, {"out", gen_out}};
            if (reference) doc["motion_cosine_to_reference"] = kdcvg::motion_cosine(traj, *reference);
            emit(g, doc, kv_table(doc));
        } else if (*eval) {
            cfg.validate();
            const auto text = kdcvg::embed_text(eval_script, cfg.embedder);
            std::vector<kdcvg::RawMetrics> rows;
            std::optional<kdcvg::Matrix> projection;
            for (const auto& path : eval_traj) {
                const auto traj = kdcvg::load_trajectory(path);
                if (!projection) projection = kdcvg::frame_projection(text.dim(), traj.latent_dim(), eval_proj_seed);
                const auto frames = kdcvg::embed_frames(traj, *projection);
                rows.push_back({fs::path(path).stem().string(), kdcvg::textual_alignment(frames, text),
                                kdcvg::temporal_consistency(frames), kdcvg::dynamic_degree_proxy(traj),
                                kdcvg::motion_smoothness_proxy(traj)});
            }
            const auto report = kdcvg::make_report(std::move(rows), eval_proj_seed, true);
            emit(g, json::parse(report.to_json()), report.to_table(), eval_out);
        } else if (*bench) {
            const std::uint64_t seed = bench_seed.value_or(cfg.rl.seed);
            cfg.validate();
            kdcvg::SynthOptions opt;
            opt.corpus_size = bench_corpus;
            opt.query_count = bench_queries;
            const auto b = kdcvg::synth_benchmark(seed, opt);
            auto llm = make_llm(cfg);
            const auto report = kdcvg::run_retrieval_bench(b, cfg.train_config(), *llm, seed);
            emit(g, json::parse(report.to_json()), report.to_table(), bench_out);
        } else if (*t2) {
            std::vector<kdcvg::RawMetrics> rows;
            if (t2_raw.empty()) {
                rows = kdcvg::table2_raw_metrics();
            } else {
                std::ifstream in(t2_raw);
                rows = kdcvg::read_raw_metrics_csv(in);
            }
            const auto report = kdcvg::make_report(std::move(rows), 0, false);
            emit(g, json::parse(report.to_json()), report.to_table());
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const kdcvg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
