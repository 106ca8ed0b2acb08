#include "kdcvg/synth.hpp"

#include "kdcvg/errors.hpp"
#include "kdcvg/rng.hpp"
#include "kdcvg/scgat.hpp"
#include "kdcvg/script.hpp"

#include <Eigen/QR>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

namespace kdcvg {
namespace {

struct Attribute {
    const char* word;
    const char* scene;
};

struct Category {
    const char* product;
    std::array<const char*, 2> subjects;
    std::array<Attribute, 3> attributes;
    std::array<const char*, 2> motions;
};

// clang-format off
const std::array<Category, 8> kCategories = {{
    {"toothpaste",
     {"a tube of toothpaste pressed onto a brush", "a smiling woman holding the toothpaste"},
     {{{"whitening", "a bright bathroom mirror with white tiles"},
       {"minty", "a cool mountain stream among mint leaves"},
       {"gentle", "a soft cotton towel beside the sink"}}},
     {"the brush sweeps across teeth as foam rises", "the camera pushes toward a sparkling smile"}},
    {"sneakers",
     {"a pair of sneakers laced on a runner", "a teenager tying the sneakers"},
     {{{"lightweight", "an empty running track at sunrise"},
       {"waterproof", "a rainy city street with deep puddles"},
       {"breathable", "a summer park path under tall trees"}}},
     {"feet sprint forward and kick up dust", "the runner leaps over a bench in slow motion"}},
    {"coffee",
     {"a steaming cup of coffee on a saucer", "a barista pouring the coffee"},
     {{{"bold", "a dark wooden cafe counter at night"},
       {"smooth", "a quiet kitchen window with morning light"},
       {"organic", "a green hillside farm with ripe beans"}}},
     {"steam curls upward while cream swirls", "the cup slides across the table toward the viewer"}},
    {"lipstick",
     {"a golden tube of lipstick twisted open", "a model applying the lipstick"},
     {{{"matte", "a velvet dressing table with soft bulbs"},
       {"glossy", "a glittering party stage with mirrors"},
       {"nourishing", "a calm spa room with warm candles"}}},
     {"the bullet rises from the tube and turns", "lips press together and break into a smile"}},
    {"headphones",
     {"a pair of headphones resting on a desk", "a commuter wearing the headphones"},
     {{{"wireless", "a crowded subway carriage in motion"},
       {"noise-cancelling", "a busy airport lounge with announcements"},
       {"foldable", "a compact travel bag on a hotel bed"}}},
     {"the listener nods as sound waves ripple outward", "the earcups rotate and click into place"}},
    {"detergent",
     {"a bottle of detergent beside a washer", "a father measuring the detergent"},
     {{{"concentrated", "a tiny laundry closet with one shelf"},
       {"fragrant", "a sunny backyard with linen on a line"},
       {"stain-fighting", "a muddy football field after a match"}}},
     {"the drum spins and suds wash the stain away", "a shirt unfolds and flutters clean in the wind"}},
    {"juice",
     {"a chilled glass of juice with ice", "a child sipping the juice"},
     {{{"tropical", "a sandy beach bar under palm trees"},
       {"pulpy", "an orchard crate full of fresh oranges"},
       {"sugar-free", "a bright gym locker room"}}},
     {"droplets roll down the glass as it is lifted", "fruit splashes into the pitcher and bursts"}},
    {"backpack",
     {"a sturdy backpack packed with books", "a hiker shouldering the backpack"},
     {{{"durable", "a rocky mountain trail above the clouds"},
       {"ergonomic", "a campus lawn between lecture halls"},
       {"anti-theft", "a crowded night market with lanterns"}}},
     {"zippers glide shut as the straps tighten", "the hiker climbs a ridge and turns around"}},
}};

const std::array<const char*, 16> kStyleWords = {
    "premium", "affordable", "limited", "edition", "classic", "modern", "everyday", "luxury",
    "exclusive", "trusted", "popular", "official", "deluxe", "original", "ultimate", "signature"};
// clang-format on

constexpr int kAttributesPerCategory = 3;
constexpr int kClassCount = static_cast<int>(kCategories.size()) * kAttributesPerCategory;
constexpr int kStyleClusters = 4;

struct Draw {
    std::string selling_point;
    ScriptComponents components;
};

// Four style clusters of four words each; a selling point takes three words
// of one cluster.
Draw draw_item(int cls, int style, Rng& rng) {
    const Category& cat = kCategories[static_cast<std::size_t>(cls / kAttributesPerCategory)];
    const Attribute& attr = cat.attributes[static_cast<std::size_t>(cls % kAttributesPerCategory)];
    std::array<std::size_t, 4> order = {0, 1, 2, 3};
    for (std::size_t i = 0; i < 3; ++i) std::swap(order[i], order[i + rng.below(4 - i)]);
    std::string sp;
    for (std::size_t i = 0; i < 3; ++i) sp += std::string(kStyleWords[static_cast<std::size_t>(style) * 4 + order[i]]) + " ";
    sp += std::string(attr.word) + " " + cat.product;
    ScriptComponents comp{cat.subjects[static_cast<std::size_t>(rng.below(2))], attr.scene,
                          cat.motions[static_cast<std::size_t>(rng.below(2))]};
    return {std::move(sp), std::move(comp)};
}

Vector gaussian(int n, Rng& rng) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.normal();
    return v;
}

// Hidden geometry: class prototypes live in an r-dimensional subspace U,
// style prototypes in its complement V, both under a seeded rotation.
struct Geometry {
    Matrix u;                    // d x r
    Matrix v;                    // d x (d - r)
    std::vector<Vector> classes; // r
    std::vector<Vector> styles;  // d - r
};

Geometry make_geometry(const SynthOptions& opt, Rng& rng) {
    const int d = opt.dim;
    const int r = opt.relevant_dim;
    Matrix g(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
    }
    const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
    Geometry geo{q.leftCols(r), q.rightCols(d - r), {}, {}};
    for (std::size_t c = 0; c < kCategories.size(); ++c) {
        const Vector base = gaussian(r, rng).normalized();
        for (int a = 0; a < kAttributesPerCategory; ++a) {
            geo.classes.push_back((base + opt.attribute_spread * gaussian(r, rng).normalized()).normalized());
        }
    }
    for (int s = 0; s < kStyleClusters; ++s) geo.styles.push_back(gaussian(d - r, rng).normalized());
    return geo;
}

Embedding embed_item(const Geometry& geo, const SynthOptions& opt, int cls, int style, Rng& rng) {
    const int r = opt.relevant_dim;
    const int d = opt.dim;
    const Vector rel = geo.classes[static_cast<std::size_t>(cls)] + opt.noise / std::sqrt(r) * gaussian(r, rng);
    const Vector sty = geo.styles[static_cast<std::size_t>(style)] + opt.noise / std::sqrt(d - r) * gaussian(d - r, rng);
    return normalize_embedding(opt.relevant_weight * (geo.u * rel) + opt.style_weight * (geo.v * sty));
}

std::string record_id(int i) {
    std::ostringstream id;
    id << "sp-" << std::setw(4) << std::setfill('0') << i;
    return id.str();
}

}  // namespace

double held_out_reward(const SynthQuery& query, std::span<const std::string> ids, const KnowledgeBase& kb,
                       LlmClient& llm) {
    CreativeRecord rec{query.target, query.ground_truth, Embedding{}, std::nullopt};
    return episode_reward(ids, rec, kb, llm, kb.ngram_stats());
}

SynthBenchmark synth_benchmark(std::uint64_t seed, const SynthOptions& opt) {
    if (opt.corpus_size < 8) throw Error("synthetic benchmark needs corpus_size >= 8");
    if (opt.query_count < 1) throw Error("synthetic benchmark needs at least one query");
    if (opt.relevant_dim < 2 || opt.relevant_dim >= opt.dim) throw Error("relevant_dim must lie in [2, dim)");
    EmbedderSpec spec;
    spec.kind = EmbedderKind::external;
    spec.dim = opt.dim;
    spec.validate();

    Rng rng(derive_seed(seed, 0));
    const Geometry geo = make_geometry(opt, rng);
    std::set<std::string> used;
    auto unique_draw = [&](int cls, int style) {
        for (;;) {
            Draw d = draw_item(cls, style, rng);
            if (used.insert(d.selling_point).second) return d;
        }
    };

    // Balanced classes, shuffled so record ids carry no class information.
    std::vector<int> classes(static_cast<std::size_t>(opt.corpus_size));
    for (int i = 0; i < opt.corpus_size; ++i) classes[static_cast<std::size_t>(i)] = i % kClassCount;
    for (std::size_t i = classes.size(); i > 1; --i) std::swap(classes[i - 1], classes[rng.below(i)]);

    std::vector<CreativeRecord> records;
    records.reserve(classes.size());
    for (int i = 0; i < opt.corpus_size; ++i) {
        const int cls = classes[static_cast<std::size_t>(i)];
        const int style = static_cast<int>(rng.below(kStyleClusters));
        Draw d = unique_draw(cls, style);
        Embedding emb = embed_item(geo, opt, cls, style, rng);
        records.push_back({{record_id(i), std::move(d.selling_point)}, Script::from_components(d.components),
                           std::move(emb), std::nullopt});
    }
    SynthBenchmark bench{KnowledgeBase(std::move(records), spec), {}};

    // Queries only use classes present in the base.
    std::vector<int> present(classes.begin(), classes.end());
    std::sort(present.begin(), present.end());
    present.erase(std::unique(present.begin(), present.end()), present.end());

    MockLlmClient mock;
    double best_total = 0.0;
    double random_total = 0.0;
    for (int q = 0; q < opt.query_count; ++q) {
        const int cls = present[rng.below(present.size())];
        const int style = static_cast<int>(rng.below(kStyleClusters));
        Draw d = unique_draw(cls, style);
        SynthQuery query{{"query-" + std::to_string(q), std::move(d.selling_point)},
                         Script::from_components(d.components), embed_item(geo, opt, cls, style, rng), "", -1.0, 0.0};
        for (const auto& rec : bench.kb.records()) {
            const std::string ids[] = {rec.id()};
            const double r = held_out_reward(query, ids, bench.kb, mock);
            query.random_ref_cider += r;
            if (r > query.best_ref_cider) {
                query.best_ref_cider = r;
                query.best_ref_id = rec.id();
            }
        }
        query.random_ref_cider /= static_cast<double>(bench.kb.size());
        best_total += query.best_ref_cider;
        random_total += query.random_ref_cider;
        bench.queries.push_back(std::move(query));
    }
    if (!(best_total > random_total)) {
        throw Error("synthetic benchmark construction check failed: best references do not beat random ones");
    }
    return bench;
}

SynthBenchmark synth_benchmark(std::uint64_t seed, int corpus_size, int dim, int query_count) {
    SynthOptions opt;
    opt.corpus_size = corpus_size;
    opt.dim = dim;
    opt.query_count = query_count;
    return synth_benchmark(seed, opt);
}

double BenchReport::score(std::string_view strategy) const {
    for (const auto& s : scores) {
        if (s.strategy == strategy) return s.mean_cider;
    }
    throw Error("no score for strategy " + std::string(strategy));
}

BenchReport run_retrieval_bench(const SynthBenchmark& bench, const TrainConfig& config, LlmClient& llm,
                                std::uint64_t seed, AttentionParams* trained) {
    config.validate();
    const KnowledgeBase& kb = bench.kb;
    BenchReport report;
    report.seed = seed;
    report.corpus_size = static_cast<int>(kb.size());
    report.query_count = static_cast<int>(bench.queries.size());

    auto mean_over_queries = [&](auto&& retrieve_ids) {
        double total = 0.0;
        for (std::size_t q = 0; q < bench.queries.size(); ++q) {
            const RetrievalResult res = retrieve_ids(q);
            std::vector<std::string> ids;
            for (const auto& item : res.items) ids.push_back(item.id);
            total += held_out_reward(bench.queries[q], ids, kb, llm);
        }
        return 100.0 * total / static_cast<double>(bench.queries.size());
    };

    for (const auto strategy : {RetrievalStrategy::none, RetrievalStrategy::random, RetrievalStrategy::cosine}) {
        const double score = mean_over_queries([&](std::size_t q) {
            return baseline_retrieve(strategy, bench.queries[q].embedding, kb, config.k, derive_seed(seed, 100 + q));
        });
        report.scores.push_back({to_string(strategy), score});
    }

    const TrainResult result = train_retrieval(kb, config, llm);
    const double scgat = mean_over_queries(
        [&](std::size_t q) { return retrieve(bench.queries[q].embedding, kb, result.params, config.k); });
    report.scores.push_back({to_string(RetrievalStrategy::scgat), scgat});

    double oracle = 0.0;
    for (const auto& q : bench.queries) oracle += q.best_ref_cider;
    report.oracle_cider = 100.0 * oracle / static_cast<double>(bench.queries.size());

    const std::size_t window = std::min<std::size_t>(50, result.log.size());
    for (std::size_t i = 0; i < window; ++i) {
        report.train_initial_reward += result.log[i].mean_reward;
        report.train_final_reward += result.log[result.log.size() - window + i].mean_reward;
    }
    report.train_initial_reward /= static_cast<double>(window);
    report.train_final_reward /= static_cast<double>(window);

    if (trained) *trained = result.params;
    return report;
}

std::string BenchReport::to_json() const {
    nlohmann::json strategies = nlohmann::json::object();
    for (const auto& s : scores) strategies[s.strategy] = s.mean_cider;
    nlohmann::json doc{{"seed", seed},
                       {"corpus_size", corpus_size},
                       {"queries", query_count},
                       {"mean_cider_percent", strategies},
                       {"oracle_cider_percent", oracle_cider},
                       {"train_reward_first_50", train_initial_reward},
                       {"train_reward_last_50", train_final_reward}};
    return doc.dump(2);
}

std::string BenchReport::to_table() const {
    std::ostringstream out;
    out << std::fixed << std::setprecision(2);
    out << "strategy   mean CIDEr %\n";
    for (const auto& s : scores) out << std::left << std::setw(10) << s.strategy << " " << s.mean_cider << "\n";
    out << std::left << std::setw(10) << "oracle" << " " << oracle_cider << "\n";
    out << std::setprecision(4) << "train reward first 50 steps " << train_initial_reward << ", last 50 steps "
        << train_final_reward << "\n";
    return out.str();
}

}  // namespace kdcvg
