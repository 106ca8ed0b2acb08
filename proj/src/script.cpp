#include "kdcvg/script.hpp"

#include "kdcvg/cider.hpp"
#include "kdcvg/errors.hpp"
#include "kdcvg/log.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <sstream>

namespace kdcvg {
namespace {

const std::set<std::string> kMotionVerbs = {
    "fall",    "falls",    "falling",  "drip",     "drips",     "dripping", "drop",      "drops",    "dropping",
    "splash",  "splashes", "splashing", "ripple",  "ripples",   "rippling", "spin",      "spins",    "spinning",
    "rotate",  "rotates",  "rotating", "swirl",    "swirls",    "swirling", "flow",      "flows",    "flowing",
    "pour",    "pours",    "pouring",  "rise",     "rises",     "rising",   "float",     "floats",   "floating",
    "drift",   "drifts",   "drifting", "glide",    "glides",    "gliding",  "slide",     "slides",   "sliding",
    "bounce",  "bounces",  "bouncing", "spray",    "sprays",    "spraying", "spread",    "spreads",  "spreading",
    "melt",    "melts",    "melting",  "burst",    "bursts",    "bursting", "zoom",      "zooms",    "zooming",
    "pan",     "pans",     "panning",  "wave",     "waves",     "waving",   "brush",     "brushes",  "brushing",
    "wash",    "washes",   "washing",  "foam",     "foams",     "foaming",  "bubble",    "bubbles",  "bubbling",
    "lather",  "lathers",  "scrub",    "scrubs",   "roll",      "rolls",    "rolling",   "shake",    "shakes",
    "shaking", "move",     "moves",    "moving",   "turn",      "turns",    "turning",   "crash",    "crashes",
    "sweep",   "sweeps",   "sweeping", "unfold",   "unfolds",   "bloom",    "blooms",    "blooming", "sprinkle",
    "sprinkles", "squeeze", "squeezes", "dissolve", "dissolves", "orbit",   "orbits",    "twirl",    "twirls"};

const std::set<std::string> kLocativeCues = {"on",      "in",     "at",        "over",     "under",   "inside",
                                             "beside",  "against", "across",   "above",    "below",   "near",
                                             "behind",  "background", "backdrop", "room",  "counter", "table",
                                             "bathroom", "kitchen", "studio",  "outdoors", "indoors"};

const std::set<std::string> kFunctionWords = {"and",  "for",  "with", "the",  "from", "your", "our",
                                              "you",  "all",  "its",  "into", "that", "this", "more",
                                              "most", "very", "than", "per",  "not",  "any",  "are"};

bool has_any(const std::string& clause, const std::set<std::string>& lexicon) {
    for (const auto& tok : tokenize(clause)) {
        if (lexicon.contains(tok)) return true;
    }
    return false;
}

std::string flatten(std::string_view text) {
    std::string out(text);
    std::replace(out.begin(), out.end(), '\n', ' ');
    std::replace(out.begin(), out.end(), '\r', ' ');
    return out;
}

struct Labeled {
    std::optional<std::string> subject;
    std::optional<std::string> scene;
    std::optional<std::string> motion;

    bool any() const { return subject || scene || motion; }
};

// Strips "label:" from the start of a line, case-insensitively.
std::optional<std::string> labeled_value(const std::string& line, std::string_view label) {
    const std::string t = trim(line);
    if (t.size() <= label.size() || to_lower_ascii(t.substr(0, label.size())) != label || t[label.size()] != ':') {
        return std::nullopt;
    }
    return trim(t.substr(label.size() + 1));
}

Labeled scan_labels(std::string_view text) {
    Labeled out;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (auto v = labeled_value(line, "subject"); v && !out.subject) out.subject = *v;
        else if (auto v2 = labeled_value(line, "scene"); v2 && !out.scene) out.scene = *v2;
        else if (auto v3 = labeled_value(line, "motion"); v3 && !out.motion) out.motion = *v3;
    }
    return out;
}

std::vector<std::string> split_clauses(std::string_view text) {
    std::vector<std::string> clauses;
    std::string current;
    for (const char c : text) {
        if (c == '.' || c == ';' || c == ',' || c == '\n' || c == '!' || c == '?') {
            if (auto t = trim(current); !t.empty()) clauses.push_back(std::move(t));
            current.clear();
        } else {
            current += c;
        }
    }
    if (auto t = trim(current); !t.empty()) clauses.push_back(std::move(t));
    return clauses;
}

ScriptComponents heuristic_parse(std::string_view text) {
    const auto clauses = split_clauses(text);
    std::optional<std::size_t> motion_idx;
    for (std::size_t i = 1; i < clauses.size() && !motion_idx; ++i) {
        if (has_any(clauses[i], kMotionVerbs)) motion_idx = i;
    }
    if (!motion_idx && !clauses.empty() && has_any(clauses[0], kMotionVerbs)) motion_idx = 0;
    if (!motion_idx) throw ParseError("script parse failure: no motion component found");

    ScriptComponents out;
    out.subject = clauses[0];
    out.motion = clauses[*motion_idx];
    for (std::size_t i = 1; i < clauses.size(); ++i) {
        if (i != *motion_idx && has_any(clauses[i], kLocativeCues)) {
            out.scene = clauses[i];
            break;
        }
    }
    return out;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string replace_word(const std::string& text, const std::string& word, const std::string& replacement) {
    if (word.empty()) return text;
    const std::string lower = to_lower_ascii(text);
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto hit = lower.find(word, pos);
        if (hit == std::string::npos) break;
        const bool left_ok = hit == 0 || !is_word_char(text[hit - 1]);
        const bool right_ok = hit + word.size() >= text.size() || !is_word_char(text[hit + word.size()]);
        out.append(text, pos, hit - pos);
        if (left_ok && right_ok) {
            out += replacement;
        } else {
            out.append(text, hit, word.size());
        }
        pos = hit + word.size();
    }
    out.append(text, pos, std::string::npos);
    return out;
}

std::string render_context_script(const Script& script) {
    std::string text = script.structured ? script.structured->to_labeled() : script.raw;
    std::string out;
    for (const char c : text) {
        if (c == '\n') out += " | ";
        else if (c != '\r') out += c;
    }
    return out;
}

constexpr const char* kInstructionText =
    "Write the advertising video script for the target selling point. Keep the motion prior verbatim and answer "
    "with three labeled lines: subject, scene, motion.";

constexpr const char* kAdaptTask = "[ADAPTATION TASK]";
constexpr const char* kAdaptReference = "[REFERENCE]";

std::string adaptation_prompt(const ScriptComponents& components, const SellingPoint& target,
                              const std::vector<ContextEntry>& context) {
    std::ostringstream out;
    out << kAdaptTask << "\n"
        << "Rewrite the subject and scene for the target product. Do not change the motion.\n"
        << kAdaptReference << "\n"
        << "selling point: " << (context.empty() ? std::string() : flatten(context.front().selling_point)) << "\n"
        << components.to_labeled() << "\n"
        << prompt_sections::kTarget << "\n"
        << "selling point: " << flatten(target.text) << "\n";
    return out.str();
}

}  // namespace

std::vector<ContextEntry> context_from_retrieval(const RetrievalResult& result, const KnowledgeBase& kb) {
    std::vector<ContextEntry> context;
    context.reserve(result.items.size());
    for (const auto& item : result.items) {
        const auto* rec = kb.find(item.id);
        if (!rec) throw Error("retrieved id \"" + item.id + "\" not in the knowledge base");
        context.push_back({rec->id(), rec->selling_point.text, rec->script});
    }
    return context;
}

ScriptComponents parse_components(const Script& script) {
    if (script.structured) return *script.structured;
    const Labeled labels = scan_labels(script.raw);
    if (labels.any()) {
        if (!labels.motion || labels.motion->empty()) {
            throw ParseError("script parse failure: labeled script is missing \"motion\"");
        }
        return {labels.subject.value_or(""), labels.scene.value_or(""), *labels.motion};
    }
    return heuristic_parse(script.raw);
}

std::string head_noun(std::string_view selling_point) {
    const Tokens tokens = tokenize(selling_point);
    for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
        const std::string& tok = *it;
        if (tok.size() < 3 || kFunctionWords.contains(tok)) continue;
        if (std::all_of(tok.begin(), tok.end(), [](char c) { return c >= 'a' && c <= 'z'; })) return tok;
    }
    return {};
}

ScriptComponents mock_adapt(const ScriptComponents& components, std::string_view reference_selling_point,
                            std::string_view target_selling_point) {
    const std::string from = head_noun(reference_selling_point);
    const std::string to = head_noun(target_selling_point);
    if (from.empty() || to.empty() || from == to) return components;
    return {replace_word(components.subject, from, to), replace_word(components.scene, from, to), components.motion};
}

AdaptedComponents adapt_components(const ScriptComponents& components, const SellingPoint& target,
                                   const std::vector<ContextEntry>& context, LlmClient* llm) {
    const std::string reference = context.empty() ? std::string() : context.front().selling_point;
    if (llm != nullptr) {
        try {
            const auto response = llm->complete({adaptation_prompt(components, target, context), 256});
            const Labeled labels = scan_labels(response.script);
            if (!labels.subject || !labels.scene) throw LlmError("adaptation reply lacks subject/scene labels");
            return {{*labels.subject, *labels.scene, components.motion}, false, {}};
        } catch (const LlmError& e) {
            const std::string warning = std::string("LLM adaptation failed, using mock substitution: ") + e.what();
            log::warn(warning);
            return {mock_adapt(components, reference, target.text), true, warning};
        }
    }
    return {mock_adapt(components, reference, target.text), false, {}};
}

std::string PromptBundle::serialize() const {
    namespace ps = prompt_sections;
    std::ostringstream out;
    out << ps::kMotionPrior << "\n"
        << "motion: " << flatten(motion_prior) << "\n"
        << ps::kAdapted << "\n"
        << "subject: " << flatten(adapted_subject) << "\n"
        << "scene: " << flatten(adapted_scene) << "\n"
        << ps::kContext << "\n";
    for (std::size_t i = 0; i < context.size(); ++i) {
        out << "reference " << (i + 1) << " selling point: " << flatten(context[i].first) << "\n"
            << "reference " << (i + 1) << " script: " << flatten(context[i].second) << "\n";
    }
    out << ps::kTarget << "\n"
        << "selling point: " << flatten(target) << "\n"
        << ps::kInstruction << "\n"
        << kInstructionText << "\n";
    return out.str();
}

PromptBundle build_prompt(const ScriptComponents& components, const std::vector<ContextEntry>& context,
                          const SellingPoint& target) {
    PromptBundle bundle;
    bundle.motion_prior = flatten(components.motion);
    bundle.adapted_subject = flatten(components.subject);
    bundle.adapted_scene = flatten(components.scene);
    for (const auto& entry : context) {
        bundle.context.emplace_back(flatten(entry.selling_point), render_context_script(entry.script));
    }
    bundle.target = flatten(target.text);
    return bundle;
}

PromptBundle parse_prompt(std::string_view prompt) {
    namespace ps = prompt_sections;
    const std::array<std::string_view, 5> order = {ps::kMotionPrior, ps::kAdapted, ps::kContext, ps::kTarget,
                                                   ps::kInstruction};
    std::vector<std::vector<std::string>> sections(order.size());
    std::size_t next = 0;
    std::optional<std::size_t> current;
    std::istringstream in{std::string(prompt)};
    std::string line;
    while (std::getline(in, line)) {
        if (next < order.size() && line == order[next]) {
            current = next++;
            continue;
        }
        if (!current) throw ParseError("prompt does not start with " + std::string(ps::kMotionPrior));
        sections[*current].push_back(line);
    }
    if (next != order.size()) throw ParseError("prompt is missing section " + std::string(order[next]));

    auto field = [](const std::vector<std::string>& lines, std::size_t idx, std::string_view label) {
        const std::string prefix = std::string(label) + ": ";
        if (idx >= lines.size() || lines[idx].rfind(prefix, 0) != 0) {
            throw ParseError("prompt section lacks \"" + std::string(label) + "\"");
        }
        return lines[idx].substr(prefix.size());
    };

    PromptBundle bundle;
    bundle.motion_prior = field(sections[0], 0, "motion");
    bundle.adapted_subject = field(sections[1], 0, "subject");
    bundle.adapted_scene = field(sections[1], 1, "scene");
    const auto& ctx = sections[2];
    if (ctx.size() % 2 != 0) throw ParseError("prompt context section is malformed");
    for (std::size_t i = 0; i < ctx.size(); i += 2) {
        const std::string n = "reference " + std::to_string(i / 2 + 1);
        bundle.context.emplace_back(field(ctx, i, n + " selling point"), field(ctx, i + 1, n + " script"));
    }
    bundle.target = field(sections[3], 0, "selling point");
    return bundle;
}

Script synthesize(const PromptBundle& bundle, LlmClient& llm) {
    const LlmResponse response = llm.complete({bundle.serialize(), 512});
    if (trim(response.script).empty()) throw LlmError("LLM returned an empty script");
    ScriptComponents parsed = parse_components(Script{response.script, std::nullopt});
    if (parsed.motion != bundle.motion_prior) {
        log::warn("LLM altered the motion prior; restoring it");
        parsed.motion = bundle.motion_prior;
    }
    return Script::from_components(parsed);
}

LlmResponse MockLlmClient::complete(const LlmRequest& request) {
    PromptBundle bundle;
    try {
        bundle = parse_prompt(request.prompt);
    } catch (const ParseError& e) {
        throw LlmError(std::string("mock LLM cannot answer this prompt: ") + e.what());
    }
    return {ScriptComponents{bundle.adapted_subject, bundle.adapted_scene, bundle.motion_prior}.to_labeled()};
}

ScriptComponents fallback_components(const SellingPoint& target) {
    std::string noun = head_noun(target.text);
    if (noun.empty()) noun = "product";
    return {noun, "plain studio backdrop", "static shot"};
}

Composition compose_script(const SellingPoint& target, const std::vector<ContextEntry>& context, LlmClient& llm) {
    Composition out;
    if (context.empty()) {
        out.adapted.components = fallback_components(target);
    } else {
        const ScriptComponents reference = parse_components(context.front().script);
        out.adapted = adapt_components(reference, target, context, llm.is_mock() ? nullptr : &llm);
    }
    out.bundle = build_prompt(out.adapted.components, context, target);
    out.script = synthesize(out.bundle, llm);
    return out;
}

}  // namespace kdcvg
