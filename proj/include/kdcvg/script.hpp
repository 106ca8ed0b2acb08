#pragma once

#include "kdcvg/ackb.hpp"
#include "kdcvg/llm.hpp"
#include "kdcvg/scgat.hpp"
#include "kdcvg/types.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kdcvg {

/// One retrieved reference pair (selling point, script).
struct ContextEntry {
    std::string id;
    std::string selling_point;
    Script script;
};

std::vector<ContextEntry> context_from_retrieval(const RetrievalResult& result, const KnowledgeBase& kb);

/// Structured scripts are returned as-is. Raw text is scanned for
/// "subject:/scene:/motion:" labels, then falls back to clause heuristics
/// (first clause, locative cue, motion-verb lexicon). Throws ParseError
/// naming "motion" when no motion segment can be found.
ScriptComponents parse_components(const Script& script);

/// Last alphabetic token of length >= 3 that is not a function word.
std::string head_noun(std::string_view selling_point);

/// Deterministic adaptation: whole-word replacement of the reference's head
/// noun with the target's head noun in subject and scene. Motion untouched.
ScriptComponents mock_adapt(const ScriptComponents& components, std::string_view reference_selling_point,
                            std::string_view target_selling_point);

struct AdaptedComponents {
    ScriptComponents components;
    /// Set when an LLM adaptation failed and the mock substitution was used.
    bool fallback_used = false;
    std::string warning;
};

/// Rewrites subject and scene toward the target; motion is always returned
/// byte-identical. With llm == nullptr the mock substitution runs directly.
AdaptedComponents adapt_components(const ScriptComponents& components, const SellingPoint& target,
                                   const std::vector<ContextEntry>& context, LlmClient* llm = nullptr);

/// Prompt operands in fixed order: motion prior, adapted components,
/// semantic context, then the target and instruction.
struct PromptBundle {
    std::string motion_prior;
    std::string adapted_subject;
    std::string adapted_scene;
    std::vector<std::pair<std::string, std::string>> context;
    std::string target;

    std::string serialize() const;

    bool operator==(const PromptBundle&) const = default;
};

namespace prompt_sections {
inline constexpr const char* kMotionPrior = "[MOTION PRIOR]";
inline constexpr const char* kAdapted = "[ADAPTED COMPONENTS]";
inline constexpr const char* kContext = "[SEMANTIC CONTEXT]";
inline constexpr const char* kTarget = "[TARGET]";
inline constexpr const char* kInstruction = "[INSTRUCTION]";
}  // namespace prompt_sections

PromptBundle build_prompt(const ScriptComponents& components, const std::vector<ContextEntry>& context,
                          const SellingPoint& target);

/// Inverse of PromptBundle::serialize. Throws ParseError on a foreign prompt.
PromptBundle parse_prompt(std::string_view prompt);

/// Sends the serialized bundle to the client and parses the reply back into
/// components. The motion prior is enforced on the result.
Script synthesize(const PromptBundle& bundle, LlmClient& llm);

/// Built-in client: reads the component sections back out of the prompt and
/// answers with the canonical labeled script. Stateless.
class MockLlmClient final : public LlmClient {
public:
    LlmResponse complete(const LlmRequest& request) override;
    bool is_mock() const override { return true; }
};

/// Components used when no reference was retrieved.
ScriptComponents fallback_components(const SellingPoint& target);

struct Composition {
    AdaptedComponents adapted;
    PromptBundle bundle;
    Script script;
};

/// Full progressive generation: parse the top reference, adapt it to the
/// target, build the prompt and synthesize.
Composition compose_script(const SellingPoint& target, const std::vector<ContextEntry>& context, LlmClient& llm);

}  // namespace kdcvg
