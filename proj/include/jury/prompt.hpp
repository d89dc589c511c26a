/// @file prompt.hpp
/// @brief Prompt templates and rendering: substitutes sample fields and the
///        evaluator label, wraps personas for role chains, and appends prior
///        verdict summaries for conversational chains.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jury/types.hpp"

namespace jury {

struct Message {
    enum class Role { System, User };
    Role role = Role::User;
    std::string text;
    std::optional<Attachment> image;
};

struct RenderedPrompt {
    std::vector<Message> messages;
    std::string template_id;
    /// SHA-256 over the canonical serialization of the messages and the
    /// template id. Identical inputs yield identical digests; the digest
    /// changes whenever any substituted value (including the evaluator
    /// label) changes.
    std::string byte_hash;

    /// Concatenated user-visible text, for assertions and transcripts.
    std::string joined_text() const;
    bool has_image() const;
};

struct PromptTemplate {
    std::string id;
    std::string version = "1";
    std::string text;  // "{name}" placeholders
};

/// Template registry. Shipped templates are registered at startup; custom
/// templates can be layered from a directory of *.txt files (file stem =
/// template id, overriding a builtin of the same id).
class TemplateRegistry {
public:
    void add(PromptTemplate tmpl);
    /// Throws Error("TemplateNotFound").
    const PromptTemplate& get(const std::string& id) const;
    bool contains(const std::string& id) const;
    std::vector<std::string> ids() const;

    /// Loads every "<id>.txt" under `dir` into the registry.
    void load_directory(const std::string& dir);

private:
    std::map<std::string, PromptTemplate> templates_;
};

/// Registry preloaded with the shipped templates: pandalm-pairwise,
/// oid-caption, summeval-rubric, topicalchat-rubric, faireval-12, and the
/// persona wrappers (persona-general-public, persona-critic,
/// persona-news-author, persona-psychologist, persona-scientist).
const TemplateRegistry& builtin_templates();

/// Ready-made TaskSpecs matching the shipped templates, keyed by task id:
/// pandalm, oid-caption, summeval, topicalchat, faireval.
TaskSpec builtin_task(const std::string& id);
std::vector<std::string> builtin_task_ids();

/// Ordered persona ids for the default role chain.
std::vector<std::string> default_role_chain();

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

/// Renders the task's template for one sample and evaluator label. All
/// placeholders are substituted; image tasks attach the sample image to the
/// user message. Throws Error("MissingFieldError") / Error("TemplateNotFound").
RenderedPrompt render(const TaskSpec& task, const Sample& sample,
                      const std::string& evaluator_label,
                      const TemplateRegistry& registry = builtin_templates());

/// One prior evaluator's verdict, summarised for a follow-up turn.
struct PriorVerdict {
    std::string evaluator_label;
    std::string summary;  // "choice=Equal; Assistant1=80; Assistant2=80"
};

/// Appends the prior evaluators' verdict summaries (in chain order) and an
/// instruction to state agreement or disagreement before giving a final
/// verdict in the original format. `prior` must be non-empty.
RenderedPrompt render_followup(const RenderedPrompt& base,
                               const std::vector<PriorVerdict>& prior);

/// Prepends the persona sentence for `persona_id` (a persona template) to
/// the prompt's first user message.
RenderedPrompt apply_persona(const RenderedPrompt& base, const std::string& persona_id,
                             const TemplateRegistry& registry = builtin_templates());

/// Substitutes "{name}" markers in `text` from `values`. Throws
/// Error("MissingFieldError") on an unknown placeholder.
std::string substitute_placeholders(const std::string& text,
                                    const std::map<std::string, std::string>& values);

/// Canonical serialization used for byte_hash (role/text/image per message).
std::string prompt_payload(const RenderedPrompt& prompt);

}  // namespace jury
