/// @file prompt.cpp

#include "jury/prompt.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "jury/digest.hpp"

namespace jury {

namespace fs = std::filesystem;

std::string RenderedPrompt::joined_text() const {
    std::string out;
    for (const auto& m : messages) {
        if (!out.empty()) out += "\n";
        out += m.text;
    }
    return out;
}

bool RenderedPrompt::has_image() const {
    for (const auto& m : messages)
        if (m.image) return true;
    return false;
}

// ---------------------------------------------------------------------------
// TemplateRegistry
// ---------------------------------------------------------------------------

void TemplateRegistry::add(PromptTemplate tmpl) {
    templates_[tmpl.id] = std::move(tmpl);
}

const PromptTemplate& TemplateRegistry::get(const std::string& id) const {
    auto it = templates_.find(id);
    if (it == templates_.end())
        throw Error("TemplateNotFound", "no template '" + id + "'");
    return it->second;
}

bool TemplateRegistry::contains(const std::string& id) const {
    return templates_.contains(id);
}

std::vector<std::string> TemplateRegistry::ids() const {
    std::vector<std::string> out;
    out.reserve(templates_.size());
    for (const auto& [id, _] : templates_) out.push_back(id);
    return out;
}

void TemplateRegistry::load_directory(const std::string& dir) {
    if (!fs::is_directory(dir))
        throw Error("MissingFile", "template directory not found: " + dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        std::ifstream in(entry.path());
        std::ostringstream body;
        body << in.rdbuf();
        add({entry.path().stem().string(), "custom", body.str()});
    }
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

std::string substitute_placeholders(const std::string& text,
                                    const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(text.size());
    size_t pos = 0;
    while (pos < text.size()) {
        size_t open = text.find('{', pos);
        if (open == std::string::npos) {
            out.append(text, pos, std::string::npos);
            break;
        }
        size_t close = text.find('}', open + 1);
        if (close == std::string::npos) {
            out.append(text, pos, std::string::npos);
            break;
        }
        std::string name = text.substr(open + 1, close - open - 1);
        // Placeholder names are identifiers; anything else is literal text.
        bool ident = !name.empty();
        for (char c : name)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') ident = false;
        if (!ident) {
            out.append(text, pos, close + 1 - pos);
            pos = close + 1;
            continue;
        }
        auto it = values.find(name);
        if (it == values.end())
            throw Error("MissingFieldError", "no value for placeholder '" + name + "'");
        out.append(text, pos, open - pos);
        out.append(it->second);
        pos = close + 1;
    }
    return out;
}

std::string prompt_payload(const RenderedPrompt& prompt) {
    std::ostringstream payload;
    payload << "template=" << prompt.template_id << '\x1e';
    for (const auto& m : prompt.messages) {
        payload << (m.role == Message::Role::System ? "system" : "user") << '\x1f'
                << m.text << '\x1f';
        if (m.image) payload << m.image->path << '\x1f' << m.image->media_type;
        payload << '\x1e';
    }
    return payload.str();
}

namespace {

void seal(RenderedPrompt& prompt) {
    prompt.byte_hash = sha256_hex(prompt_payload(prompt));
}

}  // namespace

RenderedPrompt render(const TaskSpec& task, const Sample& sample,
                      const std::string& evaluator_label,
                      const TemplateRegistry& registry) {
    check_placeholders(task, sample);
    const PromptTemplate& tmpl = registry.get(task.template_id);

    std::map<std::string, std::string> values = sample.fields;
    values["evaluator_label"] = evaluator_label;

    RenderedPrompt prompt;
    prompt.template_id = tmpl.id;
    Message user;
    user.role = Message::Role::User;
    user.text = substitute_placeholders(tmpl.text, values);
    if (sample.image) user.image = sample.image;
    prompt.messages.push_back(std::move(user));
    seal(prompt);
    return prompt;
}

RenderedPrompt render_followup(const RenderedPrompt& base,
                               const std::vector<PriorVerdict>& prior) {
    if (prior.empty())
        throw Error("PreconditionError", "render_followup requires at least one prior verdict");

    RenderedPrompt prompt = base;
    std::ostringstream block;
    block << "\n\n--- Prior Evaluations ---\n";
    for (const auto& p : prior)
        block << "Evaluator \"" << p.evaluator_label << "\": " << p.summary << "\n";
    block << "---\n"
          << "Review the prior evaluations above. State whether you agree or disagree "
             "with each of them and why, then give your own final verdict in exactly "
             "the format instructed above.";

    if (prompt.messages.empty()) prompt.messages.emplace_back();
    prompt.messages.back().text += block.str();
    seal(prompt);
    return prompt;
}

RenderedPrompt apply_persona(const RenderedPrompt& base, const std::string& persona_id,
                             const TemplateRegistry& registry) {
    const PromptTemplate& persona = registry.get(persona_id);
    RenderedPrompt prompt = base;
    for (auto& m : prompt.messages) {
        if (m.role == Message::Role::User) {
            m.text = persona.text + "\n\n" + m.text;
            break;
        }
    }
    seal(prompt);
    return prompt;
}

}  // namespace jury
