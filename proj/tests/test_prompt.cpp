/// @file test_prompt.cpp
/// @brief Template registry, placeholder substitution, rendering, persona
///        wrapping, and follow-up prompts.

#include "jury/prompt.hpp"

#include <gtest/gtest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "jury/errors.hpp"

namespace jury {
namespace {

namespace fs = std::filesystem;

Sample pairwise_sample() {
    Sample sample;
    sample.id = "s1";
    sample.fields = {{"instruction", "Improve time management."},
                     {"input", ""},
                     {"response1", "Make a schedule."},
                     {"response2", "Use a planner."}};
    return sample;
}

fs::path make_temp_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() /
                   ("jury-" + tag + "-" + std::to_string(::getpid()) + "-" +
                    std::to_string(std::rand()));
    fs::create_directories(dir);
    return dir;
}

// ---------------------------------------------------------------------------
// Builtin templates and tasks
// ---------------------------------------------------------------------------

TEST(BuiltinTemplates, ShippedIdsPresent) {
    const TemplateRegistry& reg = builtin_templates();
    for (const char* id : {"pandalm-pairwise", "oid-caption", "summeval-rubric",
                           "topicalchat-rubric", "faireval-12", "persona-general-public",
                           "persona-critic", "persona-news-author", "persona-psychologist",
                           "persona-scientist"})
        EXPECT_TRUE(reg.contains(id)) << id;
}

TEST(BuiltinTemplates, UnknownTemplateThrows) {
    try {
        builtin_templates().get("not-a-template");
        FAIL() << "expected TemplateNotFound";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "TemplateNotFound");
    }
}

TEST(BuiltinTasks, AllValidate) {
    for (const std::string& id : builtin_task_ids())
        EXPECT_NO_THROW(validate_task_spec(builtin_task(id))) << id;
}

TEST(BuiltinTasks, ShapesMatchTheirBenchmarks) {
    EXPECT_EQ(builtin_task("pandalm").kind, TaskKind::PairwiseChoice);
    EXPECT_EQ(builtin_task("faireval").kind, TaskKind::PairwiseChoice);
    EXPECT_EQ(builtin_task("oid-caption").kind, TaskKind::BinaryJudgment);

    const TaskSpec summeval = builtin_task("summeval");
    EXPECT_EQ(summeval.kind, TaskKind::Rubric);
    ASSERT_EQ(summeval.base_dimensions().size(), 4u);
    EXPECT_EQ(summeval.base_dimensions()[0].name, "Coherence");

    const TaskSpec topical = builtin_task("topicalchat");
    const DimensionSpec* naturalness = topical.find_dimension("Naturalness");
    ASSERT_NE(naturalness, nullptr);
    EXPECT_TRUE(naturalness->is_composite());
    EXPECT_EQ(naturalness->composite_of,
              (std::vector<std::string>{"Understandable", "Natural"}));
}

TEST(BuiltinTasks, UnknownIdThrows) {
    EXPECT_THROW(builtin_task("nope"), Error);
}

TEST(RoleChain, DefaultPersonasExistInRegistry) {
    const auto roles = default_role_chain();
    ASSERT_EQ(roles.size(), 5u);
    for (const std::string& id : roles) EXPECT_TRUE(builtin_templates().contains(id)) << id;
}

// ---------------------------------------------------------------------------
// Placeholder substitution
// ---------------------------------------------------------------------------

TEST(Substitution, ReplacesEveryMarker) {
    const std::string out = substitute_placeholders(
        "Q: {q}\nA: {a}\nAgain: {q}", {{"q", "why"}, {"a", "because"}});
    EXPECT_EQ(out, "Q: why\nA: because\nAgain: why");
}

TEST(Substitution, NonIdentifierBracesAreLiteral) {
    const std::string out = substitute_placeholders("json looks like {\"k\": 1} or {}", {});
    EXPECT_EQ(out, "json looks like {\"k\": 1} or {}");
}

TEST(Substitution, MissingValueNamesThePlaceholder) {
    try {
        substitute_placeholders("{present} {absent}", {{"present", "x"}});
        FAIL() << "expected MissingFieldError";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "MissingFieldError");
        EXPECT_NE(std::string(e.what()).find("absent"), std::string::npos);
    }
}

// ---------------------------------------------------------------------------
// render
// ---------------------------------------------------------------------------

TEST(Render, SubstitutesSampleFields) {
    const TaskSpec task = builtin_task("pandalm");
    const RenderedPrompt prompt = render(task, pairwise_sample(), "A");
    const std::string text = prompt.joined_text();
    EXPECT_NE(text.find("Improve time management."), std::string::npos);
    EXPECT_NE(text.find("Make a schedule."), std::string::npos);
    EXPECT_NE(text.find("Use a planner."), std::string::npos);
    EXPECT_EQ(text.find("{instruction}"), std::string::npos);
    EXPECT_EQ(prompt.template_id, "pandalm-pairwise");
    EXPECT_FALSE(prompt.has_image());
}

TEST(Render, HashIsDeterministicAndInputSensitive) {
    const TaskSpec task = builtin_task("pandalm");
    const Sample sample = pairwise_sample();
    const RenderedPrompt a = render(task, sample, "A");
    const RenderedPrompt b = render(task, sample, "A");
    EXPECT_EQ(a.byte_hash, b.byte_hash);
    ASSERT_EQ(a.byte_hash.size(), 64u);  // hex SHA-256

    Sample changed = sample;
    changed.fields["response2"] = "Use a different planner.";
    EXPECT_NE(render(task, changed, "A").byte_hash, a.byte_hash);
}

TEST(Render, MissingSampleFieldThrows) {
    const TaskSpec task = builtin_task("pandalm");
    Sample sample = pairwise_sample();
    sample.fields.erase("response2");
    EXPECT_THROW(render(task, sample, "A"), Error);
}

TEST(Render, AttachesSampleImage) {
    const TaskSpec task = builtin_task("oid-caption");
    Sample sample;
    sample.id = "img1";
    sample.fields["caption"] = "a dog on a lawn";
    sample.image = Attachment{"/data/dog.png", "image/png"};
    const RenderedPrompt prompt = render(task, sample, "A");
    EXPECT_TRUE(prompt.has_image());
    EXPECT_NE(prompt.joined_text().find("a dog on a lawn"), std::string::npos);

    // The attachment is part of the hashed payload.
    Sample other = sample;
    other.image = Attachment{"/data/cat.png", "image/png"};
    EXPECT_NE(render(task, other, "A").byte_hash, prompt.byte_hash);
}

// ---------------------------------------------------------------------------
// render_followup / apply_persona
// ---------------------------------------------------------------------------

TEST(Followup, AppendsPriorVerdictSummaries) {
    const TaskSpec task = builtin_task("pandalm");
    const RenderedPrompt base = render(task, pairwise_sample(), "B");
    const RenderedPrompt follow = render_followup(
        base, {{"A", "choice=Equal; Assistant1=80; Assistant2=80"}});
    const std::string text = follow.joined_text();
    EXPECT_NE(text.find("choice=Equal; Assistant1=80; Assistant2=80"), std::string::npos);
    EXPECT_NE(text.find("agree or disagree"), std::string::npos);
    EXPECT_NE(follow.byte_hash, base.byte_hash);

    // The original instructions stay in place ahead of the block.
    EXPECT_LT(text.find("Improve time management."), text.find("Prior Evaluations"));
}

TEST(Followup, EmptyPriorIsAPreconditionError) {
    const RenderedPrompt base = render(builtin_task("pandalm"), pairwise_sample(), "A");
    try {
        render_followup(base, {});
        FAIL() << "expected PreconditionError";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "PreconditionError");
    }
}

TEST(Followup, GrowingChainKeepsDistinctHashes) {
    const RenderedPrompt base = render(builtin_task("pandalm"), pairwise_sample(), "A");
    std::vector<PriorVerdict> prior;
    std::string last_hash = base.byte_hash;
    for (int turn = 0; turn < 4; ++turn) {
        prior.push_back({"E" + std::to_string(turn), "choice=Equal"});
        const RenderedPrompt next = render_followup(base, prior);
        EXPECT_NE(next.byte_hash, last_hash);
        last_hash = next.byte_hash;
    }
}

TEST(Persona, PrependsPersonaSentence) {
    const RenderedPrompt base = render(builtin_task("faireval"),
        [] {
            Sample s;
            s.id = "q1";
            s.fields = {{"question", "Why is the sky blue?"},
                        {"answer1", "Rayleigh scattering."},
                        {"answer2", "Reflections from the sea."}};
            return s;
        }(),
        "A");
    const RenderedPrompt wrapped = apply_persona(base, "persona-critic");
    EXPECT_NE(wrapped.byte_hash, base.byte_hash);
    const std::string persona_text = builtin_templates().get("persona-critic").text;
    EXPECT_EQ(wrapped.joined_text().rfind(persona_text, 0), 0u)
        << "persona text must lead the user message";

    EXPECT_THROW(apply_persona(base, "persona-unknown"), Error);
}

// ---------------------------------------------------------------------------
// Registry overrides
// ---------------------------------------------------------------------------

TEST(Registry, DirectoryOverridesBuiltinTemplate) {
    const fs::path dir = make_temp_dir("tmpl");
    std::ofstream(dir / "pandalm-pairwise.txt") << "OVERRIDE {instruction}";
    std::ofstream(dir / "extra-notes.md") << "ignored";

    TemplateRegistry reg = builtin_templates();
    reg.load_directory(dir.string());
    EXPECT_EQ(reg.get("pandalm-pairwise").text, "OVERRIDE {instruction}");
    EXPECT_EQ(reg.get("pandalm-pairwise").version, "custom");
    EXPECT_FALSE(reg.contains("extra-notes"));

    TaskSpec task = builtin_task("pandalm");
    const RenderedPrompt prompt = render(task, pairwise_sample(), "A", reg);
    EXPECT_EQ(prompt.joined_text(), "OVERRIDE Improve time management.");

    fs::remove_all(dir);
    EXPECT_THROW(reg.load_directory((dir / "gone").string()), Error);
}

// ---------------------------------------------------------------------------
// Payload
// ---------------------------------------------------------------------------

TEST(Payload, CoversTemplateIdAndMessages) {
    RenderedPrompt p;
    p.template_id = "t1";
    p.messages.push_back({Message::Role::User, "hello", std::nullopt});
    const std::string payload = prompt_payload(p);
    EXPECT_NE(payload.find("template=t1"), std::string::npos);
    EXPECT_NE(payload.find("hello"), std::string::npos);

    RenderedPrompt q = p;
    q.template_id = "t2";
    EXPECT_NE(prompt_payload(q), payload);
}

}  // namespace
}  // namespace jury
