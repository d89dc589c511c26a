/// @file templates.cpp
/// @brief Shipped prompt templates and the task specs bound to them.
///
/// Template texts are the method: edits here change what the judges are
/// asked, so they are versioned and covered by marker-count tests.

#include <string>

#include "jury/prompt.hpp"

namespace jury {

namespace {

const char* kPandalmPairwise = R"tmpl(You are Evaluator "{evaluator_label}", assigned to assess the quality of two candidate answers for the given question.

--- Question & Candidate Answers ---
{instruction}

[The Start of Question]
{input}
[The End of Question]
[The Start of Assistant 1's Answer]
{response1}
[The End of Assistant 1's Answer]
[The Start of Assistant 2's Answer]
{response2}
[The End of Assistant 2's Answer]
---

Which Assistant's answer is the best?

Final Best Assistant: "Assistant 1"  or  "Assistant 2"  or  "Equal")tmpl";

const char* kOidCaption = R"tmpl(You are Evaluator "{evaluator_label}", assigned to assess the quality of "Caption Generation" from the "Image".

[The Start of Caption]
{caption}
[The End of Caption]

Is this a good caption for this image?

Final Score: (1=good, 0=bad))tmpl";

const char* kSummevalRubric = R"tmpl(You are Evaluator "{evaluator_label}", assigned to assess the quality of "Summarization" from the "Document text (News Article)".

--- Document Text & Summary ---
{document}

[The Start of Summary]
{summary}
[The End of Summary]

1. Coherence (1-5)
Definition: Logical flow and structure of the summary. A coherent summary is well-organized, with sentences connected naturally and presenting a clear progression of ideas.
Steps:
1. Read the news article carefully and identify the main topic and key points.
2. Read the summary and check whether it presents information in a logical order without contradictions or abrupt jumps.
3. Assign a score based on overall logical flow.
Final Score: (number between 1 and 5)

2. Consistency (1-5)
Definition: Faithfulness of the summary to the source text. A consistent summary should not contradict, misrepresent, or invent details.
Steps:
1. Compare the summary's statements with the source text.
2. Check if the summary accurately reflects the article's facts without adding false information.
3. Assign a score based on factual accuracy.
Final Score: (number between 1 and 5)

3. Fluency (1-5)
Definition: Readability and grammatical quality of the summary. A fluent summary uses correct grammar, natural phrasing, and smooth sentence transitions.
Steps:
1. Read the summary carefully, focusing on grammar, spelling, punctuation, and sentence flow.
2. Judge whether the writing is natural and easy to read.
3. Assign a score based on overall fluency.
Final Score: (number between 1 and 5)

4. Relevance (1-5)
Definition: The degree to which the summary focuses on the important and central aspects of the article while avoiding unnecessary or trivial details.
Steps:
1. Identify the most important points in the article.
2. Check if the summary captures these main points while avoiding irrelevant or minor details.
3. Assign a score based on overall relevance.
Final Score: (number between 1 and 5))tmpl";

const char* kTopicalchatRubric = R"tmpl(You are Evaluator "{evaluator_label}", assigned to assess the quality of "Conversational Responses" from the "Topical Chat" benchmark.

--- Conversation & Candidate Response ---
[The Start of Conversation]
{context}
[The End of Conversation]
[The Start of Assistant's Response]
{response}
[The End of Assistant's Response]

1. Understandable (0-1)
Is the response understandable in the context of the history? (Not if its on topic, but for example if it uses pronouns they should make sense)
-- A score of 0 (no) means that the response is difficult to understand. You do not know what the person is trying to say.
-- A score of 1 (yes) means that the response is understandable. You know what the person is trying to say.
Final Score: (0 = not understandable, 1 = understandable)

2. Natural (1-3)
Is the response naturally written?
Steps:
-- A score of 1 (bad) means that the response is unnatural.
-- A score of 2 (ok) means the response is strange, but not entirely unnatural.
-- A score of 3 (good) means that the response is natural.
Final Score: (1 = bad, 2 = okay, 3 = good)

3. Maintains Context (1-3)
Does the response serve as a valid continuation of the conversation history?
-- A score of 1 (no) means that the response drastically changes topic or ignores the conversation history.
-- A score of 2 (somewhat) means the response refers to the conversation history in a limited capacity (e.g., in a generic way) and shifts the conversation topic.
-- A score of 3 (yes) means the response is on topic and strongly acknowledges the conversation history.
Final Score: (1 = off-topic, 2 = partially relevant, 3 = fully on-topic)

4. Engaging (1-3)
Is the response dull/interesting?
-- A score of 1 (dull) means that the response is generic and dull.
-- A score of 2 (somewhat interesting) means the response is somewhat interesting and could engage you in the conversation (e.g., an opinion, thought)
-- A score of 3 (interesting) means the response is very interesting or presents an interesting fact
Final Score: (1 = dull, 2 = somewhat interesting, 3 = very interesting)

5. Uses Knowledge (0-1)
Given the interesting fact that the response is conditioned on, how well does the response use the fact?
-- A score of 0 (no) means the response does not mention or refer to the fact at all
-- A score of 1 (yes) means the response uses the fact well
Final Score: (0 = no, 1 = yes)

6. Overall Quality (1-5)
Given your answers above, what is your overall impression of this utterance?
-- A score of 1 (very bad). A completely invalid response. It would be difficult to recover the conversation after this.
-- A score of 2 (bad). Valid response, but otherwise poor in quality.
-- A score of 3 (neutral) means this response is neither good nor bad. This response has no negative qualities, but no positive ones either.
-- A score of 4 (good) means this is a good response, but falls short of being perfect because of a key flaw.
-- A score of 5 (very good) means this response is good and does not have any strong flaws.
Final Score: (1 = very bad, 2 = bad, 3 = neutral, 4 = good, 5 = very good))tmpl";

const char* kFaireval12 = R"tmpl(You are Evaluator "{evaluator_label}", assigned to assess the quality of two candidate answers for the given question.

[The Start of Question]
{question}
[The End of Question]
[The Start of Assistant 1's Answer]
{answer1}
[The End of Assistant 1's Answer]
[The Start of Assistant 2's Answer]
{answer2}
[The End of Assistant 2's Answer]

Please evaluate the accuracy, clarity, and relevance of the answer generated for the following question. Provide percentage scores along with detailed explanations for the following criteria:
1. Answer Relevance:
   - Score: [Provide score between 0 and 100]
   - Explanation: [Assess the clarity of the response. Is the answer easy to understand and logically structured? Are there any ambiguities or confusing phrases that could hinder comprehension?]
2. Depth and Completeness:
   - Score: [Provide score between 0 and 100]
   - Explanation: [Evaluate the depth of the response. Does it provide a thorough explanation, or does it lack detail? Are all key aspects of the question addressed adequately?]
3. Grammar and Linguistic Accuracy:
   - Score: [Provide score between 0 and 100]
   - Explanation: [Assess the grammatical correctness of the response. Are there any spelling or punctuation errors? Is the sentence structure correct and appropriate for the context?]
4. Contextual Appropriateness:
   - Score: [Provide score between 0 and 100]
   - Explanation: [Evaluate how well the answer adapts to the specific question category (e.g., "generic" or "knowledge"). Does it use relevant terminology and concepts appropriate to the subject matter?]
5. Conciseness and Precision:
   - Score: [Provide score between 0 and 100]
   - Explanation: [Evaluate whether the response is concise and to the point. Does the answer provide the necessary details without unnecessary elaboration or repetition?]
6. Creativity and Insight:
   - Score: [Provide score between 0 and 100]
   - Explanation: [Assess the creativity of the response. Does it offer a unique perspective or innovative solution, especially when dealing with complex or thought-provoking questions?]
7. Bias and Fairness:
   - Score: [Provide score between 0 and 100]
   - Explanation: [Evaluate the response for any signs of bias or unfairness. Does the answer exhibit neutrality, or does it reflect a particular perspective that may be considered biased or imbalanced?]
8. Knowledge Accuracy:
   - Score: [Provide score between 0 and 100]
   - Explanation: [Assess the accuracy of factual information presented in the answer. Are the facts correct? Are any misconceptions, errors, or outdated information included?]
9. Adaptability to Various Categories:
   - Score: [Provide score between 0 and 100]
   - Explanation: [Evaluate how well the answer adapts to different categories (e.g., "generic" vs. "knowledge"). Does the response adjust its tone, depth, and complexity based on the question category?]
10. Scalability of Responses:
   - Score: [Provide score between 0 and 100]
   - Explanation: [Evaluate how well the model handles a variety of question types and complexities. Does the model handle simple and complex questions effectively, or does its performance degrade with more challenging queries?]
11. Overall Answer Quality:
   - Score: [Provide score between 0 and 100]
   - Explanation: [Provide a final summary explanation for the overall score (Explain how it is calculated to show the calculation.) Consider how well all individual criteria performed. Offer insight into the general quality of the response based on the evaluation results.]
12. Error Detection and Correction:
Please analyze the provided response and identify any errors, inconsistencies, or areas where the response could be improved. The model should help by suggesting a corrected version of the output, focusing on the following points:
   - Identifying any missing or inaccurate information.
   - Correcting any grammatical or linguistic errors.
   - Ensuring the relevance and completeness of the answer.
   - Suggesting any improvements in clarity or coherence.
   - Making the answer more concise and precise where necessary.
13. Corrected Version:
   - Updated Answer: [Provide a corrected, revised version of the answer based on the analysis above.]

Apply the criteria above to both answers, then conclude with exactly these three lines:
- Final Score for Assistant 1: [overall score]
- Final Score for Assistant 2: [overall score]
- Final Best Assistant: "Assistant 1"  or  "Assistant 2"  or  "Equal")tmpl";

// Persona wrappers for role chains. One sentence, prepended to the base
// prompt's user message.
const char* kPersonaGeneralPublic =
    "You are a member of the General Public, judging the answers as an everyday reader.";
const char* kPersonaCritic =
    "You are a Critic, judging the answers with rigorous critical standards.";
const char* kPersonaNewsAuthor =
    "You are a News Author, judging the answers for accuracy and clarity of presentation.";
const char* kPersonaPsychologist =
    "You are a Psychologist, judging the answers for insight into human behavior and motivation.";
const char* kPersonaScientist =
    "You are a Scientist, judging the answers for factual rigor and sound reasoning.";

TemplateRegistry make_builtin_registry() {
    TemplateRegistry reg;
    reg.add({"pandalm-pairwise", "1", kPandalmPairwise});
    reg.add({"oid-caption", "1", kOidCaption});
    reg.add({"summeval-rubric", "1", kSummevalRubric});
    reg.add({"topicalchat-rubric", "1", kTopicalchatRubric});
    reg.add({"faireval-12", "1", kFaireval12});
    reg.add({"persona-general-public", "1", kPersonaGeneralPublic});
    reg.add({"persona-critic", "1", kPersonaCritic});
    reg.add({"persona-news-author", "1", kPersonaNewsAuthor});
    reg.add({"persona-psychologist", "1", kPersonaPsychologist});
    reg.add({"persona-scientist", "1", kPersonaScientist});
    return reg;
}

DimensionSpec pairwise_choice_dim() {
    return {"choice", CategoricalScale{{"Assistant1", "Assistant2", "Equal"}}, Aggregation::Majority, {}};
}

DimensionSpec int_dim(std::string name, int min, int max) {
    return {std::move(name), IntegerScale{min, max}, Aggregation::Mean, {}};
}

DimensionSpec binary_mean_dim(std::string name) {
    return {std::move(name), BinaryScale{}, Aggregation::Mean, {}};
}

}  // namespace

const TemplateRegistry& builtin_templates() {
    static const TemplateRegistry registry = make_builtin_registry();
    return registry;
}

std::vector<std::string> default_role_chain() {
    return {"persona-general-public", "persona-critic", "persona-news-author",
            "persona-psychologist", "persona-scientist"};
}

TaskSpec builtin_task(const std::string& id) {
    TaskSpec spec;
    spec.id = id;
    if (id == "pandalm") {
        spec.kind = TaskKind::PairwiseChoice;
        spec.template_id = "pandalm-pairwise";
        spec.placeholder_schema = {"instruction", "input", "response1", "response2"};
        spec.dimensions = {pairwise_choice_dim()};
    } else if (id == "faireval") {
        spec.kind = TaskKind::PairwiseChoice;
        spec.template_id = "faireval-12";
        spec.placeholder_schema = {"question", "answer1", "answer2"};
        spec.dimensions = {pairwise_choice_dim()};
    } else if (id == "oid-caption") {
        spec.kind = TaskKind::BinaryJudgment;
        spec.template_id = "oid-caption";
        spec.placeholder_schema = {"caption"};
        spec.dimensions = {{"quality", BinaryScale{}, Aggregation::Majority, {}}};
    } else if (id == "summeval") {
        spec.kind = TaskKind::Rubric;
        spec.template_id = "summeval-rubric";
        spec.placeholder_schema = {"document", "summary"};
        spec.dimensions = {int_dim("Coherence", 1, 5), int_dim("Consistency", 1, 5),
                           int_dim("Fluency", 1, 5), int_dim("Relevance", 1, 5)};
    } else if (id == "topicalchat") {
        spec.kind = TaskKind::Rubric;
        spec.template_id = "topicalchat-rubric";
        spec.placeholder_schema = {"context", "response"};
        spec.dimensions = {binary_mean_dim("Understandable"),
                           int_dim("Natural", 1, 3),
                           int_dim("MaintainsContext", 1, 3),
                           int_dim("Engaging", 1, 3),
                           binary_mean_dim("UsesKnowledge"),
                           int_dim("OverallQuality", 1, 5),
                           {"Naturalness", IntegerScale{0, 3}, Aggregation::Mean,
                            {"Understandable", "Natural"}}};
    } else {
        throw Error("TemplateNotFound", "no builtin task '" + id + "'");
    }
    return validate_task_spec(std::move(spec));
}

std::vector<std::string> builtin_task_ids() {
    return {"pandalm", "faireval", "oid-caption", "summeval", "topicalchat"};
}

}  // namespace jury
