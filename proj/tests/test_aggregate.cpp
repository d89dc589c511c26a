/// @file test_aggregate.cpp
/// @brief Majority voting with the documented tie rule, quorum gating, mean
///        and binary aggregation, and composite dimensions.

#include "jury/aggregate.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include <nlohmann/json.hpp>

#include "jury/errors.hpp"
#include "jury/prompt.hpp"

namespace jury {
namespace {

// Independent restatement of the documented tie rule, written against the
// count triple rather than the ballot.
Choice vote_oracle(int a1, int a2, int eq) {
    const int top = std::max({a1, a2, eq});
    const bool t1 = a1 == top, t2 = a2 == top, te = eq == top;
    const int at_top = int(t1) + int(t2) + int(te);
    if (at_top == 1) {
        if (t1) return Choice::Assistant1;
        if (t2) return Choice::Assistant2;
        return Choice::Equal;
    }
    if (at_top == 3) return Choice::Equal;           // three-way tie
    if (t1 && t2) return Choice::Equal;              // assistants tied
    return t1 ? Choice::Assistant1 : Choice::Assistant2;  // Equal + one assistant
}

std::vector<Choice> ballot(int a1, int a2, int eq) {
    std::vector<Choice> votes;
    votes.insert(votes.end(), size_t(a1), Choice::Assistant1);
    votes.insert(votes.end(), size_t(a2), Choice::Assistant2);
    votes.insert(votes.end(), size_t(eq), Choice::Equal);
    return votes;
}

Verdict choice_verdict(const std::string& sample, const std::string& evaluator, Choice c,
                       int turn = 0) {
    Verdict v;
    v.sample_id = sample;
    v.evaluator_id = evaluator;
    v.turn = turn;
    v.choice = c;
    v.parse_ok = true;
    return v;
}

Verdict score_verdict(const std::string& sample, const std::string& evaluator,
                      std::map<std::string, double> scores) {
    Verdict v;
    v.sample_id = sample;
    v.evaluator_id = evaluator;
    v.scores = std::move(scores);
    v.parse_ok = true;
    return v;
}

// ---------------------------------------------------------------------------
// majority_vote
// ---------------------------------------------------------------------------

TEST(MajorityVote, DocumentedTieRule) {
    EXPECT_EQ(majority_vote(ballot(2, 1, 0)), Choice::Assistant1);
    EXPECT_EQ(majority_vote(ballot(0, 3, 1)), Choice::Assistant2);
    EXPECT_EQ(majority_vote(ballot(1, 1, 0)), Choice::Equal);   // assistants tied
    EXPECT_EQ(majority_vote(ballot(2, 2, 1)), Choice::Equal);
    EXPECT_EQ(majority_vote(ballot(1, 0, 1)), Choice::Assistant1);  // Equal + one
    EXPECT_EQ(majority_vote(ballot(0, 2, 2)), Choice::Assistant2);
    EXPECT_EQ(majority_vote(ballot(1, 1, 1)), Choice::Equal);   // three-way
    EXPECT_EQ(majority_vote(ballot(0, 0, 2)), Choice::Equal);
}

TEST(MajorityVote, MatchesOracleOnEveryMultisetUpToSeven) {
    for (int n = 1; n <= 7; ++n)
        for (int a1 = 0; a1 <= n; ++a1)
            for (int a2 = 0; a1 + a2 <= n; ++a2) {
                const int eq = n - a1 - a2;
                EXPECT_EQ(majority_vote(ballot(a1, a2, eq)), vote_oracle(a1, a2, eq))
                    << "counts " << a1 << "/" << a2 << "/" << eq;
            }
}

TEST(MajorityVote, PermutationInvariant) {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> count(0, 4);
    for (int i = 0; i < 200; ++i) {
        std::vector<Choice> votes = ballot(count(rng), count(rng), count(rng));
        if (votes.empty()) votes.push_back(Choice::Equal);
        const Choice expected = majority_vote(votes);
        for (int shuffle = 0; shuffle < 5; ++shuffle) {
            std::shuffle(votes.begin(), votes.end(), rng);
            EXPECT_EQ(majority_vote(votes), expected);
        }
    }
}

TEST(MajorityVote, EmptyBallotThrows) {
    try {
        majority_vote({});
        FAIL() << "expected PreconditionError";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "PreconditionError");
    }
}

// ---------------------------------------------------------------------------
// binary_majority / mean_score
// ---------------------------------------------------------------------------

TEST(BinaryMajority, StrictMajorityTiesToZero) {
    EXPECT_EQ(binary_majority({1, 1, 0}), 1);
    EXPECT_EQ(binary_majority({1, 0}), 0);
    EXPECT_EQ(binary_majority({0, 0, 1}), 0);
    EXPECT_EQ(binary_majority({1}), 1);
    EXPECT_THROW(binary_majority({}), Error);
}

TEST(BinaryMajority, AgreesWithMeanOnOddBallots) {
    std::mt19937 rng(11);
    std::bernoulli_distribution bit(0.5);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + 2 * (trial % 4);  // 1, 3, 5, 7
        std::vector<int> votes;
        std::vector<double> values;
        for (int i = 0; i < n; ++i) {
            votes.push_back(bit(rng) ? 1 : 0);
            values.push_back(votes.back());
        }
        EXPECT_EQ(binary_majority(votes), mean_score(values) > 0.5 ? 1 : 0);
    }
}

TEST(MeanScore, AveragesAndRejectsEmpty) {
    EXPECT_DOUBLE_EQ(mean_score({1, 2, 3, 4}), 2.5);
    EXPECT_THROW(mean_score({}), Error);
}

// ---------------------------------------------------------------------------
// quorum_threshold
// ---------------------------------------------------------------------------

TEST(Quorum, ThresholdValues) {
    EXPECT_EQ(quorum_threshold(0.5, 7), 4);   // ceil(3.5)
    EXPECT_EQ(quorum_threshold(0.5, 6), 3);   // exact product is not pushed up
    EXPECT_EQ(quorum_threshold(0.5, 8), 4);
    EXPECT_EQ(quorum_threshold(1.0, 5), 5);
    EXPECT_EQ(quorum_threshold(0.3, 10), 3);
    EXPECT_EQ(quorum_threshold(0.01, 5), 1);  // floor of one verdict
    EXPECT_THROW(quorum_threshold(0.5, 0), Error);
}

// ---------------------------------------------------------------------------
// contributing_verdicts
// ---------------------------------------------------------------------------

TEST(Contributing, KeepsTheLastTurnPerEvaluator) {
    std::vector<Verdict> verdicts{
        choice_verdict("s1", "a", Choice::Assistant1, 0),
        choice_verdict("s1", "a", Choice::Equal, 2),
        choice_verdict("s1", "a", Choice::Assistant2, 1),
        choice_verdict("s1", "b", Choice::Assistant1, 0),
    };
    const auto out = contributing_verdicts(verdicts);
    ASSERT_EQ(out.size(), 2u);
    const auto& a = out[0].evaluator_id == "a" ? out[0] : out[1];
    EXPECT_EQ(a.turn, 2);
    EXPECT_EQ(*a.choice, Choice::Equal);
}

// ---------------------------------------------------------------------------
// aggregate_sample
// ---------------------------------------------------------------------------

TEST(AggregateSample, PairwiseVoteWithTally) {
    const TaskSpec task = builtin_task("pandalm");
    const std::vector<Verdict> verdicts{
        choice_verdict("s1", "a", Choice::Assistant1),
        choice_verdict("s1", "b", Choice::Assistant1),
        choice_verdict("s1", "c", Choice::Assistant2),
    };
    const AggregateVerdict out = aggregate_sample(task, "s1", verdicts, 0.5, 3);
    EXPECT_TRUE(out.valid);
    EXPECT_EQ(out.contributing, 3);
    EXPECT_EQ(*out.choice, Choice::Assistant1);
    EXPECT_EQ(out.tally.at("Assistant1"), 2);
    EXPECT_EQ(out.tally.at("Assistant2"), 1);
    EXPECT_FALSE(out.tally.contains("Equal"));
}

TEST(AggregateSample, UnparsedVerdictsCountForNothing) {
    const TaskSpec task = builtin_task("pandalm");
    Verdict bad;
    bad.sample_id = "s1";
    bad.evaluator_id = "c";
    bad.parse_ok = false;
    const std::vector<Verdict> verdicts{
        choice_verdict("s1", "a", Choice::Assistant2),
        choice_verdict("s1", "b", Choice::Assistant2),
        bad,
    };
    const AggregateVerdict out = aggregate_sample(task, "s1", verdicts, 0.5, 3);
    EXPECT_TRUE(out.valid);  // 2 of 3 parsed, threshold 2
    EXPECT_EQ(out.contributing, 2);
    EXPECT_EQ(*out.choice, Choice::Assistant2);
}

TEST(AggregateSample, LyingParseFlagIsNotTrusted) {
    const TaskSpec task = builtin_task("pandalm");
    Verdict liar;
    liar.sample_id = "s1";
    liar.evaluator_id = "a";
    liar.parse_ok = true;  // but no choice attached
    const AggregateVerdict out = aggregate_sample(task, "s1", {liar}, 0.5, 1);
    EXPECT_FALSE(out.valid);
    EXPECT_EQ(out.contributing, 0);
}

TEST(AggregateSample, QuorumFailureIsInvalidButCounted) {
    const TaskSpec task = builtin_task("pandalm");
    const std::vector<Verdict> verdicts{
        choice_verdict("s1", "a", Choice::Assistant1),
        choice_verdict("s1", "b", Choice::Assistant1),
        choice_verdict("s1", "c", Choice::Assistant1),
    };
    // 3 parsed of 7 configured at quorum 0.5 -> threshold 4 -> invalid.
    const AggregateVerdict out = aggregate_sample(task, "s1", verdicts, 0.5, 7);
    EXPECT_FALSE(out.valid);
    EXPECT_EQ(out.contributing, 3);
    EXPECT_FALSE(out.choice.has_value());
    EXPECT_TRUE(out.tally.empty());
}

TEST(AggregateSample, RubricMeansAndComposites) {
    const TaskSpec task = builtin_task("topicalchat");
    const std::vector<Verdict> verdicts{
        score_verdict("s1", "a",
                      {{"Understandable", 1},
                       {"Natural", 3},
                       {"MaintainsContext", 3},
                       {"Engaging", 2},
                       {"UsesKnowledge", 1},
                       {"OverallQuality", 4}}),
        score_verdict("s1", "b",
                      {{"Understandable", 1},
                       {"Natural", 2},
                       {"MaintainsContext", 3},
                       {"Engaging", 3},
                       {"UsesKnowledge", 0},
                       {"OverallQuality", 5}}),
    };
    const AggregateVerdict out = aggregate_sample(task, "s1", verdicts, 0.5, 2);
    ASSERT_TRUE(out.valid);
    EXPECT_DOUBLE_EQ(out.scores.at("Natural"), 2.5);
    EXPECT_DOUBLE_EQ(out.scores.at("OverallQuality"), 4.5);
    // Understandable and UsesKnowledge aggregate by mean on this task.
    EXPECT_DOUBLE_EQ(out.scores.at("Understandable"), 1.0);
    EXPECT_DOUBLE_EQ(out.scores.at("UsesKnowledge"), 0.5);
    // Naturalness = mean(aggregated Understandable, aggregated Natural).
    EXPECT_DOUBLE_EQ(out.scores.at("Naturalness"), (1.0 + 2.5) / 2.0);
}

TEST(AggregateSample, BinaryMajorityDimensionTallies) {
    const TaskSpec task = builtin_task("oid-caption");
    const std::vector<Verdict> verdicts{
        score_verdict("img1", "a", {{"quality", 1}}),
        score_verdict("img1", "b", {{"quality", 1}}),
        score_verdict("img1", "c", {{"quality", 0}}),
    };
    const AggregateVerdict out = aggregate_sample(task, "img1", verdicts, 0.5, 3);
    ASSERT_TRUE(out.valid);
    EXPECT_EQ(out.scores.at("quality"), 1.0);
    EXPECT_EQ(out.tally.at("1"), 2);
    EXPECT_EQ(out.tally.at("0"), 1);
}

TEST(AggregateSample, RubricMissingDimensionDisqualifiesTheVerdict) {
    const TaskSpec task = builtin_task("summeval");
    const std::vector<Verdict> verdicts{
        score_verdict("s1", "a",
                      {{"Coherence", 4}, {"Consistency", 4}, {"Fluency", 4}, {"Relevance", 4}}),
        score_verdict("s1", "b", {{"Coherence", 2}}),  // incomplete
    };
    const AggregateVerdict out = aggregate_sample(task, "s1", verdicts, 0.5, 2);
    EXPECT_EQ(out.contributing, 1);
    ASSERT_TRUE(out.valid);
    EXPECT_DOUBLE_EQ(out.scores.at("Coherence"), 4.0);
}

// ---------------------------------------------------------------------------
// aggregate_all
// ---------------------------------------------------------------------------

TEST(AggregateAll, GroupsBySampleSortedAndTakesLastTurns) {
    const TaskSpec task = builtin_task("pandalm");
    const std::vector<Verdict> verdicts{
        choice_verdict("s2", "a", Choice::Assistant2),
        choice_verdict("s1", "a", Choice::Assistant1, 0),
        choice_verdict("s1", "a", Choice::Assistant2, 1),  // supersedes turn 0
        choice_verdict("s1", "b", Choice::Assistant2),
        choice_verdict("s2", "b", Choice::Equal),
    };
    const auto all = aggregate_all(task, verdicts, 0.5, 2);
    ASSERT_EQ(all.size(), 2u);
    EXPECT_EQ(all[0].sample_id, "s1");
    EXPECT_EQ(all[1].sample_id, "s2");
    EXPECT_EQ(*all[0].choice, Choice::Assistant2);  // both last-turn votes agree
    EXPECT_EQ(*all[1].choice, Choice::Assistant2);  // Equal+A2 tie -> Assistant2
}

TEST(AggregateJson, RoundTrip) {
    const TaskSpec task = builtin_task("pandalm");
    const AggregateVerdict out = aggregate_sample(
        task, "s1", {choice_verdict("s1", "a", Choice::Equal)}, 0.5, 1);
    const AggregateVerdict back = aggregate_from_json(aggregate_to_json(out));
    EXPECT_EQ(back.sample_id, out.sample_id);
    EXPECT_EQ(back.valid, out.valid);
    EXPECT_EQ(back.contributing, out.contributing);
    EXPECT_EQ(*back.choice, *out.choice);
    EXPECT_EQ(back.tally, out.tally);
}

}  // namespace
}  // namespace jury
