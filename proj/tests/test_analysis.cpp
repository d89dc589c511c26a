/// @file test_analysis.cpp
/// @brief Subset sweeps against a bitmask brute-force oracle, and agreement
///        matrices against hand-worked values.

#include "jury/analysis.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <random>

#include "jury/aggregate.hpp"
#include "jury/errors.hpp"
#include "jury/prompt.hpp"

namespace jury {
namespace {

Verdict make_verdict(const std::string& sample, const std::string& evaluator,
                     std::optional<Choice> choice, int turn = 0) {
    Verdict v;
    v.sample_id = sample;
    v.evaluator_id = evaluator;
    v.turn = turn;
    v.choice = choice;
    v.parse_ok = choice.has_value();
    return v;
}

Verdict make_binary(const std::string& sample, const std::string& evaluator,
                    std::optional<int> bit) {
    Verdict v;
    v.sample_id = sample;
    v.evaluator_id = evaluator;
    v.parse_ok = bit.has_value();
    if (bit) v.scores["quality"] = *bit;
    return v;
}

TEST(Binomial, KnownValues) {
    const long long expected[] = {7, 21, 35, 35, 21, 7, 1};
    for (int k = 1; k <= 7; ++k) EXPECT_EQ(binomial(7, k), expected[k - 1]);
    EXPECT_EQ(binomial(0, 0), 1);
    EXPECT_EQ(binomial(5, 0), 1);
    EXPECT_EQ(binomial(5, 6), 0);
    EXPECT_EQ(binomial(5, -1), 0);
    EXPECT_EQ(binomial(20, 10), 184756);
}

// ---------------------------------------------------------------------------
// Subset sweep: independent bitmask enumeration oracle
// ---------------------------------------------------------------------------

/// sample -> (evaluator -> parsed choice); evaluators sorted ascending to
/// match the implementation's set ordering.
using VoteTable = std::map<std::string, std::map<std::string, std::optional<Choice>>>;

std::map<int, std::vector<double>> oracle_accuracies(
    const std::vector<std::string>& evaluators, const VoteTable& votes,
    const std::map<std::string, Choice>& truth) {
    std::map<int, std::vector<double>> by_k;
    const int n = static_cast<int>(evaluators.size());
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        long long correct = 0, scored = 0;
        for (const auto& [sample_id, label] : truth) {
            std::vector<Choice> ballot;
            const auto& row = votes.at(sample_id);
            for (int e = 0; e < n; ++e) {
                if (!(mask >> e & 1u)) continue;
                auto it = row.find(evaluators[size_t(e)]);
                if (it != row.end() && it->second) ballot.push_back(*it->second);
            }
            if (ballot.empty()) continue;
            ++scored;
            if (majority_vote(ballot) == label) ++correct;
        }
        by_k[std::popcount(mask)].push_back(
            scored ? double(correct) / double(scored) : 0.0);
    }
    return by_k;
}

void expect_matches_oracle(const SubsetSweepResult& result,
                           const std::map<int, std::vector<double>>& oracle) {
    ASSERT_EQ(result.rows.size(), oracle.size());
    for (const SubsetSweepRow& row : result.rows) {
        const std::vector<double>& accuracies = oracle.at(row.k);
        EXPECT_EQ(row.subset_count, static_cast<long long>(accuracies.size()));
        double sum = 0;
        for (double a : accuracies) sum += a;
        const double mean = sum / double(accuracies.size());
        EXPECT_NEAR(row.mean_accuracy, mean, 1e-12) << "k=" << row.k;
        if (accuracies.size() == 1) {
            EXPECT_FALSE(row.se.has_value());
        } else {
            double ss = 0;
            for (double a : accuracies) ss += (a - mean) * (a - mean);
            const double se = std::sqrt(ss / double(accuracies.size() - 1)) /
                              std::sqrt(double(accuracies.size()));
            ASSERT_TRUE(row.se.has_value());
            EXPECT_NEAR(*row.se, se, 1e-12) << "k=" << row.k;
        }
    }
}

TEST(SubsetSweep, ThreeEvaluatorPairwiseMatchesOracle) {
    const TaskSpec task = builtin_task("pandalm");
    const std::vector<std::string> evaluators{"e1", "e2", "e3"};
    VoteTable votes{
        {"s1", {{"e1", Choice::Assistant1}, {"e2", Choice::Assistant1}, {"e3", Choice::Equal}}},
        {"s2", {{"e1", Choice::Assistant2}, {"e2", Choice::Equal}, {"e3", Choice::Assistant2}}},
        {"s3", {{"e1", Choice::Equal}, {"e2", Choice::Assistant1}, {"e3", Choice::Assistant2}}},
        {"s4", {{"e1", Choice::Assistant1}, {"e2", std::nullopt}, {"e3", Choice::Assistant1}}},
    };
    const std::map<std::string, Choice> truth{{"s1", Choice::Assistant1},
                                              {"s2", Choice::Assistant2},
                                              {"s3", Choice::Equal},
                                              {"s4", Choice::Assistant1}};
    std::vector<Verdict> verdicts;
    std::map<std::string, LabelValue> truth_labels;
    for (const auto& [sample_id, row] : votes)
        for (const auto& [evaluator_id, choice] : row)
            verdicts.push_back(make_verdict(sample_id, evaluator_id, choice));
    for (const auto& [sample_id, label] : truth) truth_labels[sample_id] = to_string(label);

    const SubsetSweepResult result = subset_sweep(task, verdicts, truth_labels);
    EXPECT_EQ(result.ensemble_size, 3);
    ASSERT_EQ(result.rows.size(), 3u);
    EXPECT_EQ(result.rows[0].subset_count, 3);
    EXPECT_EQ(result.rows[1].subset_count, 3);
    EXPECT_EQ(result.rows[2].subset_count, 1);
    expect_matches_oracle(result, oracle_accuracies(evaluators, votes, truth));
}

TEST(SubsetSweep, FullSizeRowEqualsDirectEnsembleAccuracyExactly) {
    const TaskSpec task = builtin_task("pandalm");
    std::mt19937 rng(29);
    std::uniform_int_distribution<int> pick(0, 2);
    const std::vector<std::string> evaluators{"a", "b", "c", "d", "e"};
    VoteTable votes;
    std::map<std::string, Choice> truth;
    std::vector<Verdict> verdicts;
    std::map<std::string, LabelValue> labels;
    const Choice kChoices[] = {Choice::Equal, Choice::Assistant1, Choice::Assistant2};
    for (int s = 0; s < 9; ++s) {
        const std::string id = "s" + std::to_string(s);
        truth[id] = kChoices[pick(rng)];
        labels[id] = to_string(truth[id]);
        for (const std::string& e : evaluators) {
            votes[id][e] = kChoices[pick(rng)];
            verdicts.push_back(make_verdict(id, e, votes[id][e]));
        }
    }
    long long correct = 0;
    for (const auto& [id, label] : truth) {
        std::vector<Choice> ballot;
        for (const std::string& e : evaluators) ballot.push_back(*votes[id][e]);
        if (majority_vote(ballot) == label) ++correct;
    }
    const SubsetSweepResult result = subset_sweep(task, verdicts, labels);
    const SubsetSweepRow& full = result.rows.back();
    EXPECT_EQ(full.k, 5);
    EXPECT_EQ(full.subset_count, 1);
    EXPECT_EQ(full.mean_accuracy, double(correct) / 9.0);  // bitwise equal
    EXPECT_FALSE(full.se.has_value());
}

TEST(SubsetSweep, IdenticalEvaluatorsHaveExactlyZeroStandardError) {
    const TaskSpec task = builtin_task("pandalm");
    std::vector<Verdict> verdicts;
    std::map<std::string, LabelValue> truth;
    // Every evaluator casts the same vote; 2 of 3 samples scored correct.
    const Choice vote[] = {Choice::Assistant1, Choice::Assistant2, Choice::Assistant2};
    const char* label[] = {"Assistant1", "Assistant2", "Equal"};
    for (int s = 0; s < 3; ++s) {
        const std::string id = "s" + std::to_string(s);
        truth[id] = std::string(label[s]);
        for (int e = 0; e < 7; ++e)
            verdicts.push_back(make_verdict(id, "eval" + std::to_string(e), vote[s]));
    }
    const SubsetSweepResult result = subset_sweep(task, verdicts, truth);
    ASSERT_EQ(result.rows.size(), 7u);
    for (const SubsetSweepRow& row : result.rows) {
        EXPECT_EQ(row.mean_accuracy, 2.0 / 3.0);
        if (row.k < 7) {
            ASSERT_TRUE(row.se.has_value());
            EXPECT_EQ(*row.se, 0.0);
        } else {
            EXPECT_FALSE(row.se.has_value());
        }
    }
}

TEST(SubsetSweep, SamplesWithoutAnyParsedMemberAreSkippedNotCountedWrong) {
    const TaskSpec task = builtin_task("pandalm");
    // e1 failed to parse s1; {e1} must score only s2 and stay at 1.0.
    const std::vector<Verdict> verdicts{
        make_verdict("s1", "e1", std::nullopt),
        make_verdict("s1", "e2", Choice::Assistant1),
        make_verdict("s2", "e1", Choice::Assistant1),
        make_verdict("s2", "e2", Choice::Assistant1),
    };
    const std::map<std::string, LabelValue> truth{{"s1", std::string("Assistant1")},
                                                  {"s2", std::string("Assistant1")}};
    const SubsetSweepResult result = subset_sweep(task, verdicts, truth);
    EXPECT_DOUBLE_EQ(result.rows[0].mean_accuracy, 1.0);
    EXPECT_DOUBLE_EQ(result.rows[1].mean_accuracy, 1.0);
}

TEST(SubsetSweep, LaterTurnsSupersedeEarlierOnes) {
    const TaskSpec task = builtin_task("pandalm");
    const std::vector<Verdict> verdicts{
        make_verdict("s1", "e1", Choice::Assistant2, /*turn=*/0),
        make_verdict("s1", "e1", Choice::Assistant1, /*turn=*/1),
    };
    const std::map<std::string, LabelValue> truth{{"s1", std::string("Assistant1")}};
    const SubsetSweepResult result = subset_sweep(task, verdicts, truth);
    EXPECT_DOUBLE_EQ(result.rows[0].mean_accuracy, 1.0);
}

TEST(SubsetSweep, BinaryTaskMatchesOracle) {
    const TaskSpec task = builtin_task("oid-caption");
    std::mt19937 rng(31);
    std::bernoulli_distribution bit(0.6), fail(0.15);
    const std::vector<std::string> evaluators{"e1", "e2", "e3", "e4"};
    std::vector<Verdict> verdicts;
    std::map<std::string, LabelValue> truth;
    std::map<std::string, std::map<std::string, std::optional<int>>> votes;
    for (int s = 0; s < 8; ++s) {
        const std::string id = "img" + std::to_string(s);
        truth[id] = bit(rng) ? 1.0 : 0.0;
        for (const std::string& e : evaluators) {
            votes[id][e] = fail(rng) ? std::optional<int>{} : std::optional<int>{bit(rng)};
            verdicts.push_back(make_binary(id, e, votes[id][e]));
        }
    }
    const SubsetSweepResult result = subset_sweep(task, verdicts, truth);
    // Oracle: bitmask enumeration with binary_majority.
    std::map<int, std::vector<double>> oracle;
    for (unsigned mask = 1; mask < (1u << 4); ++mask) {
        long long correct = 0, scored = 0;
        for (const auto& [id, label] : truth) {
            std::vector<int> ballot;
            for (int e = 0; e < 4; ++e)
                if ((mask >> e & 1u) && votes[id][evaluators[size_t(e)]])
                    ballot.push_back(*votes[id][evaluators[size_t(e)]]);
            if (ballot.empty()) continue;
            ++scored;
            if (binary_majority(ballot) == (std::get<double>(label) > 0.5 ? 1 : 0)) ++correct;
        }
        oracle[std::popcount(mask)].push_back(scored ? double(correct) / scored : 0.0);
    }
    expect_matches_oracle(result, oracle);
}

TEST(SubsetSweep, RandomPairwiseTrialsMatchOracle) {
    const TaskSpec task = builtin_task("pandalm");
    std::mt19937 rng(97);
    std::uniform_int_distribution<int> pick(0, 2);
    std::bernoulli_distribution fail(0.2);
    const Choice kChoices[] = {Choice::Equal, Choice::Assistant1, Choice::Assistant2};
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::string> evaluators;
        for (int e = 0; e < 5; ++e) evaluators.push_back("e" + std::to_string(e));
        VoteTable votes;
        std::map<std::string, Choice> truth;
        std::vector<Verdict> verdicts;
        std::map<std::string, LabelValue> labels;
        for (int s = 0; s < 12; ++s) {
            const std::string id = "s" + std::to_string(s);
            truth[id] = kChoices[pick(rng)];
            labels[id] = to_string(truth[id]);
            for (const std::string& e : evaluators) {
                votes[id][e] =
                    fail(rng) ? std::optional<Choice>{} : std::optional<Choice>{kChoices[pick(rng)]};
                verdicts.push_back(make_verdict(id, e, votes[id][e]));
            }
        }
        expect_matches_oracle(subset_sweep(task, verdicts, labels),
                              oracle_accuracies(evaluators, votes, truth));
    }
}

TEST(SubsetSweep, MissingEvaluatorVerdictIsAnError) {
    const TaskSpec task = builtin_task("pandalm");
    const std::vector<Verdict> verdicts{
        make_verdict("s1", "e1", Choice::Assistant1),
        make_verdict("s1", "e2", Choice::Assistant1),
        make_verdict("s2", "e1", Choice::Assistant1),  // e2 missing for s2
    };
    const std::map<std::string, LabelValue> truth{{"s1", std::string("Assistant1")},
                                                  {"s2", std::string("Assistant1")}};
    try {
        subset_sweep(task, verdicts, truth);
        FAIL() << "expected IncompleteVerdicts";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "IncompleteVerdicts");
        EXPECT_NE(std::string(e.what()).find("s2"), std::string::npos);
    }
}

TEST(SubsetSweep, RubricTasksAndOversizedEnsemblesAreConfigErrors) {
    EXPECT_THROW(subset_sweep(builtin_task("summeval"), {}, {}), Error);

    const TaskSpec task = builtin_task("pandalm");
    std::vector<Verdict> verdicts;
    for (int e = 0; e < 21; ++e)
        verdicts.push_back(make_verdict("s1", "e" + std::to_string(e), Choice::Equal));
    const std::map<std::string, LabelValue> truth{{"s1", std::string("Equal")}};
    try {
        subset_sweep(task, verdicts, truth);
        FAIL() << "expected ConfigError";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "ConfigError");
    }
}

TEST(SweepCsv, HeaderRowsAndEmptyTrailingSe) {
    const TaskSpec task = builtin_task("pandalm");
    std::vector<Verdict> verdicts;
    const std::map<std::string, LabelValue> truth{{"s1", std::string("Assistant1")}};
    for (const char* e : {"e1", "e2", "e3"})
        verdicts.push_back(make_verdict("s1", e, Choice::Assistant1));
    const std::string csv = sweep_to_csv(subset_sweep(task, verdicts, truth));
    std::istringstream lines(csv);
    std::string line;
    ASSERT_TRUE(std::getline(lines, line));
    EXPECT_EQ(line, "k,subset_count,mean_accuracy,se");
    ASSERT_TRUE(std::getline(lines, line));
    EXPECT_EQ(line, "1,3,1,0");
    ASSERT_TRUE(std::getline(lines, line));
    EXPECT_EQ(line, "2,3,1,0");
    ASSERT_TRUE(std::getline(lines, line));
    EXPECT_EQ(line, "3,1,1,");  // single subset: SE undefined, cell empty
    EXPECT_FALSE(std::getline(lines, line));
}

// ---------------------------------------------------------------------------
// Agreement matrix
// ---------------------------------------------------------------------------

double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxy += x[i] * y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
    }
    return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

TEST(AgreementMatrix, PearsonUsesTheDocumentedChoiceEncoding) {
    const TaskSpec task = builtin_task("pandalm");
    const std::vector<Verdict> verdicts{
        make_verdict("s1", "e1", Choice::Assistant1),
        make_verdict("s2", "e1", Choice::Assistant2),
        make_verdict("s3", "e1", Choice::Equal),
        make_verdict("s4", "e1", Choice::Assistant1),
        make_verdict("s1", "e2", Choice::Assistant1),
        make_verdict("s2", "e2", Choice::Assistant2),
        make_verdict("s3", "e2", Choice::Assistant1),
        make_verdict("s4", "e2", Choice::Assistant2),
    };
    const AgreementMatrix matrix = agreement_matrix(task, verdicts, "pearson");
    EXPECT_EQ(matrix.measure, "pearson");
    ASSERT_EQ(matrix.evaluator_ids, (std::vector<std::string>{"e1", "e2"}));
    EXPECT_EQ(*matrix.values[0][0], 1.0);
    EXPECT_EQ(*matrix.values[1][1], 1.0);
    // Assistant1 -> 1, Assistant2 -> 2, Equal -> 0, sample order s1..s4.
    const double expected = oracle_pearson({1, 2, 0, 1}, {1, 2, 1, 2});
    EXPECT_NEAR(*matrix.values[0][1], expected, 1e-12);
    EXPECT_EQ(*matrix.values[0][1], *matrix.values[1][0]);
}

TEST(AgreementMatrix, KappaHandWorkedValue) {
    const TaskSpec task = builtin_task("pandalm");
    // Agreements on 3 of 4; marginals give p_e = 1/2 -> kappa = 1/2.
    const std::vector<Verdict> verdicts{
        make_verdict("s1", "e1", Choice::Assistant1),
        make_verdict("s2", "e1", Choice::Assistant1),
        make_verdict("s3", "e1", Choice::Assistant2),
        make_verdict("s4", "e1", Choice::Assistant1),
        make_verdict("s1", "e2", Choice::Assistant1),
        make_verdict("s2", "e2", Choice::Assistant1),
        make_verdict("s3", "e2", Choice::Assistant2),
        make_verdict("s4", "e2", Choice::Assistant2),
    };
    const AgreementMatrix matrix = agreement_matrix(task, verdicts, "kappa");
    EXPECT_NEAR(*matrix.values[0][1], 0.5, 1e-12);
}

TEST(AgreementMatrix, ConstantSeriesLeavesPearsonUndefined) {
    const TaskSpec task = builtin_task("pandalm");
    const std::vector<Verdict> verdicts{
        make_verdict("s1", "e1", Choice::Equal),
        make_verdict("s2", "e1", Choice::Equal),
        make_verdict("s1", "e2", Choice::Assistant1),
        make_verdict("s2", "e2", Choice::Assistant2),
    };
    const AgreementMatrix matrix = agreement_matrix(task, verdicts, "pearson");
    EXPECT_FALSE(matrix.values[0][1].has_value());
    EXPECT_TRUE(matrix.values[0][0].has_value());  // diagonal stays 1
}

TEST(AgreementMatrix, RubricTasksCompareTheFirstBaseDimensionByDefault) {
    const TaskSpec task = builtin_task("summeval");
    auto scored = [](const std::string& sample, const std::string& evaluator, double coherence,
                     double fluency) {
        Verdict v;
        v.sample_id = sample;
        v.evaluator_id = evaluator;
        v.parse_ok = true;
        v.scores = {{"Coherence", coherence}, {"Consistency", 3},
                    {"Fluency", fluency}, {"Relevance", 3}};
        return v;
    };
    const std::vector<Verdict> verdicts{
        scored("s1", "e1", 1, 5), scored("s2", "e1", 2, 4), scored("s3", "e1", 3, 3),
        scored("s1", "e2", 2, 1), scored("s2", "e2", 3, 2), scored("s3", "e2", 4, 3),
    };
    const AgreementMatrix by_default = agreement_matrix(task, verdicts, "pearson");
    EXPECT_NEAR(*by_default.values[0][1], 1.0, 1e-12);  // Coherence tracks exactly
    const AgreementMatrix fluency = agreement_matrix(task, verdicts, "pearson", "Fluency");
    EXPECT_NEAR(*fluency.values[0][1], -1.0, 1e-12);
}

TEST(AgreementMatrix, InsufficientOverlapAndUnknownMeasure) {
    const TaskSpec task = builtin_task("pandalm");
    const std::vector<Verdict> lone{make_verdict("s1", "e1", Choice::Equal),
                                    make_verdict("s2", "e1", Choice::Equal)};
    try {
        agreement_matrix(task, lone, "pearson");
        FAIL() << "expected InsufficientOverlap";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "InsufficientOverlap");
    }

    const std::vector<Verdict> disjoint{
        make_verdict("s1", "e1", Choice::Equal), make_verdict("s2", "e1", Choice::Equal),
        make_verdict("s2", "e2", Choice::Equal), make_verdict("s3", "e2", Choice::Equal)};
    EXPECT_THROW(agreement_matrix(task, disjoint, "kappa"), Error);

    const std::vector<Verdict> fine{
        make_verdict("s1", "e1", Choice::Equal), make_verdict("s2", "e1", Choice::Assistant1),
        make_verdict("s1", "e2", Choice::Equal), make_verdict("s2", "e2", Choice::Assistant1)};
    try {
        agreement_matrix(task, fine, "spearman");
        FAIL() << "expected ConfigError";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "ConfigError");
    }
}

TEST(MatrixCsv, UndefinedCellsStayEmpty) {
    AgreementMatrix matrix;
    matrix.measure = "pearson";
    matrix.evaluator_ids = {"x", "y"};
    matrix.values = {{1.0, std::nullopt}, {std::nullopt, 1.0}};
    EXPECT_EQ(matrix_to_csv(matrix), "evaluator,x,y\nx,1,\ny,,1\n");
}

}  // namespace
}  // namespace jury
