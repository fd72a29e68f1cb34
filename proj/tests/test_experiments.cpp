#include <gtest/gtest.h>

#include <filesystem>

#include "fedscore/experiments.hpp"
#include "fedscore/io.hpp"

using namespace fedscore;
namespace fs = std::filesystem;

namespace {

const char* kTiny = R"(
[scenario]
name = tiny
eval_round = 3
repeats = 2
methods = LOO, FP, EE, COS
[federation]
n_clients = 4
rounds = 3
local_epochs = 1
hidden = 8
seed = 3
utility = loss_gain
[dataset]
samples_per_client = 20
test_samples_per_class = 10
[ablation]
axis = round
values = 2, 3
[influence]
[manipulation]
strategies = deflate_to:0:v_empty, scale:1:2.0:without
[weighted_aggregation]
methods = FP, EE, COS, MR-SV
[misbehavior]
attacker = 1
methods = FP, EE
)";

Scenario tiny() { return parse_scenario(kTiny, "tiny"); }

}  // namespace

TEST(Experiments, ReferenceAgainstItself) {
  const auto sc = tiny();
  Federation fed(sc.federation);
  const auto history = fed.run();
  const Method methods[] = {Method::kMRSV, Method::kFP};
  const auto scores = score_history(methods, history, fed.evaluator(), RoundCombine::kMean, &fed);
  const auto self = compare_scores(scores[0], scores[0]);
  EXPECT_EQ(self.l2, 0.0);
  EXPECT_DOUBLE_EQ(self.spearman, 1.0);
  EXPECT_DOUBLE_EQ(self.kendall, 1.0);
  EXPECT_DOUBLE_EQ(self.pearson, 1.0);
  EXPECT_EQ(scores[1].round, 3);
}

TEST(Experiments, CostAudit) {
  const auto sc = tiny();
  Federation fed(sc.federation);
  const auto history = fed.run();
  CostAudit audit;
  const Method methods[] = {Method::kLOO, Method::kFP, Method::kEE, Method::kMRSV};
  score_history(methods, history, fed.evaluator(), RoundCombine::kMean, &fed, &audit);
  EXPECT_EQ(audit.secure_calls, (std::vector<std::uint64_t>{10}));
  EXPECT_EQ(audit.mrsv_calls, (std::vector<std::uint64_t>{16, 16, 16}));
}

TEST(Experiments, TrueShapleyBudget) {
  auto sc = tiny();
  sc.federation.n_clients = 10;
  Federation fed(sc.federation);
  const auto history = fed.run(1);
  const Method methods[] = {Method::kSV};
  EXPECT_THROW(score_history(methods, history, fed.evaluator(), RoundCombine::kMean, &fed), std::invalid_argument);
}

TEST(Experiments, TrueShapleyReferenceIsStable) {
  auto sc = tiny();
  sc.federation.rounds = 1;
  Federation fed(sc.federation);
  const auto history = fed.run();
  const Method methods[] = {Method::kSV, Method::kSV};
  const auto s = score_history(methods, history, fed.evaluator(), RoundCombine::kMean, &fed);
  EXPECT_EQ(s[0].scores, s[1].scores);
}

TEST(Experiments, UnitWeightsReproduceFedAvg) {
  const auto sc = tiny();
  Federation fed(sc.federation);
  for (const auto& t : fed.run()) {
    const std::vector<double> ones(4, 1.0);
    EXPECT_EQ(aggregate(t, ones), t.m);
  }
  // a FedAvg-only trajectory equals the plain federation
  const auto curves = weighted_trajectories(fed, {}, 3, RoundCombine::kMean);
  ASSERT_EQ(curves.size(), 1u);
  const auto plain = fed.run();
  const auto neg_loss = make_evaluator(fed.test(), fed.shape(), UtilityKind::kNegLoss);
  for (int r = 0; r < 3; ++r) EXPECT_EQ(curves[0].neg_loss[static_cast<std::size_t>(r)], neg_loss(plain[static_cast<std::size_t>(r)].m));
}

TEST(Experiments, AggregationWeights) {
  bool degenerate = false;
  const auto w = aggregation_weights(std::vector<double>{1.0, 2.0, 3.0}, &degenerate);
  EXPECT_FALSE(degenerate);
  EXPECT_EQ(w, (std::vector<double>{0.0, 1.0, 2.0}));
  const auto flat = aggregation_weights(std::vector<double>{5.0, 5.0}, &degenerate);
  EXPECT_TRUE(degenerate);
  EXPECT_EQ(flat, (std::vector<double>{1.0, 1.0}));
}

TEST(Experiments, Quantile) {
  EXPECT_EQ(quantile({3, 1, 2, 4}, 0.0), 1.0);
  EXPECT_EQ(quantile({3, 1, 2, 4}, 1.0), 4.0);
  EXPECT_EQ(quantile({3, 1, 2, 4}, 0.5), 2.5);
  EXPECT_THROW(quantile({}, 0.5), std::invalid_argument);
}

TEST(Experiments, RoundAblationMatchesDirectFidelity) {
  auto sc = tiny();
  const double values[] = {2, 3};
  const auto rows = ablation(sc, AblationAxis::kRound, values);
  ASSERT_EQ(rows.size(), 8u);
  const auto direct = rank_fidelity(sc);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(rows[4 + k].row.spearman.mean, direct.rows[k].spearman.mean);
    EXPECT_EQ(rows[4 + k].row.l2.mean, direct.rows[k].l2.mean);
  }
}

TEST(Experiments, MisbehaviorRateWithoutAttackNearUniform) {
  auto sc = tiny();
  sc.repeats = 8;
  sc.misbehavior->attacker_rate = 0.0;
  const auto r = misbehavior(sc);
  for (const auto& row : r.rows) EXPECT_LE(row.detection_rate, 0.75);
}

TEST(Experiments, BundleIsDeterministicAndComplete) {
  const auto sc = tiny();
  const auto a = run_scenario(sc);
  const auto b = run_scenario(sc);
  ASSERT_EQ(a.tables.size(), b.tables.size());
  std::vector<std::string> names;
  for (std::size_t i = 0; i < a.tables.size(); ++i) {
    EXPECT_EQ(a.tables[i].to_csv(), b.tables[i].to_csv());
    names.push_back(a.tables[i].name());
  }
  for (const char* expected : {"rank_fidelity", "ablation", "influence", "manipulation", "weighted_curves", "detection"})
    EXPECT_NE(std::find(names.begin(), names.end(), expected), names.end()) << expected;

  const auto root = fs::temp_directory_path() / "fedscore_bundle_test";
  fs::remove_all(root);
  const auto d1 = timestamped_dir(root, sc.name);
  write_bundle(d1, sc, a);
  const auto d2 = timestamped_dir(root, sc.name);
  EXPECT_NE(d1, d2);
  write_bundle(d2, sc, b);
  EXPECT_EQ(read_file(d1 / "manifest.json"), read_file(d2 / "manifest.json"));
  EXPECT_EQ(read_file(d1 / "scenario.ini"), std::string(kTiny));
  EXPECT_TRUE(fs::exists(d1 / "seeds.csv"));
  EXPECT_TRUE(fs::exists(d1 / "rank_fidelity.json"));
  fs::remove_all(root);
}
