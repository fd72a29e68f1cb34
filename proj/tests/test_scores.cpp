#include <gtest/gtest.h>

#include <random>

#include "fedscore/metrics.hpp"
#include "fedscore/scores.hpp"
#include "oracles.hpp"

using namespace fedscore;

namespace {

RoundUtilities additive_three() {
  // v(∅)=0, v(A)=0, v(B)=1, v(C)=2, v(BC)=3, v(AC)=2, v(AB)=1, v(ABC)=3
  return {0.0, 3.0, {0.0, 1.0, 2.0}, {3.0, 2.0, 1.0}};
}

void expect_near(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "index " << i;
}

double sum(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

}  // namespace

TEST(RoundUtilities, Validate) {
  EXPECT_NO_THROW(additive_three().validate());
  RoundUtilities bad = additive_three();
  bad.v_without.pop_back();
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = additive_three();
  bad.v_with[1] = INFINITY;
  EXPECT_THROW(bad.validate(), std::domain_error);
  EXPECT_THROW(RoundUtilities{}.validate(), std::invalid_argument);
}

TEST(RoundUtilities, FromOracleUsesPermittedCoalitionsOnly) {
  TableGame g(3, {0, 0, 1, 1, 2, 2, 3, 3});
  auto o = g.oracle();
  o.enable_audit();
  const auto u = utilities_from_oracle(o);
  EXPECT_EQ(o.call_count(), 8u);  // 2N+2 with N=3
  for (Coalition s : o.audit_log()) {
    const int k = s.size();
    EXPECT_TRUE(k == 0 || k == 1 || k == 2 || k == 3);
  }
  EXPECT_EQ(u.v_with, (std::vector<double>{0, 1, 2}));
  EXPECT_EQ(u.v_without, (std::vector<double>{3, 2, 1}));
}

TEST(RoundUtilities, OracleCallCountLinear) {
  for (int n : {2, 5, 9, 15}) {
    CoalitionOracle o(n, [](Coalition s) { return static_cast<double>(s.size()); });
    o.enable_audit();
    utilities_from_oracle(o);
    EXPECT_EQ(o.call_count(), static_cast<std::uint64_t>(2 * n + 2));
    for (Coalition s : o.audit_log()) {
      const int k = s.size();
      EXPECT_TRUE(k == 0 || k == 1 || k == n - 1 || k == n);
    }
  }
}

TEST(Loo, Definitions) {
  const auto u = additive_three();
  EXPECT_EQ(loo(u).scores, (std::vector<double>{0, 1, 2}));
  EXPECT_EQ(ioi(u).scores, (std::vector<double>{0, 1, 2}));
  RoundUtilities flat{0.0, 1.0, {0.2, 0.3}, {1.0, 1.0}};
  EXPECT_EQ(loo(flat).scores, (std::vector<double>{0, 0}));
}

TEST(Fp, ThreeClientAdditive) {
  const auto u = additive_three();
  Fallback used{};
  const auto s = fp(u, &used);
  EXPECT_EQ(used, Fallback::kPrimary);
  expect_near(s.scores, {0, 1, 2}, 1e-12);
  EXPECT_EQ(fp_alpha(u).alpha, (std::vector<double>{0, 1, 2}));
}

TEST(Fp, NullAndSymmetricClients) {
  RoundUtilities u{0.1, 0.9, {0.1, 0.4, 0.4, 0.6}, {0.9, 0.5, 0.5, 0.2}};
  const auto a = fp_alpha(u).alpha;
  EXPECT_EQ(a[0], 0.0);
  EXPECT_EQ(a[1], a[2]);
  const auto s = fp(u);
  EXPECT_EQ(s[0], 0.0);
  EXPECT_NEAR(s[1], s[2], 1e-12);
  EXPECT_NEAR(sum(s.scores), 0.9, 1e-12);
}

TEST(Fp, IdenticalClientsSplitEvenly) {
  RoundUtilities u{0.0, 0.8, std::vector<double>(4, 0.3), std::vector<double>(4, 0.5)};
  expect_near(fp(u).scores, std::vector<double>(4, 0.2), 1e-12);
}

TEST(Fp, FallbackChain) {
  Fallback used{};
  // α sums to zero but LOO does not
  RoundUtilities a{0.0, 1.0, {0.0, 0.0}, {0.5, 2.5}};  // LOO = (0.5, -1.5), IOI = (0,0) -> α sum = -0.5
  fp(a, &used);
  EXPECT_EQ(used, Fallback::kPrimary);
  RoundUtilities b{0.0, 1.0, {-0.5, 0.5}, {1.5, 0.5}};  // LOO=(-0.5,0.5) IOI=(-0.5,0.5): sums all zero
  const auto s = fp(b, &used);
  EXPECT_EQ(used, Fallback::kUniform);
  expect_near(s.scores, {0.5, 0.5}, 1e-15);
  RoundUtilities c{0.0, 1.0, {1.0, -1.0}, {1.0, 0.0}};  // LOO=(0,1) IOI=(1,-1): α=(0.5,0) sum 0.5
  fp(c, &used);
  EXPECT_EQ(used, Fallback::kPrimary);
  RoundUtilities d{0.0, 1.0, {1.0, -0.5}, {1.0, 1.5}};  // LOO=(0,-0.5) IOI=(1,-0.5): α=(0.5,-0.5) sum 0
  const auto sd = fp(d, &used);
  EXPECT_EQ(used, Fallback::kFirst);
  expect_near(sd.scores, {0.0, 1.0}, 1e-15);
  RoundUtilities e{0.0, 1.0, {0.5, -0.5}, {1.0, 1.0}};  // LOO=(0,0) IOI=(0.5,-0.5): α sum 0, LOO sum 0
  fp(e, &used);
  EXPECT_EQ(used, Fallback::kUniform);
  RoundUtilities f{0.0, 1.0, {0.5, 0.0}, {1.5, 0.5}};  // LOO=(-0.5,0.5) IOI=(0.5,0): α=(0,0.25)
  fp(f, &used);
  EXPECT_EQ(used, Fallback::kPrimary);
  RoundUtilities g{0.0, 1.0, {0.5, 0.5}, {1.25, 1.25}};  // LOO=(-.25,-.25) IOI=(.5,.5): α=(.125,.125)
  fp(g, &used);
  EXPECT_EQ(used, Fallback::kPrimary);
  RoundUtilities h{0.0, 1.0, {0.25, 0.25}, {1.25, 1.25}};  // LOO=(-.25,-.25) IOI=(.25,.25): α=0, LOO sum -0.5
  const auto sh = fp(h, &used);
  EXPECT_EQ(used, Fallback::kFirst);
  expect_near(sh.scores, {0.5, 0.5}, 1e-15);
}

TEST(EfficientRescale, SecondCandidateAndUniform) {
  const std::vector<double> zero = {1.0, -1.0}, second = {1.0, 3.0};
  const std::span<const double> cands[] = {zero, zero, second};
  Fallback used{};
  const auto r = efficient_rescale(cands, 2.0, &used);
  EXPECT_EQ(used, Fallback::kSecond);
  expect_near(r, {0.5, 1.5}, 1e-15);
  const std::span<const double> none[] = {zero, zero, zero};
  expect_near(efficient_rescale(none, 3.0, &used), {1.5, 1.5}, 1e-15);
  EXPECT_EQ(used, Fallback::kUniform);
}

TEST(Ee, ThreeClientAdditive) {
  const auto u = additive_three();
  const auto num = ee_numerators(u);
  expect_near(num.beta, {0.75, 1.0, 1.25}, 1e-12);
  expect_near(num.gamma, {0.75, 1.0, 1.25}, 1e-12);
  const auto s = ee(u);
  EXPECT_NEAR(s[0], 0.75, 1e-12);
  expect_near(s.scores, {0.75, 1.0, 1.25}, 1e-12);
}

TEST(Ee, MatchesDirectFormula) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto u = oracle::random_utilities(rng, 2 + trial % 10);
    expect_near(ee_numerators(u).numerator(), oracle::ee_numerator_direct(u), 1e-12);
    expect_near(ee(u).scores, oracle::ee_direct(u), 1e-12);
    expect_near(fp(u).scores, oracle::fp_direct(u), 1e-12);
  }
}

TEST(Ee, AffineInAlpha) {
  // m(i) = ((N-1)Δ − Σα + α_i)/(N−1)²
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 9;
    const auto u = oracle::random_utilities(rng, n);
    const auto alpha = fp_alpha(u).alpha;
    const auto m = ee_numerators(u).numerator();
    const double d = static_cast<double>((n - 1) * (n - 1));
    const double delta = u.v_grand - u.v_empty;
    for (int i = 0; i < n; ++i)
      EXPECT_NEAR(m[static_cast<std::size_t>(i)], ((n - 1) * delta - sum(alpha) + alpha[static_cast<std::size_t>(i)]) / d,
                  1e-12);
  }
}

TEST(Ee, OwnReportsNeverEnterOwnNumerator) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 8;
    auto u = oracle::random_utilities(rng, n);
    const auto before = ee_numerators(u);
    const auto i = static_cast<std::size_t>(trial % n);
    u.v_with[i] += 10.0;
    u.v_without[i] -= 7.0;
    const auto after = ee_numerators(u);
    EXPECT_EQ(before.beta[i], after.beta[i]);
    EXPECT_EQ(before.gamma[i], after.gamma[i]);
  }
}

TEST(Ee, IdenticalClientsAndErrors) {
  RoundUtilities u{0.0, 0.9, std::vector<double>(3, 0.2), std::vector<double>(3, 0.7)};
  expect_near(ee(u).scores, {0.3, 0.3, 0.3}, 1e-12);
  RoundUtilities one{0.0, 1.0, {0.5}, {0.5}};
  EXPECT_THROW(ee(one), std::invalid_argument);
}

TEST(Ee, FallbackWhenNumeratorsCancel) {
  // v(M)=v(M0): β = -Σ IOI_j/(N-1)², γ = Σ LOO_j... choose so β+γ sums to 0 but β does not
  RoundUtilities u{0.0, 0.0, {0.5, 0.5}, {0.5, 0.5}};
  Fallback used{};
  const auto s = ee(u, &used);
  EXPECT_EQ(used, Fallback::kFirst);
  expect_near(s.scores, {0.0, 0.0}, 1e-15);
}

TEST(AdditiveGames, ExactMethodsAgreeAndEeIsAffine) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> d(0.05, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 5;
    std::vector<double> c(static_cast<std::size_t>(n));
    for (auto& x : c) x = d(rng);
    std::vector<double> v(std::size_t{1} << n, 0.0);
    for (std::uint32_t s = 0; s < v.size(); ++s)
      for (int i = 0; i < n; ++i)
        if (s & (1u << i)) v[s] += c[static_cast<std::size_t>(i)];
    TableGame g(n, v);
    auto o = g.oracle();
    const auto u = utilities_from_oracle(o);
    const auto m = ee_numerators(u).numerator();
    const double scale = v.back() / sum(m);
    // EE compresses the exact scores: ((N−2)Σc + c_i)/(N−1)²
    std::vector<double> m_scaled, affine;
    for (double x : m) m_scaled.push_back(x * scale);
    for (double x : c) affine.push_back(((n - 2.0) * sum(c) + x) / ((n - 1.0) * (n - 1.0)));
    auto o2 = g.oracle();
    expect_near(shapley_exact(o2).scores, c, 1e-9);
    expect_near(loo(u).scores, c, 1e-9);
    expect_near(ioi(u).scores, c, 1e-9);
    expect_near(fp_alpha(u).alpha, c, 1e-9);
    expect_near(fp(u).scores, c, 1e-9);
    expect_near(m_scaled, affine, 1e-9);
    EXPECT_EQ(average_ranks(m_scaled), average_ranks(c));
  }
}

TEST(Properties, SymmetryUnderClientSwap) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + trial % 6;
    auto u = oracle::random_utilities(rng, n);
    u.v_with[1] = u.v_with[0];
    u.v_without[1] = u.v_without[0];
    const auto f = fp(u), e = ee(u);
    EXPECT_NEAR(f[0], f[1], 1e-12);
    EXPECT_NEAR(e[0], e[1], 1e-12);
    auto swapped = u;
    std::swap(swapped.v_with[0], swapped.v_with[2]);
    std::swap(swapped.v_without[0], swapped.v_without[2]);
    const auto fs = fp(swapped), es = ee(swapped);
    EXPECT_NEAR(fs[2], f[0], 1e-12);
    EXPECT_NEAR(es[0], e[2], 1e-12);
  }
}

TEST(Properties, EfficiencyOnRandomGames) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 7;
    const auto u = oracle::random_utilities(rng, n);
    EXPECT_NEAR(sum(fp(u).scores), u.v_grand, 1e-9);
    EXPECT_NEAR(sum(ee(u).scores), u.v_grand, 1e-9);
  }
}

namespace {

// m0 = 0, U_i = e_i * c_i in R^N; v(model) = Σ model entries, an additive game.
std::vector<RoundTranscript> additive_rounds(const std::vector<std::vector<double>>& per_round) {
  std::vector<RoundTranscript> out;
  for (std::size_t r = 0; r < per_round.size(); ++r) {
    const auto n = per_round[r].size();
    RoundTranscript t;
    t.round = static_cast<int>(r + 1);
    t.m0 = ModelParams(n);
    t.m = ModelParams(n);
    for (std::size_t i = 0; i < n; ++i) {
      ModelParams d(n);
      d[i] = per_round[r][i];
      t.m += d;
      t.updates.push_back({static_cast<int>(i), d});
    }
    out.push_back(std::move(t));
  }
  return out;
}

double sum_model(const ModelParams& p) {
  double s = 0.0;
  for (double x : p.values()) s += x;
  return s;
}

}  // namespace

TEST(MrShapley, AdditiveRoundsAverage) {
  const auto rounds = additive_rounds({{1.0, 2.0, 3.0}, {3.0, 0.0, 1.0}});
  const ModelEvaluator v = sum_model;
  const auto mr = mr_shapley(rounds, v);
  expect_near(mr.scores.scores, {2.0, 1.0, 2.0}, 1e-12);
  EXPECT_EQ(mr.evaluations_per_round, (std::vector<std::uint64_t>{8, 8}));
  const auto total = mr_shapley(rounds, v, RoundCombine::kSum);
  expect_near(total.scores.scores, {4.0, 2.0, 4.0}, 1e-12);
  EXPECT_EQ(mr.per_round.size(), 2u);
}

TEST(MrShapley, CallCountPerRound) {
  for (int n : {3, 6, 9}) {
    const auto rounds = additive_rounds({std::vector<double>(static_cast<std::size_t>(n), 1.0)});
    const auto mr = mr_shapley(rounds, ModelEvaluator(sum_model));
    EXPECT_EQ(mr.evaluations_per_round.front(), std::uint64_t{1} << n);
  }
}

TEST(MrShapley, Errors) {
  EXPECT_THROW(mr_shapley({}, ModelEvaluator(sum_model)), std::invalid_argument);
  const auto big = additive_rounds({std::vector<double>(13, 1.0)});
  EXPECT_THROW(mr_shapley(big, ModelEvaluator(sum_model)), std::invalid_argument);
}

TEST(Cos, ScoresAndZeroNorm) {
  RoundTranscript t;
  t.m0 = ModelParams(std::vector<double>{0.0, 0.0});
  t.updates = {{0, ModelParams(std::vector<double>{1.0, 0.0})}, {1, ModelParams(std::vector<double>{0.0, 1.0})},
               {2, ModelParams(std::vector<double>{0.0, 0.0})}};
  t.m = ModelParams(std::vector<double>{1.0, 1.0});
  const auto s = cos_score(t);
  EXPECT_NEAR(s[0], std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(s[1], std::sqrt(0.5), 1e-15);
  EXPECT_EQ(s[2], 0.0);
  const RoundTranscript two[] = {t, t};
  const auto acc = cos_accumulated(two);
  EXPECT_NEAR(acc[0], 2 * std::sqrt(0.5), 1e-15);
}

TEST(Transcript, CoalitionModelsAndOracle) {
  const auto rounds = additive_rounds({{1.0, 2.0, 4.0}});
  const auto& t = rounds.front();
  EXPECT_EQ(t.aggregation_residual(), 0.0);
  EXPECT_EQ(sum_model(coalition_model(t, Coalition(5))), 5.0);
  EXPECT_EQ(coalition_model(t, Coalition::grand(3)), t.m);
  EXPECT_EQ(coalition_model(t, Coalition::empty()), t.m0);
  const ModelEvaluator v = sum_model;
  auto o = round_oracle(t, v);
  EXPECT_EQ(o.evaluate(Coalition(6)), 6.0);
  const auto u = utilities_from_transcript(t, v);
  EXPECT_EQ(u.v_without, (std::vector<double>{6.0, 5.0, 3.0}));
}

TEST(EfficiencyTarget, RoundGainShiftsByStartValue) {
  const RoundUtilities u{0.5, 0.4, {0.45, 0.52}, {0.47, 0.38}};
  const auto r = with_target(u, EfficiencyTarget::kRoundGain);
  EXPECT_EQ(r.v_empty, 0.0);
  EXPECT_DOUBLE_EQ(r.v_grand, -0.1);
  // marginals and LOO are unchanged
  EXPECT_EQ(loo(r).scores.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(loo(r).scores[i], loo(u).scores[i], 1e-15);
  EXPECT_NEAR(sum(fp(r).scores), -0.1, 1e-12);
  EXPECT_EQ(with_target(u, EfficiencyTarget::kTotal).v_grand, u.v_grand);
  EXPECT_EQ(parse_efficiency(efficiency_label(EfficiencyTarget::kRoundGain)), EfficiencyTarget::kRoundGain);
  EXPECT_THROW(parse_efficiency("gain"), std::invalid_argument);
}

TEST(EfficiencyTarget, RoundGainKeepsRankingWhenTotalFlipsIt) {
  // v(M) > 0 but the round lost utility: rescaling α to v(M) inverts the order
  const RoundUtilities u{0.60, 0.58, {0.59, 0.55, 0.57}, {0.585, 0.60, 0.59}};
  const auto alpha = fp_alpha(u).alpha;
  ASSERT_LT(sum(alpha), 0.0);
  const auto total = fp(u).scores;
  const auto gain = fp(with_target(u, EfficiencyTarget::kRoundGain)).scores;
  EXPECT_EQ(average_ranks(gain), average_ranks(alpha));
  EXPECT_NE(average_ranks(total), average_ranks(alpha));
}
