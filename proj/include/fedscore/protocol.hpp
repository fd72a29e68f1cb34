#pragma once

#include <span>
#include <string>
#include <vector>

#include "fedscore/game.hpp"
#include "fedscore/scores.hpp"

namespace fedscore {

/// The two values only client i can evaluate under secure aggregation.
struct MarginalReport {
  int client = 0;
  double v_with_self = 0.0;     // v(M0 + U_i)
  double v_without_self = 0.0;  // v(M − U_i)
};

enum class MisreportKind { kHonest, kAdditiveBias, kScale, kDeflateTo };

/// Which of the attacker's two reported values a strategy rewrites.
enum class ReportField { kBoth, kWithSelf, kWithoutSelf };

struct MisreportStrategy {
  MisreportKind kind = MisreportKind::kHonest;
  int target = 0;
  double param = 0.0;  // δ for additive bias, factor for scale, value for deflate_to
  ReportField field = ReportField::kBoth;

  static MisreportStrategy honest(int target) { return {MisreportKind::kHonest, target, 0.0, ReportField::kBoth}; }
  static MisreportStrategy additive_bias(int target, double delta, ReportField f = ReportField::kBoth) {
    return {MisreportKind::kAdditiveBias, target, delta, f};
  }
  static MisreportStrategy scale(int target, double factor, ReportField f = ReportField::kBoth) {
    return {MisreportKind::kScale, target, factor, f};
  }
  static MisreportStrategy deflate_to(int target, double value, ReportField f = ReportField::kBoth) {
    return {MisreportKind::kDeflateTo, target, value, f};
  }

  double apply(double honest_value) const;
  std::string describe() const;
};

/// At most one strategy per client.
using AttackProfile = std::vector<MisreportStrategy>;

MarginalReport honest_report(const RoundUtilities& u, int client);
MarginalReport make_report(const RoundUtilities& u, const MisreportStrategy& s);

/// Server view after the report exchange: v_empty and v_grand are computed by
/// the server; each client's v_with/v_without come from its own report.
RoundUtilities collect_reports(const RoundUtilities& truth, const AttackProfile& attacks);

/// How much client i moves everyone else's EE numerator:
/// [v(M) − v(M0+U_i)] + [v(M−U_i) − v(M0)].
double influence(const RoundUtilities& u, int i);

struct InfluenceMatrix {
  int n = 0;
  std::vector<double> entries;  // row-major: (influencer, influenced)
  bool normalized = false;
  std::vector<bool> column_flagged;  // zero or negative column sum

  double operator()(int i, int j) const { return entries[static_cast<std::size_t>(i * n + j)]; }
  double column_sum(int j) const;
};

/// Entry (i, j) = influence(i) / (2(N−1)²) for i ≠ j, 0 on the diagonal, so
/// column j sums to the EE numerator m(j). When normalizing, each column is
/// divided by its sum; a negative sum is replaced by the sum of absolute
/// values and a zero-sum column stays zero; both are flagged.
InfluenceMatrix influence_matrix(const RoundUtilities& u, bool normalize);

enum class ScorerKind { kLOO, kFP, kEE };

struct ManipulationOutcome {
  MisreportStrategy strategy;
  double attacker_delta = 0.0;             // attacker score under attack minus honest
  std::vector<double> victim_deltas;       // per client; attacker's entry is 0
  double attacker_numerator_delta = 0.0;   // EE only: change in the unnormalized numerator
};

struct ManipulationReport {
  ScorerKind scorer = ScorerKind::kEE;
  std::vector<double> honest_scores;
  std::vector<ManipulationOutcome> outcomes;
};

ManipulationReport manipulation_sweep(const RoundUtilities& truth, std::span<const MisreportStrategy> strategies,
                                      ScorerKind scorer);

const char* scorer_label(ScorerKind kind);

enum class PeerAggregator { kMean, kMedian };

/// EE with β, γ aggregated over the N−1 peer terms by mean (identical to ee)
/// or by median rescaled onto the mean's scale, median · (N−1)/(N−1)².
ScoreVector robust_ee(const RoundUtilities& u, PeerAggregator aggregator);

}  // namespace fedscore
