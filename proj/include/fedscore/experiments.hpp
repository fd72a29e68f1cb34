#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedscore/fedsim.hpp"
#include "fedscore/metrics.hpp"
#include "fedscore/scenario.hpp"
#include "fedscore/table.hpp"

namespace fedscore {

/// Oracle calls spent per scored round.
struct CostAudit {
  int n_clients = 0;
  std::vector<std::uint64_t> secure_calls;  // per repeat: FP/EE/LOO/IOI share one 2N+2 utility pass
  std::vector<std::uint64_t> mrsv_calls;    // per scored round across repeats: 2^N each
};

/// Scores of every requested method for one training history. `history`
/// holds rounds 1..eval_round; SA-compatible scores use the last round,
/// COS accumulates over all of them and MR-SV averages the per-round games.
/// Method::kSV (true Shapley) needs `federation` for the retraining game.
std::vector<ScoreVector> score_history(std::span<const Method> methods, std::span<const RoundTranscript> history,
                                       const ModelEvaluator& v, RoundCombine combine,
                                       const Federation* federation = nullptr, CostAudit* audit = nullptr,
                                       EfficiencyTarget target = EfficiencyTarget::kTotal);

struct MetricSample {
  double l2 = 0.0;
  double spearman = 0.0;
  double kendall = 0.0;
  double pearson = 0.0;
};

MetricSample compare_scores(const ScoreVector& method, const ScoreVector& reference);

struct FidelityRow {
  Method method = Method::kFP;
  std::vector<MetricSample> per_seed;
  Summary l2, spearman, kendall, pearson;
};

struct FidelityResult {
  Method reference = Method::kMRSV;
  std::vector<FidelityRow> rows;
  CostAudit audit;
};

/// Per seed: train to eval_round, score each method, compare with the
/// reference; report mean and sample variance across seeds.
FidelityResult rank_fidelity(const Scenario& scenario);

struct AblationRow {
  double value = 0.0;
  FidelityRow row;
};

/// Rank fidelity per axis value. The round axis reuses one training run per
/// seed and re-scores its transcripts.
std::vector<AblationRow> ablation(const Scenario& scenario, AblationAxis axis, std::span<const double> values);

/// normalize_scores, clamp at 0, rescale to mean 1; uniform (and flagged)
/// when the normalized vector is degenerate.
std::vector<double> aggregation_weights(std::span<const double> scores, bool* degenerate = nullptr);

/// m0 + Σ w_i U_i, summed in client order.
ModelParams aggregate(const RoundTranscript& t, std::span<const double> weights);

struct WeightedCurve {
  std::string label;  // "FedAvg" or a method label
  std::vector<double> neg_loss;  // after each round
  int degenerate_rounds = 0;
};

/// Runs one trajectory per weighting (uniform FedAvg first, then `methods`)
/// from the same initial model, data and client seeds; each round's scores
/// come from that trajectory's own transcript.
std::vector<WeightedCurve> weighted_trajectories(const Federation& federation, std::span<const Method> methods,
                                                 int rounds, RoundCombine combine,
                                                 EfficiencyTarget target = EfficiencyTarget::kTotal);

struct WeightedAggregationResult {
  std::vector<std::vector<WeightedCurve>> per_seed;  // [repeat][curve]
};

WeightedAggregationResult weighted_aggregation(const Scenario& scenario);

struct DetectionRow {
  Method method = Method::kFP;
  double detection_rate = 0.0;
  std::vector<double> attacker_normalized;  // per seed
};

struct MisbehaviorResult {
  int attacker = 0;
  std::vector<DetectionRow> rows;
};

MisbehaviorResult misbehavior(const Scenario& scenario);

/// Normalized influence matrix at the evaluation round, averaged over seeds.
InfluenceMatrix mean_influence(const Scenario& scenario);

std::vector<ManipulationReport> manipulation_study(const Scenario& scenario);

struct ResultBundle {
  std::vector<Table> tables;
  std::string audit_json;
};

/// Runs every block present in the scenario.
ResultBundle run_scenario(const Scenario& scenario);

/// Writes tables (CSV + JSON), scenario snapshot, seed list, audit and a
/// manifest with SHA-256 checksums into `dir`.
void write_bundle(const std::filesystem::path& dir, const Scenario& scenario, const ResultBundle& bundle);

/// `<root>/<name>-<UTC timestamp>`
std::filesystem::path timestamped_dir(const std::filesystem::path& root, const std::string& name);

Table fidelity_table(const FidelityResult& r);
Table fidelity_seed_table(const FidelityResult& r);
Table ablation_table(AblationAxis axis, const std::vector<AblationRow>& rows);
Table influence_table(const InfluenceMatrix& m);
Table manipulation_table(const std::vector<ManipulationReport>& reports);
Table weighted_curves_table(const WeightedAggregationResult& r);
Table weighted_summary_table(const WeightedAggregationResult& r);
Table detection_table(const MisbehaviorResult& r);

/// Linear-interpolated quantile of a sample, q in [0, 1].
double quantile(std::vector<double> x, double q);

}  // namespace fedscore
