#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fedscore/fedsim.hpp"
#include "fedscore/protocol.hpp"
#include "fedscore/scores.hpp"

namespace fedscore {

/// Validation failure in a scenario file; what() carries "origin:line: field 'x': why".
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& what, std::string field, int line)
      : std::runtime_error(what), field_(std::move(field)), line_(line) {}
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

enum class AblationAxis { kRound, kClients, kMu };

struct AblationBlock {
  AblationAxis axis = AblationAxis::kRound;
  std::vector<double> values;
};

struct InfluenceBlock {
  bool normalize = true;
};

/// Misreport whose parameter may be symbolic ("v_empty", "v_grand") and is
/// resolved against the honest utilities of the round.
struct StrategySpec {
  MisreportKind kind = MisreportKind::kHonest;
  int target = 0;
  double param = 0.0;
  std::string symbol;  // empty when param is literal
  ReportField field = ReportField::kBoth;

  MisreportStrategy resolve(const RoundUtilities& u) const;
};

struct ManipulationBlock {
  std::vector<ScorerKind> scorers = {ScorerKind::kLOO, ScorerKind::kFP, ScorerKind::kEE};
  std::vector<StrategySpec> strategies;
};

struct WeightedAggregationBlock {
  std::vector<Method> methods = {Method::kLOO, Method::kFP, Method::kEE, Method::kCOS, Method::kMRSV};
  // Per-client flip rates; default i/(N−1).
  std::optional<std::vector<double>> noise_rates;
};

struct MisbehaviorBlock {
  int attacker = 0;
  double attacker_rate = 1.0;
  std::vector<Method> methods = {Method::kLOO, Method::kFP, Method::kEE, Method::kCOS, Method::kMRSV};
};

/// Sections:
///   [scenario]   name, eval_round, methods, reference, repeats, mr_combine, efficiency, fidelity
///   [federation] n_clients (required), partition, dirichlet_mu, rounds, local_epochs,
///                lr, batch_size, hidden, seed, utility, noise_rates, flip_mode
///   [dataset]    n_classes, dim, samples_per_client, test_samples_per_class,
///                separation, means_seed
///   [ablation] [influence] [manipulation] [weighted_aggregation] [misbehavior]
struct Scenario {
  std::string name = "scenario";
  FederationConfig federation;
  int eval_round = 10;
  std::vector<Method> methods = {Method::kLOO, Method::kFP, Method::kEE, Method::kCOS};
  Method reference = Method::kMRSV;
  int repeats = 10;
  RoundCombine mr_combine = RoundCombine::kMean;
  EfficiencyTarget efficiency = EfficiencyTarget::kTotal;
  bool fidelity = true;  // emit the rank-fidelity table

  std::optional<AblationBlock> ablation;
  std::optional<InfluenceBlock> influence;
  std::optional<ManipulationBlock> manipulation;
  std::optional<WeightedAggregationBlock> weighted_aggregation;
  std::optional<MisbehaviorBlock> misbehavior;

  std::string source_text;

  /// Seed of repeat r, derived from federation.seed.
  std::uint64_t repeat_seed(int repeat) const;
};

Scenario parse_scenario(std::string_view text, const std::string& origin = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path);

/// Parses "kind:target[:param][:field]", e.g. "deflate_to:1:v_empty" or
/// "additive_bias:0:-0.05:without".
StrategySpec parse_strategy(std::string_view text);

/// Linear flip-rate schedule i/(N−1); a single client gets 0.
std::vector<double> linear_noise_rates(int n_clients);

}  // namespace fedscore
