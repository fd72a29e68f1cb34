#pragma once

#include <functional>
#include <vector>

#include "fedscore/game.hpp"
#include "fedscore/model.hpp"

namespace fedscore {

/// Pseudogradient U_i = (M_i − M_0) / N of one client.
struct ClientUpdate {
  int client = 0;
  ModelParams delta;
};

/// One training round as seen through secure aggregation: the global model
/// before (m0) and after (m) the round plus the hidden per-client updates.
struct RoundTranscript {
  int round = 0;
  ModelParams m0;
  std::vector<ClientUpdate> updates;
  ModelParams m;

  int n_clients() const { return static_cast<int>(updates.size()); }

  /// Largest |m − (m0 + Σ U_i)| over coordinates.
  double aggregation_residual() const;
  /// Throws std::invalid_argument on dimension mismatch or an empty round.
  void validate() const;
};

/// v(model): a pure, thread-safe model utility.
using ModelEvaluator = std::function<double(const ModelParams&)>;

/// Model of coalition S in this round: m0 + Σ_{i∈S} U_i. The four coalition
/// families visible under secure aggregation use the models the parties
/// actually hold: ∅ -> m0, [N] -> m, {i} -> m0 + U_i, [N]\{i} -> m − U_i.
ModelParams coalition_model(const RoundTranscript& t, Coalition s);

/// Oracle S ↦ v(coalition_model(t, S)). The transcript and evaluator must
/// outlive the oracle.
CoalitionOracle round_oracle(const RoundTranscript& t, const ModelEvaluator& v);

}  // namespace fedscore
