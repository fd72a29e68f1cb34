#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fedscore/game.hpp"
#include "fedscore/transcript.hpp"

namespace fedscore {

// Sums of raw terms with magnitude below this are treated as zero when
// normalizing scores to the grand-coalition value.
inline constexpr double kZeroDenominator = 1e-12;

/// The coalition utilities observable under secure aggregation: v(M0), v(M)
/// for everyone, and v(M0 + U_i), v(M − U_i) which only client i can compute.
struct RoundUtilities {
  double v_empty = 0.0;
  double v_grand = 0.0;
  std::vector<double> v_with;     // v(M0 + U_i)
  std::vector<double> v_without;  // v(M − U_i)

  int n_clients() const { return static_cast<int>(v_with.size()); }
  /// Throws std::invalid_argument on length mismatch or N = 0, and
  /// std::domain_error on non-finite entries.
  void validate() const;
};

/// Evaluates exactly the 2N+2 permitted coalitions (∅, [N], each {i}, each
/// [N]\{i}) and nothing else.
RoundUtilities utilities_from_oracle(CoalitionOracle& oracle);
RoundUtilities utilities_from_transcript(const RoundTranscript& t, const ModelEvaluator& v);

/// What FP and EE are rescaled to. kTotal keeps v(M); kRoundGain measures
/// every coalition against the round's start so v(∅) = 0 and the target is
/// v(M) − v(M0), the quantity the per-round Shapley values sum to.
enum class EfficiencyTarget { kTotal, kRoundGain };

std::string_view efficiency_label(EfficiencyTarget t);
EfficiencyTarget parse_efficiency(std::string_view label);

/// Shifts all utilities by −v(M0) for kRoundGain; identity for kTotal.
RoundUtilities with_target(RoundUtilities u, EfficiencyTarget target);

struct FpAlpha {
  std::vector<double> alpha;
};

struct EeNumerators {
  std::vector<double> beta;
  std::vector<double> gamma;

  /// m(i) = (beta(i) + gamma(i)) / 2
  std::vector<double> numerator() const;
};

/// Which term ended up in the efficiency normalization.
enum class Fallback {
  kPrimary,   // α (FP) or (β+γ)/2 (EE)
  kFirst,     // LOO term (FP) or β alone (EE)
  kSecond,    // IOI term (FP) or γ alone (EE)
  kUniform,   // every candidate summed to zero
};

/// Rescales the first candidate whose sum is nonzero so the result sums to
/// `total`; if all candidates sum to zero, splits `total` uniformly.
std::vector<double> efficient_rescale(std::span<const std::span<const double>> candidates, double total,
                                      Fallback* used = nullptr);

/// v(M) − v(M − U_i)
ScoreVector loo(const RoundUtilities& u);
/// v(M0 + U_i) − v(M0)
ScoreVector ioi(const RoundUtilities& u);
/// α(i) = [LOO(i) + IOI(i)] / 2
FpAlpha fp_alpha(const RoundUtilities& u);
/// Fair-Private: α rescaled to sum to v(M); zero-sum fallback LOO, IOI, uniform.
ScoreVector fp(const RoundUtilities& u, Fallback* used = nullptr);

/// β(i) = Σ_{j≠i} [v(M) − v(M0+U_j)] / (N−1)², γ(i) = Σ_{j≠i} [v(M−U_j) − v(M0)] / (N−1)².
/// Requires N >= 2.
EeNumerators ee_numerators(const RoundUtilities& u);
/// Everybody-Else: (β+γ)/2 rescaled to sum to v(M); zero-sum fallback β, γ, uniform.
ScoreVector ee(const RoundUtilities& u, Fallback* used = nullptr);

/// Cosine similarity between M0 + U_i and M; 0 when either vector is zero.
ScoreVector cos_score(const RoundTranscript& t);
/// Per-client sum of cos_score over rounds.
ScoreVector cos_accumulated(std::span<const RoundTranscript> transcripts);

enum class RoundCombine { kMean, kSum };

// Per-round enumeration is 2^N model evaluations.
inline constexpr int kMaxMultiRoundClients = 12;

struct MultiRoundShapley {
  ScoreVector scores;
  std::vector<ScoreVector> per_round;
  std::vector<std::uint64_t> evaluations_per_round;
};

/// Exact Shapley value of each round's gradient-subset game
/// v_t(S) = v(M0_t + Σ_{i∈S} U_i,t), combined across rounds.
MultiRoundShapley mr_shapley(std::span<const RoundTranscript> transcripts, const ModelEvaluator& v,
                             RoundCombine combine = RoundCombine::kMean);

}  // namespace fedscore
