#pragma once

#include <span>
#include <vector>

#include "fedscore/game.hpp"

namespace fedscore {

struct NormalizedScores {
  std::vector<double> values;
  bool degenerate = false;  // every input equal: output is all zeros
};

/// Shift so the minimum is 0, then divide by the mean (output mean 1).
NormalizedScores normalize_scores(std::span<const double> s);
inline NormalizedScores normalize_scores(const ScoreVector& s) { return normalize_scores(s.scores); }

/// Euclidean distance between the normalized forms of a and b.
double l2_distance(std::span<const double> a, std::span<const double> b);

struct Correlation {
  double value = 0.0;
  bool degenerate = false;  // an input was constant; value is 0
};

/// Pearson correlation of average ranks.
Correlation spearman(std::span<const double> a, std::span<const double> b);
/// Kendall tau-b.
Correlation kendall(std::span<const double> a, std::span<const double> b);
Correlation pearson(std::span<const double> a, std::span<const double> b);

struct RankCorrelation {
  Correlation spearman_phi;
  Correlation kendall_kappa;
  Correlation pearson_rho;
};

RankCorrelation rank_correlation(std::span<const double> a, std::span<const double> b);

/// Average (1-based) ranks, ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> x);

/// Index of the minimum; ties go to the lowest index.
std::size_t argmin(std::span<const double> x);

/// Fraction of runs in which `attacker` holds the minimum score (after the
/// lowest-index tie-break).
double detection_rate(std::span<const ScoreVector> runs, int attacker);

struct Summary {
  double mean = 0.0;
  double sample_variance = 0.0;  // n − 1 denominator; 0 for a single value
};

Summary summarize(std::span<const double> x);

}  // namespace fedscore
