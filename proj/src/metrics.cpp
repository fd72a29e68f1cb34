#include "fedscore/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fedscore {

namespace {

constexpr double kDegenerateMean = 1e-12;

void require_pair(std::span<const double> a, std::span<const double> b, std::size_t min_len) {
  if (a.size() != b.size())
    throw std::invalid_argument("score vectors differ in length: " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
  if (a.size() < min_len) throw std::invalid_argument("need at least " + std::to_string(min_len) + " entries");
}

bool constant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

}  // namespace

NormalizedScores normalize_scores(std::span<const double> s) {
  if (s.empty()) throw std::invalid_argument("cannot normalize an empty score vector");
  const double lo = *std::min_element(s.begin(), s.end());
  NormalizedScores out{std::vector<double>(s.size()), false};
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) sum += (out.values[i] = s[i] - lo);
  const double mean = sum / static_cast<double>(s.size());
  if (!(mean > kDegenerateMean)) {
    std::fill(out.values.begin(), out.values.end(), 0.0);
    out.degenerate = true;
    return out;
  }
  for (auto& v : out.values) v /= mean;
  return out;
}

double l2_distance(std::span<const double> a, std::span<const double> b) {
  require_pair(a, b, 1);
  const auto na = normalize_scores(a).values;
  const auto nb = normalize_scores(b).values;
  double acc = 0.0;
  for (std::size_t i = 0; i < na.size(); ++i) acc += (na[i] - nb[i]) * (na[i] - nb[i]);
  return std::sqrt(acc);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return x[i] < x[j]; });
  std::vector<double> ranks(x.size());
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start + 1;
    while (end < order.size() && x[order[end]] == x[order[start]]) ++end;
    const double rank = (static_cast<double>(start + 1) + static_cast<double>(end)) / 2.0;
    for (std::size_t k = start; k < end; ++k) ranks[order[k]] = rank;
    start = end;
  }
  return ranks;
}

Correlation pearson(std::span<const double> a, std::span<const double> b) {
  require_pair(a, b, 2);
  if (constant(a) || constant(b)) return {0.0, true};
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return {0.0, true};
  return {std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0), false};
}

Correlation spearman(std::span<const double> a, std::span<const double> b) {
  require_pair(a, b, 2);
  if (constant(a) || constant(b)) return {0.0, true};
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson(ra, rb);
}

Correlation kendall(std::span<const double> a, std::span<const double> b) {
  require_pair(a, b, 2);
  if (constant(a) || constant(b)) return {0.0, true};
  long long concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const bool ta = a[i] == a[j];
      const bool tb = b[i] == b[j];
      if (ta) ++ties_a;
      if (tb) ++ties_b;
      if (ta || tb) continue;
      if ((a[i] < a[j]) == (b[i] < b[j]))
        ++concordant;
      else
        ++discordant;
    }
  }
  const long long pairs = static_cast<long long>(a.size() * (a.size() - 1) / 2);
  const double denom = std::sqrt(static_cast<double>(pairs - ties_a) * static_cast<double>(pairs - ties_b));
  return {std::clamp(static_cast<double>(concordant - discordant) / denom, -1.0, 1.0), false};
}

RankCorrelation rank_correlation(std::span<const double> a, std::span<const double> b) {
  return {spearman(a, b), kendall(a, b), pearson(a, b)};
}

std::size_t argmin(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("argmin of an empty vector");
  return static_cast<std::size_t>(std::min_element(x.begin(), x.end()) - x.begin());
}

double detection_rate(std::span<const ScoreVector> runs, int attacker) {
  if (runs.empty()) throw std::invalid_argument("detection rate needs at least one run");
  std::size_t hits = 0;
  for (const auto& run : runs) {
    if (attacker < 0 || static_cast<std::size_t>(attacker) >= run.size())
      throw std::invalid_argument("attacker index out of range");
    if (argmin(run.scores) == static_cast<std::size_t>(attacker)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(runs.size());
}

Summary summarize(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("summary of an empty sample");
  const double n = static_cast<double>(x.size());
  Summary s;
  s.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  if (x.size() > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - s.mean) * (v - s.mean);
    s.sample_variance = ss / (n - 1.0);
  }
  return s;
}

}  // namespace fedscore
