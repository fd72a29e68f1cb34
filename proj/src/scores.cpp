#include "fedscore/scores.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fedscore {

void RoundUtilities::validate() const {
  if (v_with.empty()) throw std::invalid_argument("round utilities need at least one client");
  if (v_with.size() != v_without.size())
    throw std::invalid_argument("v_with and v_without have different lengths");
  auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(v_empty) || !finite(v_grand)) throw std::domain_error("non-finite server utility");
  for (std::size_t i = 0; i < v_with.size(); ++i)
    if (!finite(v_with[i]) || !finite(v_without[i]))
      throw std::domain_error("non-finite utility reported for client " + std::to_string(i));
}

RoundUtilities utilities_from_oracle(CoalitionOracle& oracle) {
  const int n = oracle.n_clients();
  const Coalition grand = Coalition::grand(n);
  RoundUtilities u;
  u.v_empty = oracle(Coalition::empty());
  u.v_grand = oracle(grand);
  u.v_with.resize(static_cast<std::size_t>(n));
  u.v_without.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    u.v_with[static_cast<std::size_t>(i)] = oracle(Coalition::singleton(i));
    u.v_without[static_cast<std::size_t>(i)] = oracle(grand.without(i));
  }
  return u;
}

RoundUtilities utilities_from_transcript(const RoundTranscript& t, const ModelEvaluator& v) {
  auto oracle = round_oracle(t, v);
  return utilities_from_oracle(oracle);
}

std::string_view efficiency_label(EfficiencyTarget t) {
  return t == EfficiencyTarget::kTotal ? "total" : "round_gain";
}

EfficiencyTarget parse_efficiency(std::string_view label) {
  if (label == "total") return EfficiencyTarget::kTotal;
  if (label == "round_gain") return EfficiencyTarget::kRoundGain;
  throw std::invalid_argument("unknown efficiency target '" + std::string(label) + "' (expected total or round_gain)");
}

RoundUtilities with_target(RoundUtilities u, EfficiencyTarget target) {
  if (target == EfficiencyTarget::kTotal) return u;
  const double base = u.v_empty;
  u.v_empty = 0.0;
  u.v_grand -= base;
  for (auto& x : u.v_with) x -= base;
  for (auto& x : u.v_without) x -= base;
  return u;
}

std::vector<double> EeNumerators::numerator() const {
  std::vector<double> m(beta.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = (beta[i] + gamma[i]) / 2.0;
  return m;
}

std::vector<double> efficient_rescale(std::span<const std::span<const double>> candidates, double total,
                                      Fallback* used) {
  if (candidates.empty() || candidates.front().empty()) throw std::invalid_argument("nothing to rescale");
  const std::size_t n = candidates.front().size();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const auto terms = candidates[c];
    if (terms.size() != n) throw std::invalid_argument("rescale candidates differ in length");
    double sum = 0.0;
    for (double t : terms) sum += t;
    if (std::abs(sum) <= kZeroDenominator) continue;
    if (used) *used = static_cast<Fallback>(std::min<std::size_t>(c, 2));
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = terms[i] * total / sum;
    return out;
  }
  if (used) *used = Fallback::kUniform;
  return std::vector<double>(n, total / static_cast<double>(n));
}

ScoreVector loo(const RoundUtilities& u) {
  u.validate();
  ScoreVector s{Method::kLOO, std::vector<double>(u.v_with.size()), std::nullopt};
  for (std::size_t i = 0; i < s.scores.size(); ++i) s.scores[i] = u.v_grand - u.v_without[i];
  return s;
}

ScoreVector ioi(const RoundUtilities& u) {
  u.validate();
  ScoreVector s{Method::kIOI, std::vector<double>(u.v_with.size()), std::nullopt};
  for (std::size_t i = 0; i < s.scores.size(); ++i) s.scores[i] = u.v_with[i] - u.v_empty;
  return s;
}

FpAlpha fp_alpha(const RoundUtilities& u) {
  u.validate();
  FpAlpha a{std::vector<double>(u.v_with.size())};
  for (std::size_t i = 0; i < a.alpha.size(); ++i)
    a.alpha[i] = ((u.v_grand - u.v_without[i]) + (u.v_with[i] - u.v_empty)) / 2.0;
  return a;
}

ScoreVector fp(const RoundUtilities& u, Fallback* used) {
  const auto alpha = fp_alpha(u).alpha;
  const auto leave = loo(u).scores;
  const auto include = ioi(u).scores;
  const std::span<const double> chain[] = {alpha, leave, include};
  ScoreVector s{Method::kFP, efficient_rescale(chain, u.v_grand, used), std::nullopt};
  check_finite(s);
  return s;
}

EeNumerators ee_numerators(const RoundUtilities& u) {
  u.validate();
  const std::size_t n = u.v_with.size();
  if (n < 2) throw std::invalid_argument("Everybody-Else needs at least two clients");
  const double denom = static_cast<double>(n - 1) * static_cast<double>(n - 1);
  EeNumerators e{std::vector<double>(n), std::vector<double>(n)};
  // Client i's own reports never enter its own β(i), γ(i).
  for (std::size_t i = 0; i < n; ++i) {
    double b = 0.0;
    double g = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      b += u.v_grand - u.v_with[j];
      g += u.v_without[j] - u.v_empty;
    }
    e.beta[i] = b / denom;
    e.gamma[i] = g / denom;
  }
  return e;
}

ScoreVector ee(const RoundUtilities& u, Fallback* used) {
  const auto parts = ee_numerators(u);
  const auto m = parts.numerator();
  const std::span<const double> chain[] = {m, parts.beta, parts.gamma};
  ScoreVector s{Method::kEE, efficient_rescale(chain, u.v_grand, used), std::nullopt};
  check_finite(s);
  return s;
}

namespace {

double cosine(const ModelParams& a, const ModelParams& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

}  // namespace

ScoreVector cos_score(const RoundTranscript& t) {
  t.validate();
  ScoreVector s{Method::kCOS, std::vector<double>(t.updates.size()), t.round};
  for (std::size_t i = 0; i < t.updates.size(); ++i) s.scores[i] = cosine(t.m0 + t.updates[i].delta, t.m);
  return s;
}

ScoreVector cos_accumulated(std::span<const RoundTranscript> transcripts) {
  if (transcripts.empty()) throw std::invalid_argument("cosine accumulation needs at least one round");
  ScoreVector total = cos_score(transcripts.front());
  for (std::size_t r = 1; r < transcripts.size(); ++r) {
    const auto s = cos_score(transcripts[r]);
    if (s.size() != total.size()) throw std::invalid_argument("rounds disagree on the number of clients");
    for (std::size_t i = 0; i < s.size(); ++i) total.scores[i] += s.scores[i];
    total.round = s.round;
  }
  return total;
}

MultiRoundShapley mr_shapley(std::span<const RoundTranscript> transcripts, const ModelEvaluator& v,
                             RoundCombine combine) {
  if (transcripts.empty()) throw std::invalid_argument("multi-round Shapley needs at least one round");
  const int n = transcripts.front().n_clients();
  if (n > kMaxMultiRoundClients)
    throw std::invalid_argument("multi-round Shapley is limited to " + std::to_string(kMaxMultiRoundClients) +
                                " clients, got " + std::to_string(n));
  MultiRoundShapley out;
  out.scores = {Method::kMRSV, std::vector<double>(static_cast<std::size_t>(n), 0.0), transcripts.back().round};
  for (const auto& t : transcripts) {
    if (t.n_clients() != n) throw std::invalid_argument("rounds disagree on the number of clients");
    auto oracle = round_oracle(t, v);
    auto sv = shapley_exact(oracle);
    sv.round = t.round;
    out.evaluations_per_round.push_back(oracle.call_count());
    for (std::size_t i = 0; i < sv.size(); ++i) out.scores.scores[i] += sv.scores[i];
    out.per_round.push_back(std::move(sv));
  }
  if (combine == RoundCombine::kMean)
    for (auto& s : out.scores.scores) s /= static_cast<double>(transcripts.size());
  return out;
}

}  // namespace fedscore
