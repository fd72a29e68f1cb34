#include "fedscore/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>


namespace fedscore {

double MisreportStrategy::apply(double honest_value) const {
  switch (kind) {
    case MisreportKind::kHonest:
      return honest_value;
    case MisreportKind::kAdditiveBias:
      return honest_value + param;
    case MisreportKind::kScale:
      return honest_value * param;
    case MisreportKind::kDeflateTo:
      return param;
  }
  return honest_value;
}

std::string MisreportStrategy::describe() const {
  std::ostringstream os;
  switch (kind) {
    case MisreportKind::kHonest:
      os << "honest";
      break;
    case MisreportKind::kAdditiveBias:
      os << "additive_bias(" << param << ")";
      break;
    case MisreportKind::kScale:
      os << "scale(" << param << ")";
      break;
    case MisreportKind::kDeflateTo:
      os << "deflate_to(" << param << ")";
      break;
  }
  if (field == ReportField::kWithSelf) os << "[with]";
  if (field == ReportField::kWithoutSelf) os << "[without]";
  os << "@" << target;
  return os.str();
}

MarginalReport honest_report(const RoundUtilities& u, int client) {
  if (client < 0 || client >= u.n_clients()) throw std::invalid_argument("report client index out of range");
  const auto i = static_cast<std::size_t>(client);
  return {client, u.v_with[i], u.v_without[i]};
}

MarginalReport make_report(const RoundUtilities& u, const MisreportStrategy& s) {
  MarginalReport r = honest_report(u, s.target);
  if (s.field != ReportField::kWithoutSelf) r.v_with_self = s.apply(r.v_with_self);
  if (s.field != ReportField::kWithSelf) r.v_without_self = s.apply(r.v_without_self);
  return r;
}

RoundUtilities collect_reports(const RoundUtilities& truth, const AttackProfile& attacks) {
  truth.validate();
  std::vector<bool> claimed(truth.v_with.size(), false);
  for (const auto& s : attacks) {
    if (s.target < 0 || s.target >= truth.n_clients())
      throw std::invalid_argument("strategy targets unknown client " + std::to_string(s.target));
    if (claimed[static_cast<std::size_t>(s.target)])
      throw std::invalid_argument("client " + std::to_string(s.target) + " has more than one strategy");
    claimed[static_cast<std::size_t>(s.target)] = true;
  }
  RoundUtilities view = truth;
  for (const auto& s : attacks) {
    const auto r = make_report(truth, s);
    view.v_with[static_cast<std::size_t>(r.client)] = r.v_with_self;
    view.v_without[static_cast<std::size_t>(r.client)] = r.v_without_self;
  }
  view.validate();
  return view;
}

double influence(const RoundUtilities& u, int i) {
  u.validate();
  if (u.n_clients() < 2) throw std::invalid_argument("influence needs at least two clients");
  const auto k = static_cast<std::size_t>(i);
  return (u.v_grand - u.v_with.at(k)) + (u.v_without.at(k) - u.v_empty);
}

double InfluenceMatrix::column_sum(int j) const {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += (*this)(i, j);
  return s;
}

InfluenceMatrix influence_matrix(const RoundUtilities& u, bool normalize) {
  const int n = u.n_clients();
  if (n < 2) throw std::invalid_argument("influence matrix needs at least two clients");
  const double scale = 2.0 * (n - 1) * (n - 1);
  InfluenceMatrix m;
  m.n = n;
  m.entries.assign(static_cast<std::size_t>(n * n), 0.0);
  m.column_flagged.assign(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n; ++i) {
    const double share = influence(u, i) / scale;
    for (int j = 0; j < n; ++j)
      if (i != j) m.entries[static_cast<std::size_t>(i * n + j)] = share;
  }
  if (!normalize) return m;
  m.normalized = true;
  for (int j = 0; j < n; ++j) {
    double sum = m.column_sum(j);
    if (std::abs(sum) <= kZeroDenominator) {
      for (int i = 0; i < n; ++i) m.entries[static_cast<std::size_t>(i * n + j)] = 0.0;
      m.column_flagged[static_cast<std::size_t>(j)] = true;
      continue;
    }
    if (sum < 0.0) {
      sum = 0.0;
      for (int i = 0; i < n; ++i) sum += std::abs(m(i, j));
      m.column_flagged[static_cast<std::size_t>(j)] = true;
    }
    for (int i = 0; i < n; ++i) m.entries[static_cast<std::size_t>(i * n + j)] /= sum;
  }
  return m;
}

const char* scorer_label(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::kLOO:
      return "LOO";
    case ScorerKind::kFP:
      return "FP";
    case ScorerKind::kEE:
      return "EE";
  }
  return "?";
}

namespace {

std::vector<double> score_with(const RoundUtilities& u, ScorerKind scorer) {
  switch (scorer) {
    case ScorerKind::kLOO:
      return loo(u).scores;
    case ScorerKind::kFP:
      return fp(u).scores;
    case ScorerKind::kEE:
      return ee(u).scores;
  }
  return {};
}

}  // namespace

ManipulationReport manipulation_sweep(const RoundUtilities& truth, std::span<const MisreportStrategy> strategies,
                                      ScorerKind scorer) {
  ManipulationReport report;
  report.scorer = scorer;
  report.honest_scores = score_with(truth, scorer);
  const auto honest_numerator =
      scorer == ScorerKind::kEE ? ee_numerators(truth).numerator() : std::vector<double>{};
  for (const auto& s : strategies) {
    const auto view = collect_reports(truth, {s});
    const auto attacked = score_with(view, scorer);
    ManipulationOutcome o;
    o.strategy = s;
    const auto a = static_cast<std::size_t>(s.target);
    o.attacker_delta = attacked[a] - report.honest_scores[a];
    o.victim_deltas.resize(attacked.size(), 0.0);
    for (std::size_t j = 0; j < attacked.size(); ++j)
      if (j != a) o.victim_deltas[j] = attacked[j] - report.honest_scores[j];
    if (scorer == ScorerKind::kEE) o.attacker_numerator_delta = ee_numerators(view).numerator()[a] - honest_numerator[a];
    report.outcomes.push_back(std::move(o));
  }
  return report;
}

namespace {

double median(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  return n % 2 ? x[n / 2] : (x[n / 2 - 1] + x[n / 2]) / 2.0;
}

}  // namespace

ScoreVector robust_ee(const RoundUtilities& u, PeerAggregator aggregator) {
  if (aggregator == PeerAggregator::kMean) return ee(u);
  u.validate();
  const std::size_t n = u.v_with.size();
  if (n < 3) throw std::invalid_argument("median Everybody-Else needs at least three clients");
  const double rescale = static_cast<double>(n - 1) / (static_cast<double>(n - 1) * static_cast<double>(n - 1));
  EeNumerators e{std::vector<double>(n), std::vector<double>(n)};
  std::vector<double> beta_terms, gamma_terms;
  for (std::size_t i = 0; i < n; ++i) {
    beta_terms.clear();
    gamma_terms.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      beta_terms.push_back(u.v_grand - u.v_with[j]);
      gamma_terms.push_back(u.v_without[j] - u.v_empty);
    }
    e.beta[i] = median(beta_terms) * rescale;
    e.gamma[i] = median(gamma_terms) * rescale;
  }
  const auto m = e.numerator();
  const std::span<const double> chain[] = {m, e.beta, e.gamma};
  ScoreVector s{Method::kEE, efficient_rescale(chain, u.v_grand), std::nullopt};
  check_finite(s);
  return s;
}

}  // namespace fedscore
