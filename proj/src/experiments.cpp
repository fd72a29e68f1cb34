#include "fedscore/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "fedscore/io.hpp"
#include "fedscore/parallel.hpp"
#include "json.hpp"

namespace fedscore {

namespace {

// Retraining-game references are limited to 2^9 full federations.
constexpr int kTrueShapleyMaxClients = 9;

bool uses_round_utilities(Method m) {
  return m == Method::kLOO || m == Method::kIOI || m == Method::kFP || m == Method::kEE;
}

FederationConfig repeat_config(const Scenario& sc, int repeat) {
  FederationConfig cfg = sc.federation;
  cfg.seed = sc.repeat_seed(repeat);
  return cfg;
}

std::vector<Method> with_reference(std::span<const Method> methods, Method reference) {
  std::vector<Method> all(methods.begin(), methods.end());
  if (std::find(all.begin(), all.end(), reference) == all.end()) all.push_back(reference);
  return all;
}

const ScoreVector& find_scores(const std::vector<ScoreVector>& scores, Method m) {
  for (const auto& s : scores)
    if (s.method == m) return s;
  throw std::logic_error("scores for " + std::string(method_label(m)) + " were not computed");
}

void merge_audit(CostAudit& into, const CostAudit& from) {
  into.n_clients = from.n_clients;
  into.secure_calls.insert(into.secure_calls.end(), from.secure_calls.begin(), from.secure_calls.end());
  into.mrsv_calls.insert(into.mrsv_calls.end(), from.mrsv_calls.begin(), from.mrsv_calls.end());
}

FidelityRow summarize_row(Method m, std::vector<MetricSample> samples) {
  FidelityRow row;
  row.method = m;
  row.per_seed = std::move(samples);
  auto column = [&](double MetricSample::*field) {
    std::vector<double> v;
    for (const auto& s : row.per_seed) v.push_back(s.*field);
    return summarize(v);
  };
  row.l2 = column(&MetricSample::l2);
  row.spearman = column(&MetricSample::spearman);
  row.kendall = column(&MetricSample::kendall);
  row.pearson = column(&MetricSample::pearson);
  return row;
}

// samples[repeat][method index]
std::vector<FidelityRow> rows_from(std::span<const Method> methods,
                                   const std::vector<std::vector<MetricSample>>& samples) {
  std::vector<FidelityRow> rows;
  for (std::size_t k = 0; k < methods.size(); ++k) {
    std::vector<MetricSample> per_seed;
    for (const auto& rep : samples) per_seed.push_back(rep[k]);
    rows.push_back(summarize_row(methods[k], std::move(per_seed)));
  }
  return rows;
}

std::vector<MetricSample> compare_all(std::span<const Method> methods, const std::vector<ScoreVector>& scores,
                                      Method reference) {
  const auto& ref = find_scores(scores, reference);
  std::vector<MetricSample> out;
  for (Method m : methods) out.push_back(compare_scores(find_scores(scores, m), ref));
  return out;
}

}  // namespace

std::vector<ScoreVector> score_history(std::span<const Method> methods, std::span<const RoundTranscript> history,
                                       const ModelEvaluator& v, RoundCombine combine, const Federation* federation,
                                       CostAudit* audit, EfficiencyTarget target) {
  if (history.empty()) throw std::invalid_argument("score_history needs at least one round");
  const RoundTranscript& last = history.back();
  const int n = last.n_clients();
  if (audit) audit->n_clients = n;

  std::optional<RoundUtilities> u;
  if (std::any_of(methods.begin(), methods.end(), uses_round_utilities)) {
    auto oracle = round_oracle(last, v);
    u = with_target(utilities_from_oracle(oracle), target);
    if (audit) audit->secure_calls.push_back(oracle.call_count());
  }
  std::optional<ScoreVector> mrsv;

  std::vector<ScoreVector> out;
  for (Method m : methods) {
    ScoreVector s;
    switch (m) {
      case Method::kLOO:
        s = loo(*u);
        break;
      case Method::kIOI:
        s = ioi(*u);
        break;
      case Method::kFP:
        s = fp(*u);
        break;
      case Method::kEE:
        s = ee(*u);
        break;
      case Method::kCOS:
        s = cos_accumulated(history);
        break;
      case Method::kMRSV:
        if (!mrsv) {
          auto mr = mr_shapley(history, v, combine);
          if (audit)
            audit->mrsv_calls.insert(audit->mrsv_calls.end(), mr.evaluations_per_round.begin(),
                                     mr.evaluations_per_round.end());
          mrsv = std::move(mr.scores);
        }
        s = *mrsv;
        break;
      case Method::kSV: {
        if (!federation) throw std::invalid_argument("true Shapley reference needs the federation");
        if (n > kTrueShapleyMaxClients)
          throw std::invalid_argument("true Shapley reference exceeds the retraining budget (N <= " +
                                      std::to_string(kTrueShapleyMaxClients) + ")");
        RetrainingGame game(*federation, static_cast<int>(history.size()));
        auto oracle = game.oracle();
        s = shapley_exact(oracle);
        break;
      }
      case Method::kBanzhaf:
        throw std::invalid_argument("Banzhaf is only available for explicit games");
    }
    s.round = last.round;
    out.push_back(std::move(s));
  }
  return out;
}

MetricSample compare_scores(const ScoreVector& method, const ScoreVector& reference) {
  const auto rc = rank_correlation(method.scores, reference.scores);
  return {l2_distance(method.scores, reference.scores), rc.spearman_phi.value, rc.kendall_kappa.value,
          rc.pearson_rho.value};
}

FidelityResult rank_fidelity(const Scenario& sc) {
  const auto all = with_reference(sc.methods, sc.reference);
  const auto repeats = static_cast<std::size_t>(sc.repeats);
  std::vector<std::vector<MetricSample>> samples(repeats);
  std::vector<CostAudit> audits(repeats);
  parallel_for(
      repeats,
      [&](std::size_t r) {
        Federation fed(repeat_config(sc, static_cast<int>(r)));
        const auto history = fed.run(sc.eval_round);
        const auto scores = score_history(all, history, fed.evaluator(), sc.mr_combine, &fed, &audits[r], sc.efficiency);
        samples[r] = compare_all(sc.methods, scores, sc.reference);
      },
      /*dynamic=*/true);
  FidelityResult result;
  result.reference = sc.reference;
  result.rows = rows_from(sc.methods, samples);
  for (const auto& a : audits) merge_audit(result.audit, a);
  return result;
}

std::vector<AblationRow> ablation(const Scenario& sc, AblationAxis axis, std::span<const double> values) {
  std::vector<AblationRow> out;
  if (axis != AblationAxis::kRound) {
    for (double value : values) {
      Scenario variant = sc;
      if (axis == AblationAxis::kClients) {
        variant.federation.n_clients = static_cast<int>(value);
        if (variant.federation.noise_rates) variant.federation.noise_rates.reset();
      } else {
        variant.federation.dirichlet_mu = value;
      }
      for (auto& row : rank_fidelity(variant).rows) out.push_back({value, std::move(row)});
    }
    return out;
  }

  int max_round = 0;
  for (double v : values) {
    const int r = static_cast<int>(v);
    if (r < 1 || r > sc.federation.rounds) throw std::invalid_argument("ablation round outside the federation");
    max_round = std::max(max_round, r);
  }
  const auto all = with_reference(sc.methods, sc.reference);
  const auto repeats = static_cast<std::size_t>(sc.repeats);
  // samples[value][repeat][method]
  std::vector<std::vector<std::vector<MetricSample>>> samples(values.size(),
                                                              std::vector<std::vector<MetricSample>>(repeats));
  parallel_for(
      repeats,
      [&](std::size_t r) {
        Federation fed(repeat_config(sc, static_cast<int>(r)));
        const auto history = fed.run(max_round);
        for (std::size_t k = 0; k < values.size(); ++k) {
          const auto prefix = std::span(history).first(static_cast<std::size_t>(values[k]));
          const auto scores = score_history(all, prefix, fed.evaluator(), sc.mr_combine, &fed, nullptr, sc.efficiency);
          samples[k][r] = compare_all(sc.methods, scores, sc.reference);
        }
      },
      /*dynamic=*/true);
  for (std::size_t k = 0; k < values.size(); ++k)
    for (auto& row : rows_from(sc.methods, samples[k])) out.push_back({values[k], std::move(row)});
  return out;
}

std::vector<double> aggregation_weights(std::span<const double> scores, bool* degenerate) {
  auto normalized = normalize_scores(scores);
  if (degenerate) *degenerate = normalized.degenerate;
  if (normalized.degenerate) return std::vector<double>(scores.size(), 1.0);
  auto& w = normalized.values;
  double sum = 0.0;
  for (auto& x : w) sum += (x = std::max(x, 0.0));
  const double mean = sum / static_cast<double>(w.size());
  for (auto& x : w) x /= mean;
  return w;
}

ModelParams aggregate(const RoundTranscript& t, std::span<const double> weights) {
  if (weights.size() != t.updates.size()) throw std::invalid_argument("one weight per client update required");
  ModelParams model = t.m0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] == 1.0)
      model += t.updates[i].delta;
    else
      model.add_scaled(t.updates[i].delta, weights[i]);
  }
  return model;
}

std::vector<WeightedCurve> weighted_trajectories(const Federation& fed, std::span<const Method> methods, int rounds,
                                                 RoundCombine combine, EfficiencyTarget target) {
  const auto n = static_cast<std::size_t>(fed.config().n_clients);
  const ModelEvaluator neg_loss = make_evaluator(fed.test(), fed.shape(), UtilityKind::kNegLoss);
  const ModelEvaluator& v = fed.evaluator();

  std::vector<WeightedCurve> curves;
  curves.push_back({"FedAvg", {}, 0});
  for (Method m : methods) curves.push_back({std::string(method_label(m)), {}, 0});

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const bool weighted = c > 0;  // curve 0 is plain FedAvg
    const Method m = weighted ? methods[c - 1] : Method::kLOO;
    ModelParams global = fed.initial_model();
    std::vector<double> cos_total(n, 0.0), sv_total(n, 0.0);
    for (int r = 1; r <= rounds; ++r) {
      const auto t = fed.train_round(global, r);
      std::vector<double> weights(n, 1.0);
      if (weighted) {
        std::vector<double> scores;
        switch (m) {
          case Method::kLOO:
            scores = loo(with_target(utilities_from_transcript(t, v), target)).scores;
            break;
          case Method::kIOI:
            scores = ioi(with_target(utilities_from_transcript(t, v), target)).scores;
            break;
          case Method::kFP:
            scores = fp(with_target(utilities_from_transcript(t, v), target)).scores;
            break;
          case Method::kEE:
            scores = ee(with_target(utilities_from_transcript(t, v), target)).scores;
            break;
          case Method::kCOS: {
            const auto s = cos_score(t);
            for (std::size_t i = 0; i < n; ++i) cos_total[i] += s[i];
            scores = cos_total;
            break;
          }
          case Method::kMRSV: {
            auto oracle = round_oracle(t, v);
            const auto s = shapley_exact(oracle);
            for (std::size_t i = 0; i < n; ++i) sv_total[i] += s[i];
            scores = sv_total;
            if (combine == RoundCombine::kMean)
              for (auto& x : scores) x /= static_cast<double>(r);
            break;
          }
          default:
            throw std::invalid_argument("weighted aggregation does not support " +
                                        std::string(method_label(m)));
        }
        bool degenerate = false;
        weights = aggregation_weights(scores, &degenerate);
        if (degenerate) ++curves[c].degenerate_rounds;
      }
      global = aggregate(t, weights);
      curves[c].neg_loss.push_back(neg_loss(global));
    }
  }
  return curves;
}

WeightedAggregationResult weighted_aggregation(const Scenario& sc) {
  if (!sc.weighted_aggregation) throw std::invalid_argument("scenario has no [weighted_aggregation] block");
  const auto& block = *sc.weighted_aggregation;
  WeightedAggregationResult result;
  result.per_seed.resize(static_cast<std::size_t>(sc.repeats));
  parallel_for(
      result.per_seed.size(),
      [&](std::size_t r) {
        FederationConfig cfg = repeat_config(sc, static_cast<int>(r));
        cfg.partition = PartitionKind::kIid;
        cfg.noise_rates = block.noise_rates.value_or(linear_noise_rates(cfg.n_clients));
        Federation fed(cfg);
        result.per_seed[r] = weighted_trajectories(fed, block.methods, cfg.rounds, sc.mr_combine, sc.efficiency);
      },
      /*dynamic=*/true);
  return result;
}

MisbehaviorResult misbehavior(const Scenario& sc) {
  if (!sc.misbehavior) throw std::invalid_argument("scenario has no [misbehavior] block");
  const auto& block = *sc.misbehavior;
  const auto repeats = static_cast<std::size_t>(sc.repeats);
  std::vector<std::vector<ScoreVector>> runs(repeats);
  parallel_for(
      repeats,
      [&](std::size_t r) {
        FederationConfig cfg = repeat_config(sc, static_cast<int>(r));
        cfg.partition = PartitionKind::kIid;
        std::vector<double> rates(static_cast<std::size_t>(cfg.n_clients), 0.0);
        rates[static_cast<std::size_t>(block.attacker)] = block.attacker_rate;
        cfg.noise_rates = rates;
        Federation fed(cfg);
        const auto history = fed.run(sc.eval_round);
        runs[r] = score_history(block.methods, history, fed.evaluator(), sc.mr_combine, &fed, nullptr, sc.efficiency);
      },
      /*dynamic=*/true);
  MisbehaviorResult result;
  result.attacker = block.attacker;
  for (std::size_t k = 0; k < block.methods.size(); ++k) {
    DetectionRow row;
    row.method = block.methods[k];
    std::vector<ScoreVector> per_method;
    for (const auto& run : runs) {
      per_method.push_back(run[k]);
      row.attacker_normalized.push_back(normalize_scores(run[k]).values[static_cast<std::size_t>(block.attacker)]);
    }
    row.detection_rate = detection_rate(per_method, block.attacker);
    result.rows.push_back(std::move(row));
  }
  return result;
}

InfluenceMatrix mean_influence(const Scenario& sc) {
  const auto repeats = static_cast<std::size_t>(sc.repeats);
  const bool normalize = sc.influence ? sc.influence->normalize : true;
  std::vector<InfluenceMatrix> per_seed(repeats);
  parallel_for(
      repeats,
      [&](std::size_t r) {
        Federation fed(repeat_config(sc, static_cast<int>(r)));
        const auto history = fed.run(sc.eval_round);
        per_seed[r] = influence_matrix(with_target(utilities_from_transcript(history.back(), fed.evaluator()), sc.efficiency), normalize);
      },
      /*dynamic=*/true);
  InfluenceMatrix mean = per_seed.front();
  for (std::size_t r = 1; r < repeats; ++r) {
    for (std::size_t k = 0; k < mean.entries.size(); ++k) mean.entries[k] += per_seed[r].entries[k];
    for (std::size_t j = 0; j < mean.column_flagged.size(); ++j)
      mean.column_flagged[j] = mean.column_flagged[j] || per_seed[r].column_flagged[j];
  }
  for (auto& e : mean.entries) e /= static_cast<double>(repeats);
  return mean;
}

std::vector<ManipulationReport> manipulation_study(const Scenario& sc) {
  if (!sc.manipulation) throw std::invalid_argument("scenario has no [manipulation] block");
  const auto& block = *sc.manipulation;
  const auto repeats = static_cast<std::size_t>(sc.repeats);
  std::vector<std::vector<ManipulationReport>> per_seed(repeats);
  parallel_for(
      repeats,
      [&](std::size_t r) {
        Federation fed(repeat_config(sc, static_cast<int>(r)));
        const auto history = fed.run(sc.eval_round);
        const auto u = with_target(utilities_from_transcript(history.back(), fed.evaluator()), sc.efficiency);
        std::vector<MisreportStrategy> strategies;
        for (const auto& spec : block.strategies) strategies.push_back(spec.resolve(u));
        for (ScorerKind scorer : block.scorers) per_seed[r].push_back(manipulation_sweep(u, strategies, scorer));
      },
      /*dynamic=*/true);
  std::vector<ManipulationReport> out;
  for (auto& reports : per_seed)
    for (auto& rep : reports) out.push_back(std::move(rep));
  return out;
}

double quantile(std::vector<double> x, double q) {
  if (x.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(x.begin(), x.end());
  const double pos = q * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

Table fidelity_table(const FidelityResult& r) {
  Table t("rank_fidelity", {"method", "reference", "l2_mean", "l2_sample_var", "spearman_mean", "spearman_sample_var",
                            "kendall_mean", "kendall_sample_var", "pearson_mean", "pearson_sample_var"});
  for (const auto& row : r.rows)
    t.add_row({std::string(method_label(row.method)), std::string(method_label(r.reference)), row.l2.mean,
               row.l2.sample_variance, row.spearman.mean, row.spearman.sample_variance, row.kendall.mean,
               row.kendall.sample_variance, row.pearson.mean, row.pearson.sample_variance});
  return t;
}

Table fidelity_seed_table(const FidelityResult& r) {
  Table t("rank_fidelity_per_seed", {"method", "repeat", "l2", "spearman", "kendall", "pearson"});
  for (const auto& row : r.rows)
    for (std::size_t k = 0; k < row.per_seed.size(); ++k) {
      const auto& s = row.per_seed[k];
      t.add_row({std::string(method_label(row.method)), static_cast<long long>(k), s.l2, s.spearman, s.kendall,
                 s.pearson});
    }
  return t;
}

Table ablation_table(AblationAxis axis, const std::vector<AblationRow>& rows) {
  const char* axis_name = axis == AblationAxis::kRound ? "round" : axis == AblationAxis::kClients ? "n_clients" : "mu";
  Table t("ablation", {axis_name, "method", "l2_mean", "l2_sample_var", "spearman_mean", "spearman_sample_var",
                       "kendall_mean", "kendall_sample_var", "pearson_mean", "pearson_sample_var"});
  for (const auto& a : rows) {
    const auto& row = a.row;
    t.add_row({a.value, std::string(method_label(row.method)), row.l2.mean, row.l2.sample_variance, row.spearman.mean,
               row.spearman.sample_variance, row.kendall.mean, row.kendall.sample_variance, row.pearson.mean,
               row.pearson.sample_variance});
  }
  return t;
}

Table influence_table(const InfluenceMatrix& m) {
  std::vector<std::string> columns = {"influencer"};
  for (int j = 0; j < m.n; ++j) columns.push_back("client_" + std::to_string(j));
  Table t("influence", columns);
  for (int i = 0; i < m.n; ++i) {
    std::vector<Table::Cell> row = {static_cast<long long>(i)};
    for (int j = 0; j < m.n; ++j) row.push_back(m(i, j));
    t.add_row(std::move(row));
  }
  std::vector<Table::Cell> flags = {std::string("flagged")};
  for (int j = 0; j < m.n; ++j) flags.push_back(static_cast<long long>(m.column_flagged[static_cast<std::size_t>(j)]));
  t.add_row(std::move(flags));
  return t;
}

Table manipulation_table(const std::vector<ManipulationReport>& reports) {
  Table t("manipulation", {"scorer", "strategy", "attacker", "attacker_delta", "attacker_numerator_delta",
                           "victim_delta_min", "victim_delta_max", "victim_delta_l2"});
  for (const auto& rep : reports)
    for (const auto& o : rep.outcomes) {
      double lo = 0.0, hi = 0.0, l2 = 0.0;
      bool first = true;
      for (std::size_t j = 0; j < o.victim_deltas.size(); ++j) {
        if (static_cast<int>(j) == o.strategy.target) continue;
        const double d = o.victim_deltas[j];
        lo = first ? d : std::min(lo, d);
        hi = first ? d : std::max(hi, d);
        first = false;
        l2 += d * d;
      }
      t.add_row({std::string(scorer_label(rep.scorer)), o.strategy.describe(),
                 static_cast<long long>(o.strategy.target), o.attacker_delta, o.attacker_numerator_delta, lo, hi,
                 std::sqrt(l2)});
    }
  return t;
}

Table weighted_curves_table(const WeightedAggregationResult& r) {
  Table t("weighted_curves", {"repeat", "weighting", "round", "neg_loss"});
  for (std::size_t rep = 0; rep < r.per_seed.size(); ++rep)
    for (const auto& c : r.per_seed[rep])
      for (std::size_t k = 0; k < c.neg_loss.size(); ++k)
        t.add_row({static_cast<long long>(rep), c.label, static_cast<long long>(k + 1), c.neg_loss[k]});
  return t;
}

Table weighted_summary_table(const WeightedAggregationResult& r) {
  Table t("weighted_summary", {"weighting", "round", "neg_loss_mean", "neg_loss_sample_var", "seeds_at_or_above_fedavg"});
  if (r.per_seed.empty()) return t;
  const auto& first = r.per_seed.front();
  for (std::size_t c = 0; c < first.size(); ++c) {
    for (std::size_t k = 0; k < first[c].neg_loss.size(); ++k) {
      std::vector<double> vals;
      long long wins = 0;
      for (const auto& seed : r.per_seed) {
        vals.push_back(seed[c].neg_loss[k]);
        if (seed[c].neg_loss[k] >= seed[0].neg_loss[k]) ++wins;
      }
      const auto s = summarize(vals);
      t.add_row({first[c].label, static_cast<long long>(k + 1), s.mean, s.sample_variance, wins});
    }
  }
  return t;
}

Table detection_table(const MisbehaviorResult& r) {
  Table t("detection", {"method", "attacker", "detection_rate", "attacker_norm_min", "attacker_norm_q1",
                        "attacker_norm_median", "attacker_norm_q3", "attacker_norm_max"});
  for (const auto& row : r.rows) {
    const auto& x = row.attacker_normalized;
    t.add_row({std::string(method_label(row.method)), static_cast<long long>(r.attacker), row.detection_rate,
               quantile(x, 0.0), quantile(x, 0.25), quantile(x, 0.5), quantile(x, 0.75), quantile(x, 1.0)});
  }
  return t;
}

ResultBundle run_scenario(const Scenario& sc) {
  ResultBundle bundle;
  nlohmann::ordered_json audit = nlohmann::ordered_json::object();
  if (sc.fidelity) {
    const auto r = rank_fidelity(sc);
    bundle.tables.push_back(fidelity_table(r));
    bundle.tables.push_back(fidelity_seed_table(r));
    const int n = r.audit.n_clients;
    const std::uint64_t secure_expected = 2 * static_cast<std::uint64_t>(n) + 2;
    const std::uint64_t mrsv_expected = std::uint64_t{1} << n;
    const bool secure_ok = std::all_of(r.audit.secure_calls.begin(), r.audit.secure_calls.end(),
                                       [&](auto c) { return c == secure_expected; });
    const bool mrsv_ok = std::all_of(r.audit.mrsv_calls.begin(), r.audit.mrsv_calls.end(),
                                     [&](auto c) { return c == mrsv_expected; });
    audit["n_clients"] = n;
    audit["secure_calls_expected"] = secure_expected;
    audit["secure_calls"] = r.audit.secure_calls;
    audit["mrsv_calls_expected_per_round"] = mrsv_expected;
    audit["mrsv_calls_per_round"] = r.audit.mrsv_calls;
    audit["ok"] = secure_ok && mrsv_ok;
    if (!secure_ok || !mrsv_ok) throw std::logic_error("scorer cost audit failed");
  }
  if (sc.ablation) bundle.tables.push_back(ablation_table(sc.ablation->axis, ablation(sc, sc.ablation->axis, sc.ablation->values)));
  if (sc.influence) bundle.tables.push_back(influence_table(mean_influence(sc)));
  if (sc.manipulation) bundle.tables.push_back(manipulation_table(manipulation_study(sc)));
  if (sc.weighted_aggregation) {
    const auto r = weighted_aggregation(sc);
    bundle.tables.push_back(weighted_curves_table(r));
    bundle.tables.push_back(weighted_summary_table(r));
  }
  if (sc.misbehavior) bundle.tables.push_back(detection_table(misbehavior(sc)));
  bundle.audit_json = audit.dump(2) + "\n";
  return bundle;
}

void write_bundle(const std::filesystem::path& dir, const Scenario& sc, const ResultBundle& bundle) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json sums = nlohmann::ordered_json::object();
  nlohmann::ordered_json tables = nlohmann::ordered_json::array();
  auto emit = [&](const std::string& name, const std::string& bytes) {
    write_file(dir / name, bytes);
    sums[name] = sha256_hex(bytes);
  };
  emit("scenario.ini", sc.source_text);
  std::ostringstream seeds;
  seeds << "repeat,seed\n";
  for (int r = 0; r < sc.repeats; ++r) seeds << r << ',' << sc.repeat_seed(r) << '\n';
  emit("seeds.csv", seeds.str());
  for (const auto& t : bundle.tables) {
    emit(t.name() + ".csv", t.to_csv());
    emit(t.name() + ".json", t.to_json());
    tables.push_back(t.name());
  }
  emit("audit.json", bundle.audit_json);
  nlohmann::ordered_json manifest;
  manifest["format"] = "fedscore-bundle/1";
  manifest["scenario"] = sc.name;
  manifest["tables"] = std::move(tables);
  manifest["sha256"] = std::move(sums);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

std::filesystem::path timestamped_dir(const std::filesystem::path& root, const std::string& name) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  std::ostringstream os;
  os << name << '-' << std::put_time(&utc, "%Y%m%dT%H%M%SZ");
  auto dir = root / os.str();
  for (int k = 1; std::filesystem::exists(dir); ++k) dir = root / (os.str() + "-" + std::to_string(k));
  return dir;
}

}  // namespace fedscore
