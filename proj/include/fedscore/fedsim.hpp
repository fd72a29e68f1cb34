#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedscore/data.hpp"
#include "fedscore/model.hpp"
#include "fedscore/transcript.hpp"

namespace fedscore {

enum class PartitionKind { kDirichlet, kIid };

struct DatasetConfig {
  int n_classes = 4;
  int dim = 8;
  int samples_per_client = 60;
  int test_samples_per_class = 50;
  double separation = 1.5;
  std::uint64_t means_seed = 2024;
};

struct FederationConfig {
  int n_clients = 9;
  PartitionKind partition = PartitionKind::kDirichlet;
  double dirichlet_mu = 0.5;
  int rounds = 10;
  int local_epochs = 2;
  double lr = 0.1;
  int batch_size = 16;
  int hidden = 32;
  std::uint64_t seed = 1;
  std::optional<std::vector<double>> noise_rates;
  FlipMode flip_mode = FlipMode::kUniformOther;
  UtilityKind utility = UtilityKind::kNegLoss;
  DatasetConfig dataset;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  SyntheticSpec synthetic_spec() const;
  MlpShape shape() const { return {dataset.dim, hidden, dataset.n_classes}; }
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, int round) : std::runtime_error(what), round_(round) {}
  int round() const { return round_; }

 private:
  int round_;
};

/// Mini-batch SGD on mean softmax cross-entropy. Batches are drawn from a
/// per-epoch shuffle seeded by `seed`. Throws TrainingDiverged (with `round`)
/// when the loss becomes non-finite.
ModelParams local_train(const MlpShape& shape, const ModelParams& m0, const LabeledDataset& data, int epochs,
                        double lr, int batch_size, std::uint64_t seed, int round = 0);

/// v(model) = accuracy or negative mean cross-entropy on `test`.
ModelEvaluator make_evaluator(LabeledDataset test, const MlpShape& shape, UtilityKind kind);

/// Deterministic cross-silo federation: synthetic data, partition, optional
/// label noise, shared initial model. Local training within a round runs in
/// parallel over clients.
class Federation {
 public:
  explicit Federation(FederationConfig config);

  const FederationConfig& config() const { return config_; }
  const MlpShape& shape() const { return shape_; }
  const LabeledDataset& test() const { return test_; }
  const std::vector<LabeledDataset>& shards() const { return shards_; }
  const ModelParams& initial_model() const { return initial_; }
  const ModelEvaluator& evaluator() const { return evaluator_; }

  /// Client seed for one round; independent of which other clients take part.
  std::uint64_t client_seed(int client, int round) const;

  /// Every participant trains from m0; U_i = (M_i − m0)/|participants| and
  /// m = m0 + Σ U_i (summed in participant order).
  RoundTranscript train_round(const ModelParams& m0, int round, std::span<const int> participants) const;
  RoundTranscript train_round(const ModelParams& m0, int round) const;

  /// Plain FedAvg for `rounds` rounds (config().rounds when omitted).
  std::vector<RoundTranscript> run(std::optional<int> rounds = std::nullopt) const;

  /// Final model of a federation restricted to `coalition` (scaling 1/|S|).
  /// The empty coalition yields the initial model.
  ModelParams train_coalition(Coalition coalition, int rounds) const;

 private:
  FederationConfig config_;
  MlpShape shape_;
  LabeledDataset test_;
  std::vector<LabeledDataset> shards_;
  ModelParams initial_;
  ModelEvaluator evaluator_;
};

struct FederationRun {
  std::vector<RoundTranscript> transcripts;
  LabeledDataset test;
};

FederationRun run_federation(const FederationConfig& config);

/// Coalition utility from retraining a fresh federation on the coalition's
/// clients. Memoized per coalition; safe to evaluate concurrently.
class RetrainingGame {
 public:
  RetrainingGame(const Federation& federation, int rounds);

  int n_clients() const { return federation_.config().n_clients; }
  double value(Coalition s);
  std::size_t trained_coalitions() const;

  /// The game must outlive the oracle.
  CoalitionOracle oracle();

 private:
  const Federation& federation_;
  int rounds_;
  mutable std::mutex mutex_;
  std::map<std::uint32_t, double> memo_;
};

}  // namespace fedscore
