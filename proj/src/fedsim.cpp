#include "fedscore/fedsim.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "fedscore/parallel.hpp"
#include "fedscore/random.hpp"

namespace fedscore {

void FederationConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument("invalid field '" + field + "': " + why);
  };
  if (n_clients < 1) fail("n_clients", "must be >= 1");
  if (n_clients > kMaxGameClients) fail("n_clients", "must be <= " + std::to_string(kMaxGameClients));
  if (!(dirichlet_mu > 0.0) || !std::isfinite(dirichlet_mu)) fail("dirichlet_mu", "must be > 0");
  if (rounds < 1) fail("rounds", "must be >= 1");
  if (local_epochs < 0) fail("local_epochs", "must be >= 0");
  if (!(lr > 0.0) || !std::isfinite(lr)) fail("lr", "must be > 0");
  if (batch_size < 1) fail("batch_size", "must be >= 1");
  if (hidden < 1) fail("hidden", "must be >= 1");
  if (noise_rates) {
    if (noise_rates->size() != static_cast<std::size_t>(n_clients))
      fail("noise_rates", "needs one rate per client (" + std::to_string(n_clients) + "), got " +
                              std::to_string(noise_rates->size()));
    for (double r : *noise_rates)
      if (!(r >= 0.0 && r <= 1.0)) fail("noise_rates", "rates must lie in [0, 1]");
  }
  if (dataset.n_classes < 2) fail("n_classes", "must be >= 2");
  if (dataset.dim < 2) fail("dim", "must be >= 2");
  if (dataset.samples_per_client < 1) fail("samples_per_client", "must be >= 1");
  if (dataset.test_samples_per_class < 1) fail("test_samples_per_class", "must be >= 1");
  if (!(dataset.separation >= 0.0)) fail("separation", "must be >= 0");
}

SyntheticSpec FederationConfig::synthetic_spec() const {
  SyntheticSpec spec;
  spec.n_classes = dataset.n_classes;
  spec.dim = dataset.dim;
  spec.train_samples = dataset.samples_per_client * n_clients;
  spec.test_samples_per_class = dataset.test_samples_per_class;
  spec.separation = dataset.separation;
  spec.means_seed = dataset.means_seed;
  return spec;
}

ModelParams local_train(const MlpShape& shape, const ModelParams& m0, const LabeledDataset& data, int epochs,
                        double lr, int batch_size, std::uint64_t seed, int round) {
  if (data.empty()) throw std::invalid_argument("local training needs a nonempty dataset");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  ModelParams params = m0;
  if (epochs <= 0) return params;
  Rng rng(seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(params.dim());
  const auto bs = static_cast<std::size_t>(batch_size);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t len = std::min(bs, order.size() - start);
      const double loss =
          loss_and_gradient(shape, params.values(), data, std::span(order).subspan(start, len), grad);
      if (!std::isfinite(loss))
        throw TrainingDiverged("local training diverged in round " + std::to_string(round), round);
      auto p = params.values();
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * grad[i];
    }
  }
  if (!params.all_finite())
    throw TrainingDiverged("local training diverged in round " + std::to_string(round), round);
  return params;
}

ModelEvaluator make_evaluator(LabeledDataset test, const MlpShape& shape, UtilityKind kind) {
  if (test.empty()) throw std::invalid_argument("evaluator needs a nonempty test set");
  auto data = std::make_shared<const LabeledDataset>(std::move(test));
  return [data, shape, kind](const ModelParams& model) { return utility(evaluate_mlp(shape, model, *data), kind, shape.n_classes); };
}

Federation::Federation(FederationConfig config) : config_(std::move(config)) {
  config_.validate();
  shape_ = config_.shape();
  auto data = generate_synthetic(config_.synthetic_spec(), config_.seed);
  test_ = std::move(data.test);
  shards_ = config_.partition == PartitionKind::kIid
                ? iid_partition(data.train, config_.n_clients, config_.seed)
                : dirichlet_partition(data.train, config_.n_clients, config_.dirichlet_mu, config_.seed);
  if (config_.noise_rates) {
    for (std::size_t i = 0; i < shards_.size(); ++i)
      shards_[i] = flip_labels(shards_[i], (*config_.noise_rates)[i],
                               derive_seed(config_.seed, {stream::kNoise, i}), config_.flip_mode);
  }
  initial_ = init_mlp(shape_, derive_seed(config_.seed, {stream::kInit}));
  evaluator_ = make_evaluator(test_, shape_, config_.utility);
}

std::uint64_t Federation::client_seed(int client, int round) const {
  return derive_seed(config_.seed,
                     {stream::kTrain, static_cast<std::uint64_t>(client), static_cast<std::uint64_t>(round)});
}

RoundTranscript Federation::train_round(const ModelParams& m0, int round, std::span<const int> participants) const {
  if (participants.empty()) throw std::invalid_argument("a round needs at least one participant");
  const double scale = 1.0 / static_cast<double>(participants.size());
  RoundTranscript t;
  t.round = round;
  t.m0 = m0;
  t.updates.resize(participants.size());
  parallel_for(
      participants.size(),
      [&](std::size_t k) {
        const int client = participants[k];
        ModelParams local = local_train(shape_, m0, shards_.at(static_cast<std::size_t>(client)),
                                        config_.local_epochs, config_.lr, config_.batch_size,
                                        client_seed(client, round), round);
        t.updates[k] = {client, (local - m0) * scale};
      },
      /*dynamic=*/true);
  t.m = m0;
  for (const auto& u : t.updates) t.m += u.delta;
  return t;
}

RoundTranscript Federation::train_round(const ModelParams& m0, int round) const {
  std::vector<int> all(static_cast<std::size_t>(config_.n_clients));
  std::iota(all.begin(), all.end(), 0);
  return train_round(m0, round, all);
}

std::vector<RoundTranscript> Federation::run(std::optional<int> rounds) const {
  const int total = rounds.value_or(config_.rounds);
  std::vector<RoundTranscript> out;
  out.reserve(static_cast<std::size_t>(total));
  ModelParams global = initial_;
  for (int r = 1; r <= total; ++r) {
    out.push_back(train_round(global, r));
    global = out.back().m;
  }
  return out;
}

ModelParams Federation::train_coalition(Coalition coalition, int rounds) const {
  if (!coalition.within(config_.n_clients)) throw std::invalid_argument("coalition exceeds federation clients");
  ModelParams global = initial_;
  if (coalition.is_empty()) return global;
  const auto members = coalition.members();
  for (int r = 1; r <= rounds; ++r) global = train_round(global, r, members).m;
  return global;
}

FederationRun run_federation(const FederationConfig& config) {
  Federation fed(config);
  return {fed.run(), fed.test()};
}

RetrainingGame::RetrainingGame(const Federation& federation, int rounds) : federation_(federation), rounds_(rounds) {
  if (rounds < 1) throw std::invalid_argument("retraining game needs at least one round");
}

double RetrainingGame::value(Coalition s) {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (auto it = memo_.find(s.mask()); it != memo_.end()) return it->second;
  }
  const double v = federation_.evaluator()(federation_.train_coalition(s, rounds_));
  std::lock_guard<std::mutex> lock(mutex_);
  return memo_.emplace(s.mask(), v).first->second;
}

std::size_t RetrainingGame::trained_coalitions() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return memo_.size();
}

CoalitionOracle RetrainingGame::oracle() {
  return CoalitionOracle(n_clients(), [this](Coalition s) { return value(s); });
}

}  // namespace fedscore
