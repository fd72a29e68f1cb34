#include "fedscore/kernels.hpp"

#include "fedscore/parallel.hpp"

namespace fedscore::kernels {

std::vector<double> shapley_weights(int n_clients) {
  // 1 / (N * C(N-1, s)); C is exact in double for N <= 20.
  std::vector<double> w(static_cast<std::size_t>(n_clients));
  double binom = 1.0;
  for (int s = 0; s < n_clients; ++s) {
    w[static_cast<std::size_t>(s)] = 1.0 / (static_cast<double>(n_clients) * binom);
    binom = binom * (n_clients - 1 - s) / (s + 1);
  }
  return w;
}

namespace {

double shapley_of(std::span<const double> values, int i, const std::vector<double>& w) {
  const std::uint32_t bit = 1u << i;
  double acc = 0.0;
  for (std::uint32_t m = 0; m < values.size(); ++m) {
    if (m & bit) continue;
    acc += w[static_cast<std::size_t>(std::popcount(m))] * (values[m | bit] - values[m]);
  }
  return acc;
}

double banzhaf_of(std::span<const double> values, int n, int i) {
  const std::uint32_t bit = 1u << i;
  double acc = 0.0;
  for (std::uint32_t m = 0; m < values.size(); ++m) {
    if (m & bit) continue;
    acc += values[m | bit] - values[m];
  }
  return acc / static_cast<double>(std::uint64_t{1} << (n - 1));
}

struct SampleResult {
  double loss;
  bool correct;
};

SampleResult evaluate_sample(const MlpShape& shape, const ModelParams& params, const LabeledDataset& data,
                             std::size_t i) {
  bool correct = false;
  const double loss = sample_loss(shape, params.values(), data.row(i), data.labels[i], &correct);
  return {loss, correct};
}

Evaluation reduce(const std::vector<SampleResult>& per_sample) {
  Evaluation e;
  if (per_sample.empty()) return e;
  double loss = 0.0;
  std::size_t hits = 0;
  for (const auto& r : per_sample) {
    loss += r.loss;
    hits += r.correct ? 1 : 0;
  }
  e.mean_loss = loss / static_cast<double>(per_sample.size());
  e.accuracy = static_cast<double>(hits) / static_cast<double>(per_sample.size());
  return e;
}

}  // namespace

namespace serial {

std::vector<double> tabulate(CoalitionOracle& oracle) {
  const std::size_t count = std::size_t{1} << oracle.n_clients();
  std::vector<double> values(count);
  for (std::size_t m = 0; m < count; ++m) values[m] = oracle(Coalition(static_cast<std::uint32_t>(m)));
  return values;
}

std::vector<double> shapley_from_table(std::span<const double> values, int n_clients) {
  const auto w = shapley_weights(n_clients);
  std::vector<double> out(static_cast<std::size_t>(n_clients));
  for (int i = 0; i < n_clients; ++i) out[static_cast<std::size_t>(i)] = shapley_of(values, i, w);
  return out;
}

std::vector<double> banzhaf_from_table(std::span<const double> values, int n_clients) {
  std::vector<double> out(static_cast<std::size_t>(n_clients));
  for (int i = 0; i < n_clients; ++i) out[static_cast<std::size_t>(i)] = banzhaf_of(values, n_clients, i);
  return out;
}

Evaluation evaluate_mlp(const MlpShape& shape, const ModelParams& params, const LabeledDataset& data) {
  std::vector<SampleResult> per_sample(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) per_sample[i] = evaluate_sample(shape, params, data, i);
  return reduce(per_sample);
}

}  // namespace serial

namespace parallel {

std::vector<double> tabulate(CoalitionOracle& oracle) {
  const std::size_t count = std::size_t{1} << oracle.n_clients();
  std::vector<double> values(count);
  parallel_for(
      count, [&](std::size_t m) { values[m] = oracle(Coalition(static_cast<std::uint32_t>(m))); },
      /*dynamic=*/true);
  return values;
}

std::vector<double> shapley_from_table(std::span<const double> values, int n_clients) {
  const auto w = shapley_weights(n_clients);
  std::vector<double> out(static_cast<std::size_t>(n_clients));
  parallel_for(out.size(), [&](std::size_t i) { out[i] = shapley_of(values, static_cast<int>(i), w); });
  return out;
}

std::vector<double> banzhaf_from_table(std::span<const double> values, int n_clients) {
  std::vector<double> out(static_cast<std::size_t>(n_clients));
  parallel_for(out.size(), [&](std::size_t i) { out[i] = banzhaf_of(values, n_clients, static_cast<int>(i)); });
  return out;
}

Evaluation evaluate_mlp(const MlpShape& shape, const ModelParams& params, const LabeledDataset& data) {
  std::vector<SampleResult> per_sample(data.size());
  parallel_for(data.size(), [&](std::size_t i) { per_sample[i] = evaluate_sample(shape, params, data, i); });
  return reduce(per_sample);
}

}  // namespace parallel

}  // namespace fedscore::kernels
