#include "fedscore/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "fedscore/random.hpp"

namespace fedscore {

void LabeledDataset::push_back(std::span<const double> x, int label) {
  if (static_cast<int>(x.size()) != dim) throw std::invalid_argument("feature row has wrong dimension");
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(label);
}

void LabeledDataset::validate() const {
  if (features.size() != labels.size() * static_cast<std::size_t>(dim))
    throw std::invalid_argument("dataset feature/label length mismatch");
  for (int y : labels)
    if (y < 0 || y >= n_classes) throw std::invalid_argument("dataset label " + std::to_string(y) + " out of range");
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
  for (int y : labels) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

LabeledDataset subset(const LabeledDataset& data, std::span<const std::size_t> indices) {
  LabeledDataset out{data.dim, data.n_classes, {}, {}};
  out.features.reserve(indices.size() * static_cast<std::size_t>(data.dim));
  out.labels.reserve(indices.size());
  for (auto i : indices) out.push_back(data.row(i), data.labels[i]);
  return out;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.n_classes < 2) throw std::invalid_argument("synthetic data needs at least 2 classes");
  if (spec.dim < 2) throw std::invalid_argument("synthetic data needs dim >= 2");
  if (spec.train_samples < 1 || spec.test_samples_per_class < 1)
    throw std::invalid_argument("synthetic data needs nonzero train and test sizes");

  const auto k = static_cast<std::size_t>(spec.n_classes);
  const auto d = static_cast<std::size_t>(spec.dim);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> means(k * d);
  {
    Rng rng(derive_seed(spec.means_seed, {stream::kClassMeans}));
    for (std::size_t c = 0; c < k; ++c) {
      double norm2 = 0.0;
      for (std::size_t q = 0; q < d; ++q) {
        means[c * d + q] = normal(rng);
        norm2 += means[c * d + q] * means[c * d + q];
      }
      const double scale = spec.separation / std::sqrt(norm2);
      for (std::size_t q = 0; q < d; ++q) means[c * d + q] *= scale;
    }
  }

  Rng rng(derive_seed(seed, {stream::kData}));
  std::vector<double> x(d);
  auto draw = [&](LabeledDataset& out, int label) {
    for (std::size_t q = 0; q < d; ++q) x[q] = means[static_cast<std::size_t>(label) * d + q] + normal(rng);
    out.push_back(x, label);
  };

  std::vector<int> train_labels(static_cast<std::size_t>(spec.train_samples));
  for (std::size_t i = 0; i < train_labels.size(); ++i) train_labels[i] = static_cast<int>(i % k);
  std::shuffle(train_labels.begin(), train_labels.end(), rng);

  SyntheticData out;
  out.train = {spec.dim, spec.n_classes, {}, {}};
  out.test = {spec.dim, spec.n_classes, {}, {}};
  for (int y : train_labels) draw(out.train, y);
  for (int c = 0; c < spec.n_classes; ++c)
    for (int s = 0; s < spec.test_samples_per_class; ++s) draw(out.test, c);
  return out;
}

namespace {

// Largest-remainder apportionment of `total` items by proportions p; ties in
// the fractional part go to the lower index.
std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& p) {
  std::vector<std::size_t> counts(p.size());
  std::vector<double> frac(p.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double exact = p[i] * static_cast<double>(total);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    frac[i] = exact - std::floor(exact);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return frac[a] > frac[b]; });
  for (std::size_t r = 0; assigned < total; ++r, ++assigned) ++counts[order[r % order.size()]];
  // Floating error can overshoot by a unit; trim from the largest.
  while (assigned > total) {
    auto it = std::max_element(counts.begin(), counts.end());
    --*it;
    --assigned;
  }
  return counts;
}

std::vector<double> dirichlet(Rng& rng, std::size_t n, double mu) {
  std::gamma_distribution<double> gamma(mu, 1.0);
  std::vector<double> p(n);
  double sum = 0.0;
  for (auto& v : p) sum += (v = gamma(rng));
  if (!(sum > 0.0)) {
    // All draws underflowed (tiny mu): the limit puts all mass on one client.
    std::fill(p.begin(), p.end(), 0.0);
    p[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)] = 1.0;
    return p;
  }
  for (auto& v : p) v /= sum;
  return p;
}

}  // namespace

std::vector<LabeledDataset> dirichlet_partition(const LabeledDataset& train, int n_clients, double mu,
                                                std::uint64_t seed) {
  if (n_clients < 1) throw std::invalid_argument("partition needs at least one client");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("Dirichlet concentration must be > 0");
  if (train.size() < static_cast<std::size_t>(n_clients))
    throw std::invalid_argument("cannot give each of " + std::to_string(n_clients) + " clients a sample from " +
                                std::to_string(train.size()) + " samples");
  const auto n = static_cast<std::size_t>(n_clients);
  const auto counts = train.class_counts();
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] < n)
      throw std::invalid_argument("class " + std::to_string(c) + " has " + std::to_string(counts[c]) +
                                  " samples, fewer than the " + std::to_string(n) + " clients");

  std::vector<std::vector<std::size_t>> by_class(counts.size());
  for (std::size_t i = 0; i < train.size(); ++i) by_class[static_cast<std::size_t>(train.labels[i])].push_back(i);

  Rng rng(derive_seed(seed, {stream::kPartition}));
  std::vector<std::vector<std::size_t>> shards;
  bool ok = false;
  for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
    shards.assign(n, {});
    for (auto members : by_class) {
      std::shuffle(members.begin(), members.end(), rng);
      const auto alloc = apportion(members.size(), dirichlet(rng, n, mu));
      std::size_t pos = 0;
      for (std::size_t client = 0; client < n; ++client)
        for (std::size_t r = 0; r < alloc[client]; ++r) shards[client].push_back(members[pos++]);
    }
    ok = std::none_of(shards.begin(), shards.end(), [](const auto& s) { return s.empty(); });
  }
  if (!ok) {
    for (auto& shard : shards) {
      if (!shard.empty()) continue;
      auto largest = std::max_element(shards.begin(), shards.end(),
                                      [](const auto& a, const auto& b) { return a.size() < b.size(); });
      shard.push_back(largest->back());
      largest->pop_back();
    }
  }

  std::vector<LabeledDataset> out;
  out.reserve(n);
  for (auto& shard : shards) {
    std::sort(shard.begin(), shard.end());
    out.push_back(subset(train, shard));
  }
  return out;
}

std::vector<LabeledDataset> iid_partition(const LabeledDataset& train, int n_clients, std::uint64_t seed) {
  if (n_clients < 1) throw std::invalid_argument("partition needs at least one client");
  if (train.size() < static_cast<std::size_t>(n_clients))
    throw std::invalid_argument("fewer samples than clients");
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, {stream::kPartition}));
  std::shuffle(order.begin(), order.end(), rng);
  const auto n = static_cast<std::size_t>(n_clients);
  std::vector<LabeledDataset> out;
  out.reserve(n);
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t begin = c * order.size() / n;
    const std::size_t end = (c + 1) * order.size() / n;
    std::vector<std::size_t> shard(order.begin() + static_cast<long>(begin), order.begin() + static_cast<long>(end));
    std::sort(shard.begin(), shard.end());
    out.push_back(subset(train, shard));
  }
  return out;
}

LabeledDataset flip_labels(const LabeledDataset& data, double rate, std::uint64_t seed, FlipMode mode) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("flip rate must lie in [0, 1]");
  if (data.n_classes < 2) throw std::invalid_argument("label flipping needs at least 2 classes");
  LabeledDataset out = data;
  if (rate == 0.0) return out;
  Rng rng(seed);
  std::bernoulli_distribution flip(rate);
  std::uniform_int_distribution<int> other(1, data.n_classes - 1);
  for (auto& y : out.labels) {
    if (!flip(rng)) continue;
    const int shift = mode == FlipMode::kTargeted ? 1 : other(rng);
    y = (y + shift) % data.n_classes;
  }
  return out;
}

void write_dataset_csv(std::ostream& out, const LabeledDataset& data) {
  for (int q = 0; q < data.dim; ++q) out << 'x' << q << ',';
  out << "label\n";
  char buf[64];
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.row(i)) {
      auto r = std::to_chars(buf, buf + sizeof buf, v);
      out << std::string_view(buf, r.ptr - buf) << ',';
    }
    out << data.labels[i] << '\n';
  }
}

LabeledDataset read_dataset_csv(std::istream& in, int n_classes) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("dataset CSV is empty");
  const auto columns = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
  LabeledDataset out{columns - 1, n_classes, {}, {}};
  if (out.dim < 1) throw std::invalid_argument("dataset CSV has no feature columns");
  std::vector<double> row(static_cast<std::size_t>(out.dim));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (auto& v : row) {
      auto r = std::from_chars(p, end, v);
      if (r.ec != std::errc() || r.ptr == end || *r.ptr != ',')
        throw std::invalid_argument("dataset CSV line " + std::to_string(line_no) + ": bad feature");
      p = r.ptr + 1;
    }
    int label = 0;
    auto r = std::from_chars(p, end, label);
    if (r.ec != std::errc()) throw std::invalid_argument("dataset CSV line " + std::to_string(line_no) + ": bad label");
    out.push_back(row, label);
  }
  out.validate();
  return out;
}

}  // namespace fedscore
