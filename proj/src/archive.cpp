#include "fedscore/archive.hpp"

#include <bit>
#include <cstring>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "fedscore/io.hpp"
#include "json.hpp"

namespace fedscore {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kFormat = "fedscore-transcripts/1";

void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t u64() {
    if (pos_ + 8 > bytes_.size()) throw std::invalid_argument("transcript blob is truncated");
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(b)])) << (8 * b);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

void put_model(std::string& out, const ModelParams& m) {
  put_u64(out, m.dim());
  for (double v : m.values()) put_f64(out, v);
}

ModelParams get_model(Reader& r) {
  const auto dim = r.u64();
  if (dim > (std::uint64_t{1} << 32)) throw std::invalid_argument("implausible model dimension in transcript blob");
  std::vector<double> values(dim);
  for (auto& v : values) v = r.f64();
  return ModelParams(std::move(values));
}

std::string round_file(int round) {
  std::ostringstream os;
  os << "round_" << std::setw(4) << std::setfill('0') << round << ".bin";
  return os.str();
}

const char* partition_label(PartitionKind k) { return k == PartitionKind::kIid ? "iid" : "dirichlet"; }

}  // namespace

std::string config_to_json(const FederationConfig& c) {
  json j;
  j["n_clients"] = c.n_clients;
  j["partition"] = partition_label(c.partition);
  j["dirichlet_mu"] = c.dirichlet_mu;
  j["rounds"] = c.rounds;
  j["local_epochs"] = c.local_epochs;
  j["lr"] = c.lr;
  j["batch_size"] = c.batch_size;
  j["hidden"] = c.hidden;
  j["seed"] = c.seed;
  j["noise_rates"] = c.noise_rates ? json(*c.noise_rates) : json(nullptr);
  j["flip_mode"] = c.flip_mode == FlipMode::kTargeted ? "targeted" : "uniform_other";
  j["utility"] = utility_label(c.utility);
  j["dataset"] = {{"n_classes", c.dataset.n_classes},
                  {"dim", c.dataset.dim},
                  {"samples_per_client", c.dataset.samples_per_client},
                  {"test_samples_per_class", c.dataset.test_samples_per_class},
                  {"separation", c.dataset.separation},
                  {"means_seed", c.dataset.means_seed}};
  return j.dump(2) + "\n";
}

FederationConfig config_from_json(const std::string& text) {
  const auto j = json::parse(text);
  FederationConfig c;
  c.n_clients = j.at("n_clients").get<int>();
  c.partition = j.at("partition").get<std::string>() == "iid" ? PartitionKind::kIid : PartitionKind::kDirichlet;
  c.dirichlet_mu = j.at("dirichlet_mu").get<double>();
  c.rounds = j.at("rounds").get<int>();
  c.local_epochs = j.at("local_epochs").get<int>();
  c.lr = j.at("lr").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.hidden = j.at("hidden").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  if (!j.at("noise_rates").is_null()) c.noise_rates = j.at("noise_rates").get<std::vector<double>>();
  c.flip_mode = j.at("flip_mode").get<std::string>() == "targeted" ? FlipMode::kTargeted : FlipMode::kUniformOther;
  c.utility = parse_utility(j.at("utility").get<std::string>());
  const auto& d = j.at("dataset");
  c.dataset.n_classes = d.at("n_classes").get<int>();
  c.dataset.dim = d.at("dim").get<int>();
  c.dataset.samples_per_client = d.at("samples_per_client").get<int>();
  c.dataset.test_samples_per_class = d.at("test_samples_per_class").get<int>();
  c.dataset.separation = d.at("separation").get<double>();
  c.dataset.means_seed = d.at("means_seed").get<std::uint64_t>();
  c.validate();
  return c;
}

std::string encode_transcript(const RoundTranscript& t) {
  t.validate();
  std::string out;
  put_u64(out, static_cast<std::uint64_t>(t.round));
  put_u64(out, t.updates.size());
  put_model(out, t.m0);
  for (const auto& u : t.updates) put_model(out, u.delta);
  put_model(out, t.m);
  return out;
}

RoundTranscript decode_transcript(std::string_view bytes) {
  Reader r(bytes);
  RoundTranscript t;
  t.round = static_cast<int>(r.u64());
  const auto n = r.u64();
  if (n == 0 || n > 64) throw std::invalid_argument("implausible client count in transcript blob");
  t.m0 = get_model(r);
  for (std::uint64_t i = 0; i < n; ++i) t.updates.push_back({static_cast<int>(i), get_model(r)});
  t.m = get_model(r);
  if (!r.done()) throw std::invalid_argument("trailing bytes in transcript blob");
  t.validate();
  return t;
}

ModelEvaluator TranscriptArchive::evaluator() const { return make_evaluator(test, config.shape(), config.utility); }

void write_transcript_archive(const std::filesystem::path& dir, const TranscriptArchive& archive) {
  std::filesystem::create_directories(dir);
  json files = json::object();
  auto emit = [&](const std::string& name, const std::string& bytes) {
    write_file(dir / name, bytes);
    files[name] = sha256_hex(bytes);
  };
  emit("config.json", config_to_json(archive.config));
  std::ostringstream test_csv;
  write_dataset_csv(test_csv, archive.test);
  emit("test.csv", test_csv.str());
  json rounds = json::array();
  for (const auto& t : archive.transcripts) {
    const auto name = round_file(t.round);
    emit(name, encode_transcript(t));
    rounds.push_back({{"round", t.round}, {"file", name}});
  }
  json manifest;
  manifest["format"] = kFormat;
  manifest["n_clients"] = archive.config.n_clients;
  manifest["dim"] = archive.config.shape().param_count();
  manifest["rounds"] = std::move(rounds);
  manifest["sha256"] = std::move(files);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

TranscriptArchive read_transcript_archive(const std::filesystem::path& dir) {
  const auto manifest = json::parse(read_file(dir / "manifest.json"));
  if (manifest.value("format", "") != kFormat)
    throw std::invalid_argument("'" + dir.string() + "' is not a transcript archive");
  auto load = [&](const std::string& name) {
    auto bytes = read_file(dir / name);
    const auto& sums = manifest.at("sha256");
    if (!sums.contains(name) || sums.at(name).get<std::string>() != sha256_hex(bytes))
      throw std::runtime_error("checksum mismatch for '" + name + "' in " + dir.string());
    return bytes;
  };
  TranscriptArchive a;
  a.config = config_from_json(load("config.json"));
  std::istringstream test_csv(load("test.csv"));
  a.test = read_dataset_csv(test_csv, a.config.dataset.n_classes);
  for (const auto& entry : manifest.at("rounds")) {
    auto t = decode_transcript(load(entry.at("file").get<std::string>()));
    if (t.n_clients() != a.config.n_clients) throw std::invalid_argument("transcript client count disagrees with config");
    a.transcripts.push_back(std::move(t));
  }
  return a;
}

}  // namespace fedscore
