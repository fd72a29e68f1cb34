#include <gtest/gtest.h>

#include <filesystem>

#include "fedscore/archive.hpp"
#include "fedscore/io.hpp"
#include "fedscore/scenario.hpp"
#include "fedscore/table.hpp"

using namespace fedscore;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("fedscore_test_" + name);
  fs::remove_all(dir);
  return dir;
}

FederationConfig tiny() {
  FederationConfig c;
  c.n_clients = 3;
  c.rounds = 2;
  c.local_epochs = 1;
  c.hidden = 4;
  c.dataset.samples_per_client = 20;
  c.dataset.test_samples_per_class = 5;
  return c;
}

std::string scenario_error(const std::string& text) {
  try {
    parse_scenario(text, "t.scenario");
  } catch (const ScenarioError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Io, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Io, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345678.9}) EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(ScoreCsv, RoundTrip) {
  std::vector<ScoreVector> s = {{Method::kFP, {0.1, 1.0 / 3.0}, 10}, {Method::kMRSV, {2.0, -1e-9}, std::nullopt}};
  const auto csv = score_vectors_csv(s);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "method,round,client_0,client_1");
  const auto back = parse_score_vectors_csv(csv);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].method, Method::kFP);
  EXPECT_EQ(back[0].round, 10);
  EXPECT_EQ(back[0].scores, s[0].scores);
  EXPECT_FALSE(back[1].round);
  EXPECT_EQ(back[1].scores, s[1].scores);
  EXPECT_NE(score_vectors_json(s).find("\"MR-SV\""), std::string::npos);
  EXPECT_THROW(parse_score_vectors_csv("x,y\n"), std::invalid_argument);
}

TEST(Table, CsvAndJson) {
  Table t("demo", {"name", "value", "count"});
  t.add_row({std::string("a"), 0.5, 3LL});
  EXPECT_EQ(t.to_csv(), "name,value,count\na,0.5,3\n");
  EXPECT_NE(t.to_json().find("\"table\": \"demo\""), std::string::npos);
}

TEST(Archive, TranscriptEncodingRoundTrip) {
  Federation fed(tiny());
  const auto t = fed.run(1).front();
  const auto bytes = encode_transcript(t);
  // u64 round, u64 n, then (n+2) x (u64 dim + dim f64)
  EXPECT_EQ(bytes.size(), 16 + 5 * (8 + 8 * t.m0.dim()));
  const auto back = decode_transcript(bytes);
  EXPECT_EQ(back.round, t.round);
  EXPECT_EQ(back.m0, t.m0);
  EXPECT_EQ(back.m, t.m);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(back.updates[i].delta, t.updates[i].delta);
  EXPECT_EQ(static_cast<unsigned char>(bytes[0]), 1u);  // little-endian round number
  EXPECT_THROW(decode_transcript(bytes.substr(0, bytes.size() - 1)), std::invalid_argument);
}

TEST(Archive, DirectoryRoundTripAndTamper) {
  const auto dir = scratch("archive");
  auto run = run_federation(tiny());
  TranscriptArchive a{tiny(), run.test, run.transcripts};
  write_transcript_archive(dir, a);
  const auto back = read_transcript_archive(dir);
  EXPECT_EQ(back.transcripts.size(), 2u);
  EXPECT_EQ(back.transcripts[1].m, a.transcripts[1].m);
  EXPECT_EQ(back.test.features, a.test.features);
  EXPECT_EQ(back.evaluator()(back.transcripts[1].m), a.evaluator()(a.transcripts[1].m));
  EXPECT_EQ(config_to_json(back.config), config_to_json(a.config));

  auto bytes = read_file(dir / "round_0001.bin");
  bytes[40] ^= 1;
  write_file(dir / "round_0001.bin", bytes);
  EXPECT_THROW(read_transcript_archive(dir), std::runtime_error);
  fs::remove_all(dir);
}

TEST(Scenario, ParsesAllSections) {
  const auto sc = parse_scenario(R"(
# comment
[scenario]
name = demo
eval_round = 3
repeats = 2
methods = LOO, FP, EE, COS
reference = MR-SV
[federation]
n_clients = 5
rounds = 4
partition = iid
seed = 99
utility = loss_gain
noise_rates = linear
[dataset]
dim = 6
[ablation]
axis = mu
values = 0.1, 1.0
[influence]
normalize = false
[manipulation]
strategies = deflate_to:1:v_empty, additive_bias:0:-0.5:without
[misbehavior]
attacker = 2
)");
  EXPECT_EQ(sc.name, "demo");
  EXPECT_EQ(sc.federation.n_clients, 5);
  EXPECT_EQ(sc.federation.seed, 99u);
  EXPECT_EQ(sc.federation.partition, PartitionKind::kIid);
  EXPECT_EQ(*sc.federation.noise_rates, (std::vector<double>{0, 0.25, 0.5, 0.75, 1.0}));
  EXPECT_EQ(sc.federation.dataset.dim, 6);
  EXPECT_EQ(sc.ablation->axis, AblationAxis::kMu);
  EXPECT_FALSE(sc.influence->normalize);
  ASSERT_EQ(sc.manipulation->strategies.size(), 2u);
  EXPECT_EQ(sc.manipulation->strategies[0].symbol, "v_empty");
  EXPECT_EQ(sc.manipulation->strategies[1].field, ReportField::kWithoutSelf);
  EXPECT_EQ(sc.misbehavior->attacker, 2);
  EXPECT_NE(sc.repeat_seed(0), sc.repeat_seed(1));
}

TEST(Scenario, ValidationErrorsNameFieldAndLine) {
  auto err = scenario_error("[scenario]\nrepeats = 2\n");
  EXPECT_NE(err.find("n_clients"), std::string::npos) << err;
  err = scenario_error("[federation]\nn_clients = 3\nlr = fast\n");
  EXPECT_NE(err.find("t.scenario:3"), std::string::npos) << err;
  EXPECT_NE(err.find("federation.lr"), std::string::npos) << err;
  err = scenario_error("[federation]\nn_clients = 3\ncolour = red\n");
  EXPECT_NE(err.find("federation.colour"), std::string::npos) << err;
  err = scenario_error("[nonsense]\n");
  EXPECT_FALSE(err.empty());
  err = scenario_error("[federation]\nn_clients = 3\n[misbehavior]\nattacker = 5\n");
  EXPECT_NE(err.find(":4:"), std::string::npos) << err;
  err = scenario_error("[federation]\nn_clients = 3\nrounds = 2\n[scenario]\neval_round = 5\n");
  EXPECT_NE(err.find("eval_round"), std::string::npos) << err;
}

TEST(Scenario, StrategyResolution) {
  const auto s = parse_strategy("deflate_to:1:v_grand:with");
  RoundUtilities u{0.1, 0.9, {0.2, 0.3}, {0.5, 0.6}};
  const auto r = s.resolve(u);
  EXPECT_EQ(r.kind, MisreportKind::kDeflateTo);
  EXPECT_EQ(r.target, 1);
  EXPECT_EQ(r.param, 0.9);
  EXPECT_EQ(r.field, ReportField::kWithSelf);
  EXPECT_THROW(parse_strategy("explode:1"), std::invalid_argument);
  EXPECT_EQ(linear_noise_rates(9)[1], 0.125);
  EXPECT_EQ(linear_noise_rates(1), std::vector<double>{0.0});
}
