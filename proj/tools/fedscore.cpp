// fedscore command-line harness.
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedscore/archive.hpp"
#include "fedscore/experiments.hpp"
#include "fedscore/io.hpp"
#include "fedscore/protocol.hpp"
#include "fedscore/scenario.hpp"
#include "fedscore/table.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace fedscore;

namespace {

constexpr const char* kSeedEnv = "FEDSCORE_SEED";

std::uint64_t parse_seed(const std::string& text, const std::string& source) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument(source + ": not a 64-bit seed: '" + text + "'");
  return v;
}

// Flag beats environment beats scenario file.
void apply_seed_override(Scenario& sc, const std::optional<std::string>& flag) {
  if (flag) {
    sc.federation.seed = parse_seed(*flag, "--seed");
  } else if (const char* env = std::getenv(kSeedEnv); env && *env) {
    sc.federation.seed = parse_seed(env, kSeedEnv);
  }
}

std::string table_of_scores(const std::vector<ScoreVector>& scores, bool json) {
  return json ? score_vectors_json(scores) : score_vectors_csv(scores);
}

const RoundTranscript& pick_round(const TranscriptArchive& a, std::optional<int> round) {
  if (a.transcripts.empty()) throw std::runtime_error("archive holds no rounds");
  if (!round) return a.transcripts.back();
  for (const auto& t : a.transcripts)
    if (t.round == *round) return t;
  throw std::runtime_error("round " + std::to_string(*round) + " not in archive");
}

std::span<const RoundTranscript> history_to(const TranscriptArchive& a, const RoundTranscript& last) {
  const auto idx = static_cast<std::size_t>(&last - a.transcripts.data());
  return std::span(a.transcripts).first(idx + 1);
}

// Splits one CSV line; bundle tables never quote commas.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

int cmd_report(const fs::path& dir, const fs::path& out_dir) {
  const auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  for (const auto& [name, sum] : manifest.at("sha256").items()) {
    if (sha256_hex(read_file(dir / name)) != sum.get<std::string>())
      throw std::runtime_error("checksum mismatch: " + (dir / name).string());
  }
  std::cout << "bundle " << dir.string() << " (" << manifest.value("scenario", "?") << "): checksums ok\n";
  for (const auto& t : manifest.at("tables")) std::cout << "  table " << t.get<std::string>() << '\n';

  const auto curves_path = dir / "weighted_curves.csv";
  if (!fs::exists(curves_path)) {
    std::cout << "no weighted_curves table; nothing to emit\n";
    return 0;
  }
  // weighting -> round -> repeat -> value
  std::map<std::string, std::map<long, std::map<long, std::string>>> curves;
  std::istringstream in(read_file(curves_path));
  std::string line;
  std::getline(in, line);
  if (line != "repeat,weighting,round,neg_loss") throw std::runtime_error("unexpected weighted_curves header");
  long max_repeat = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw std::runtime_error("malformed weighted_curves row: " + line);
    const long rep = std::stol(cells[0]);
    max_repeat = std::max(max_repeat, rep);
    curves[cells[1]][std::stol(cells[2])][rep] = cells[3];
  }
  fs::create_directories(out_dir);
  for (const auto& [label, rounds] : curves) {
    std::ostringstream os;
    os << "round";
    for (long r = 0; r <= max_repeat; ++r) os << ",repeat_" << r;
    os << ",mean\n";
    for (const auto& [round, reps] : rounds) {
      os << round;
      double sum = 0.0;
      for (long r = 0; r <= max_repeat; ++r) {
        const auto& v = reps.at(r);
        os << ',' << v;
        sum += std::stod(v);
      }
      os << ',' << format_double(sum / static_cast<double>(max_repeat + 1)) << '\n';
    }
    const auto path = out_dir / ("curve_" + label + ".csv");
    write_file(path, os.str());
    std::cout << "wrote " << path.string() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secure-aggregation-compatible contribution scoring for federated learning"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run a scenario and write a result bundle");
  std::string scenario_path;
  std::string out_root = "results";
  std::optional<std::string> seed_flag;
  std::optional<std::string> exact_dir;
  run->add_option("scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_root, "Root directory for timestamped bundles");
  run->add_option("--bundle", exact_dir, "Write the bundle to exactly this directory");
  run->add_option("--seed", seed_flag, std::string("Master seed (overrides ") + kSeedEnv + ")");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Train a scenario's federation and write a transcript archive");
  std::string sim_out;
  simulate->add_option("scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", sim_out, "Archive directory")->required();
  simulate->add_option("--seed", seed_flag, "Master seed");

  // game
  auto* game = app.add_subcommand("game", "Explicit coalition games");
  game->require_subcommand(1);
  std::string table_path;
  bool json_out = false;
  auto* g_shapley = game->add_subcommand("shapley", "Exact Shapley value of a table game");
  auto* g_banzhaf = game->add_subcommand("banzhaf", "Raw Banzhaf index of a table game");
  auto* g_scores = game->add_subcommand("scores", "SV, LOO, IOI, FP and EE of a table game");
  for (auto* sub : {g_shapley, g_banzhaf, g_scores}) {
    sub->add_option("table", table_path, "Table game file")->required()->check(CLI::ExistingFile);
    sub->add_flag("--json", json_out, "JSON output instead of CSV");
  }

  // score
  auto* score = app.add_subcommand("score", "Score clients from a transcript archive");
  std::string archive_dir;
  std::string method_name;
  std::optional<int> round;
  std::string combine_name = "mean";
  std::string target_name = "total";
  score->add_option("archive", archive_dir, "Transcript archive directory")->required()->check(CLI::ExistingDirectory);
  score->add_option("--method", method_name, "loo|ioi|fp|ee|cos|mrsv")
      ->required()
      ->check(CLI::IsMember({"loo", "ioi", "fp", "ee", "cos", "mrsv"}, CLI::ignore_case));
  score->add_option("--round", round, "Round to score (default: last)");
  score->add_option("--combine", combine_name, "MR-SV round combination")->check(CLI::IsMember({"mean", "sum"}));
  score->add_option("--target", target_name, "FP/EE efficiency target")->check(CLI::IsMember({"total", "round_gain"}));
  score->add_flag("--json", json_out, "JSON output instead of CSV");

  // influence
  auto* infl = app.add_subcommand("influence", "Influence matrix of a transcript round");
  bool raw = false;
  infl->add_option("archive", archive_dir, "Transcript archive directory")->required()->check(CLI::ExistingDirectory);
  infl->add_option("--round", round, "Round (default: last)");
  infl->add_flag("--raw", raw, "Skip column normalization");
  infl->add_option("--target", target_name, "Efficiency target")->check(CLI::IsMember({"total", "round_gain"}));
  infl->add_flag("--json", json_out, "JSON output instead of CSV");

  // report
  auto* report = app.add_subcommand("report", "Verify a bundle and emit per-method curve CSVs");
  std::string bundle_dir;
  std::optional<std::string> curves_out;
  report->add_option("bundle", bundle_dir, "Result bundle directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("--out", curves_out, "Directory for curve CSVs (default: <bundle>/curves)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      Scenario sc = load_scenario(scenario_path);
      apply_seed_override(sc, seed_flag);
      const auto bundle = run_scenario(sc);
      const fs::path dir = exact_dir ? fs::path(*exact_dir) : timestamped_dir(out_root, sc.name);
      write_bundle(dir, sc, bundle);
      std::cout << dir.string() << '\n';
    } else if (simulate->parsed()) {
      Scenario sc = load_scenario(scenario_path);
      apply_seed_override(sc, seed_flag);
      auto fed_run = run_federation(sc.federation);
      write_transcript_archive(sim_out, {sc.federation, std::move(fed_run.test), std::move(fed_run.transcripts)});
      std::cout << sim_out << '\n';
    } else if (game->parsed()) {
      const TableGame g = read_table_game_file(table_path);
      std::vector<ScoreVector> out;
      if (g_shapley->parsed() || g_scores->parsed()) {
        auto o = g.oracle();
        out.push_back(shapley_exact(o));
      }
      if (g_banzhaf->parsed()) {
        auto o = g.oracle();
        out.push_back(banzhaf_raw(o));
      }
      if (g_scores->parsed()) {
        auto o = g.oracle();
        const auto u = utilities_from_oracle(o);
        out.push_back(loo(u));
        out.push_back(ioi(u));
        out.push_back(fp(u));
        if (u.n_clients() >= 2) out.push_back(ee(u));
      }
      std::cout << table_of_scores(out, json_out);
    } else if (score->parsed()) {
      const auto archive = read_transcript_archive(archive_dir);
      const auto& last = pick_round(archive, round);
      const Method m = parse_method(method_name);
      const auto combine = combine_name == "sum" ? RoundCombine::kSum : RoundCombine::kMean;
      const Method methods[] = {m};
      const auto scores = score_history(methods, history_to(archive, last), archive.evaluator(), combine, nullptr,
                                        nullptr, parse_efficiency(target_name));
      std::cout << table_of_scores(scores, json_out);
    } else if (infl->parsed()) {
      const auto archive = read_transcript_archive(archive_dir);
      const auto& t = pick_round(archive, round);
      const auto m = influence_matrix(with_target(utilities_from_transcript(t, archive.evaluator()), parse_efficiency(target_name)), !raw);
      const auto table = influence_table(m);
      std::cout << (json_out ? table.to_json() : table.to_csv());
    } else if (report->parsed()) {
      const fs::path dir = bundle_dir;
      return cmd_report(dir, curves_out ? fs::path(*curves_out) : dir / "curves");
    }
  } catch (const std::exception& e) {
    std::cerr << "fedscore: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
