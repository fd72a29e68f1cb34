#include "fedscore/game.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fedscore/kernels.hpp"

namespace fedscore {

std::vector<int> Coalition::members() const {
  std::vector<int> out;
  for (int i = 0; i < 32; ++i)
    if (contains(i)) out.push_back(i);
  return out;
}

namespace {

struct MethodName {
  Method method;
  std::string_view label;
};

constexpr MethodName kMethodNames[] = {
    {Method::kSV, "SV"},   {Method::kMRSV, "MR-SV"}, {Method::kLOO, "LOO"}, {Method::kIOI, "IOI"},
    {Method::kFP, "FP"},   {Method::kEE, "EE"},      {Method::kCOS, "COS"}, {Method::kBanzhaf, "BANZHAF"},
};

std::string normalized_label(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '-' || c == '_') continue;
    out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

void check_size(int n) {
  if (n < 1) throw std::invalid_argument("game needs at least one client");
  if (n > kMaxGameClients)
    throw std::invalid_argument("game has " + std::to_string(n) + " clients; exhaustive enumeration is capped at " +
                                std::to_string(kMaxGameClients));
}

}  // namespace

std::string_view method_label(Method m) {
  for (const auto& e : kMethodNames)
    if (e.method == m) return e.label;
  return "?";
}

Method parse_method(std::string_view label) {
  const std::string key = normalized_label(label);
  for (const auto& e : kMethodNames)
    if (normalized_label(e.label) == key) return e.method;
  if (key == "TRUESV" || key == "SHAPLEY") return Method::kSV;
  throw std::invalid_argument("unknown scoring method '" + std::string(label) + "'");
}

void check_finite(const ScoreVector& s) {
  for (std::size_t i = 0; i < s.scores.size(); ++i)
    if (!std::isfinite(s.scores[i]))
      throw std::domain_error(std::string(method_label(s.method)) + " score of client " + std::to_string(i) +
                              " is not finite");
}

CoalitionOracle::CoalitionOracle(int n_clients, Function fn) : n_clients_(n_clients), fn_(std::move(fn)) {
  if (n_clients < 1 || n_clients > 31) throw std::invalid_argument("oracle client count out of range");
}

double CoalitionOracle::evaluate(Coalition s) {
  if (!s.within(n_clients_))
    throw std::invalid_argument("coalition mask " + std::to_string(s.mask()) + " exceeds " +
                                std::to_string(n_clients_) + " clients");
  calls_.fetch_add(1, std::memory_order_relaxed);
  if (audit_.load(std::memory_order_relaxed)) {
    std::lock_guard<std::mutex> lock(audit_mutex_);
    audit_log_.push_back(s);
  }
  const double v = fn_(s);
  if (!std::isfinite(v))
    throw std::domain_error("utility of coalition mask " + std::to_string(s.mask()) + " is not finite");
  return v;
}

void CoalitionOracle::enable_audit() { audit_.store(true); }

std::vector<Coalition> CoalitionOracle::audit_log() const {
  std::lock_guard<std::mutex> lock(audit_mutex_);
  return audit_log_;
}

TableGame::TableGame(int n_clients, std::vector<double> values) : n_clients_(n_clients), values_(std::move(values)) {
  check_size(n_clients);
  if (values_.size() != (std::size_t{1} << n_clients))
    throw std::invalid_argument("table game with " + std::to_string(n_clients) + " clients needs " +
                                std::to_string(std::size_t{1} << n_clients) + " values, got " +
                                std::to_string(values_.size()));
  for (std::size_t m = 0; m < values_.size(); ++m)
    if (!std::isfinite(values_[m]))
      throw std::domain_error("table value for mask " + std::to_string(m) + " is not finite");
}

CoalitionOracle TableGame::oracle() const {
  return CoalitionOracle(n_clients_, [this](Coalition s) { return values_[s.mask()]; });
}

TableGame read_table_game(std::istream& in) {
  std::string line;
  int line_no = 0;
  int n = -1;
  std::vector<double> values;
  std::vector<bool> seen;
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("table game line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue;
    if (n < 0) {
      if (first != "n_clients") fail("expected 'n_clients <N>' header");
      if (!(fields >> n)) fail("missing client count");
      check_size(n);
      values.assign(std::size_t{1} << n, 0.0);
      seen.assign(values.size(), false);
      continue;
    }
    std::uint64_t mask = 0;
    auto [ptr, ec] = std::from_chars(first.data(), first.data() + first.size(), mask);
    if (ec != std::errc() || ptr != first.data() + first.size()) fail("bad mask '" + first + "'");
    if (mask >= values.size()) fail("mask " + first + " out of range");
    std::string value_text;
    if (!(fields >> value_text)) fail("missing value");
    double v = 0.0;
    auto [vptr, vec] = std::from_chars(value_text.data(), value_text.data() + value_text.size(), v);
    if (vec != std::errc() || vptr != value_text.data() + value_text.size()) fail("bad value '" + value_text + "'");
    if (seen[mask]) fail("duplicate mask " + first);
    seen[mask] = true;
    values[mask] = v;
  }
  if (n < 0) throw std::invalid_argument("table game: missing 'n_clients' header");
  const auto missing = std::find(seen.begin(), seen.end(), false);
  if (missing != seen.end())
    throw std::invalid_argument("table game: no value for mask " + std::to_string(missing - seen.begin()));
  return TableGame(n, std::move(values));
}

TableGame read_table_game_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open table game '" + path + "'");
  return read_table_game(in);
}

void write_table_game(std::ostream& out, const TableGame& game) {
  out << "n_clients " << game.n_clients() << '\n';
  char buf[64];
  for (std::size_t m = 0; m < game.values().size(); ++m) {
    auto r = std::to_chars(buf, buf + sizeof buf, game.values()[m]);
    out << m << ' ' << std::string_view(buf, r.ptr - buf) << '\n';
  }
}

double marginal(CoalitionOracle& oracle, Coalition base, int client) {
  if (client < 0 || client >= oracle.n_clients()) throw std::invalid_argument("client index out of range");
  if (base.contains(client))
    throw std::invalid_argument("client " + std::to_string(client) + " is already in the base coalition");
  return oracle(base.with(client)) - oracle(base);
}

std::vector<double> tabulate(CoalitionOracle& oracle) {
  check_size(oracle.n_clients());
  return kernels::parallel::tabulate(oracle);
}

ScoreVector shapley_exact(CoalitionOracle& oracle) {
  const auto table = tabulate(oracle);
  ScoreVector out{Method::kSV, kernels::parallel::shapley_from_table(table, oracle.n_clients()), std::nullopt};
  check_finite(out);
  return out;
}

ScoreVector banzhaf_raw(CoalitionOracle& oracle) {
  const auto table = tabulate(oracle);
  ScoreVector out{Method::kBanzhaf, kernels::parallel::banzhaf_from_table(table, oracle.n_clients()), std::nullopt};
  check_finite(out);
  return out;
}

}  // namespace fedscore
