#include "fedscore/table.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

#include "fedscore/io.hpp"
#include "json.hpp"

namespace fedscore {

Table::Table(std::string name, std::vector<std::string> columns)
    : name_(std::move(name)), columns_(std::move(columns)) {}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size())
    throw std::invalid_argument("table '" + name_ + "' row has " + std::to_string(row.size()) + " cells, expected " +
                                std::to_string(columns_.size()));
  rows_.push_back(std::move(row));
}

namespace {

std::string cell_text(const Table::Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  return std::to_string(std::get<long long>(c));
}

nlohmann::ordered_json cell_json(const Table::Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* d = std::get_if<double>(&c)) return *d;
  return std::get<long long>(c);
}

}  // namespace

std::string Table::to_csv() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
  os << '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
    os << '\n';
  }
  return os.str();
}

std::string Table::to_json() const {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : rows_) {
    nlohmann::ordered_json obj;
    for (std::size_t i = 0; i < row.size(); ++i) obj[columns_[i]] = cell_json(row[i]);
    rows.push_back(std::move(obj));
  }
  nlohmann::ordered_json doc;
  doc["table"] = name_;
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

std::string score_vectors_csv(const std::vector<ScoreVector>& scores) {
  std::size_t n = 0;
  for (const auto& s : scores) n = std::max(n, s.size());
  std::ostringstream os;
  os << "method,round";
  for (std::size_t i = 0; i < n; ++i) os << ",client_" << i;
  os << '\n';
  for (const auto& s : scores) {
    if (s.size() != n) throw std::invalid_argument("score vectors in one CSV must have equal length");
    os << method_label(s.method) << ',';
    if (s.round) os << *s.round;
    for (double v : s.scores) os << ',' << format_double(v);
    os << '\n';
  }
  return os.str();
}

std::string score_vectors_json(const std::vector<ScoreVector>& scores) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& s : scores) {
    nlohmann::ordered_json obj;
    obj["method"] = std::string(method_label(s.method));
    obj["round"] = s.round ? nlohmann::ordered_json(*s.round) : nlohmann::ordered_json(nullptr);
    obj["scores"] = s.scores;
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

std::vector<ScoreVector> parse_score_vectors_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line.rfind("method,round", 0) != 0)
    throw std::invalid_argument("score CSV must start with a 'method,round,...' header");
  std::vector<ScoreVector> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string method, round, value;
    std::getline(fields, method, ',');
    std::getline(fields, round, ',');
    ScoreVector s{parse_method(method), {}, std::nullopt};
    if (!round.empty()) s.round = std::stoi(round);
    while (std::getline(fields, value, ',')) {
      double v = 0.0;
      auto r = std::from_chars(value.data(), value.data() + value.size(), v);
      if (r.ec != std::errc()) throw std::invalid_argument("bad score '" + value + "'");
      s.scores.push_back(v);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace fedscore
