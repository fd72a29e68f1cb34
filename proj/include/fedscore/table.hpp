#pragma once

#include <string>
#include <variant>
#include <vector>

#include "fedscore/game.hpp"

namespace fedscore {

/// Small result table rendered as CSV or as a JSON array of row objects.
class Table {
 public:
  using Cell = std::variant<std::string, double, long long>;

  Table(std::string name, std::vector<std::string> columns);

  const std::string& name() const { return name_; }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }

  void add_row(std::vector<Cell> row);

  std::string to_csv() const;
  std::string to_json() const;

 private:
  std::string name_;
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

/// Header: method,round,client_0..client_{N-1}. `round` is empty when unset.
std::string score_vectors_csv(const std::vector<ScoreVector>& scores);
std::string score_vectors_json(const std::vector<ScoreVector>& scores);
std::vector<ScoreVector> parse_score_vectors_csv(const std::string& csv);

}  // namespace fedscore
