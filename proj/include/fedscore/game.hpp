#pragma once

#include <atomic>
#include <bit>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fedscore {

// Exhaustive enumeration guard: tables hold 2^N entries.
inline constexpr int kMaxGameClients = 20;

/// A subset of clients {0..N-1}, stored as a bitmask (bit i set <=> client i
/// is a member).
class Coalition {
 public:
  constexpr Coalition() = default;
  constexpr explicit Coalition(std::uint32_t mask) : mask_(mask) {}

  static constexpr Coalition empty() { return Coalition(0); }
  static constexpr Coalition grand(int n) {
    return Coalition(n >= 32 ? ~0u : ((1u << n) - 1u));
  }
  static constexpr Coalition singleton(int i) { return Coalition(1u << i); }

  constexpr std::uint32_t mask() const { return mask_; }
  constexpr bool contains(int i) const { return (mask_ >> i) & 1u; }
  constexpr int size() const { return std::popcount(mask_); }
  constexpr bool is_empty() const { return mask_ == 0; }
  constexpr Coalition with(int i) const { return Coalition(mask_ | (1u << i)); }
  constexpr Coalition without(int i) const { return Coalition(mask_ & ~(1u << i)); }
  constexpr bool within(int n) const { return (mask_ & ~grand(n).mask()) == 0; }

  std::vector<int> members() const;

  friend constexpr bool operator==(Coalition, Coalition) = default;
  friend constexpr auto operator<=>(Coalition a, Coalition b) { return a.mask_ <=> b.mask_; }

 private:
  std::uint32_t mask_ = 0;
};

enum class Method { kSV, kMRSV, kLOO, kIOI, kFP, kEE, kCOS, kBanzhaf };

std::string_view method_label(Method m);
/// Accepts the canonical labels ("MR-SV", "FP", ...) case-insensitively and
/// the CLI spellings ("mrsv", "truesv").
Method parse_method(std::string_view label);

struct ScoreVector {
  Method method = Method::kSV;
  std::vector<double> scores;
  std::optional<int> round;

  std::size_t size() const { return scores.size(); }
  double operator[](std::size_t i) const { return scores[i]; }
};

/// Throws std::domain_error if any entry is non-finite.
void check_finite(const ScoreVector& s);

/// Utility function over coalitions with an evaluation counter.
///
/// The wrapped function must be deterministic and safe to call concurrently;
/// the counter (and the optional audit log) are updated atomically so
/// coalitions may be evaluated from several threads.
class CoalitionOracle {
 public:
  using Function = std::function<double(Coalition)>;

  CoalitionOracle(int n_clients, Function fn);
  CoalitionOracle(const CoalitionOracle&) = delete;
  CoalitionOracle& operator=(const CoalitionOracle&) = delete;

  int n_clients() const { return n_clients_; }

  /// Evaluates v(s). Rejects coalitions outside {0..N-1} and non-finite values.
  double evaluate(Coalition s);
  double operator()(Coalition s) { return evaluate(s); }

  std::uint64_t call_count() const { return calls_.load(std::memory_order_relaxed); }

  /// Records every evaluated coalition from now on.
  void enable_audit();
  std::vector<Coalition> audit_log() const;

 private:
  int n_clients_;
  Function fn_;
  std::atomic<std::uint64_t> calls_{0};
  std::atomic<bool> audit_{false};
  mutable std::mutex audit_mutex_;
  std::vector<Coalition> audit_log_;
};

/// Explicit game: one value per subset of {0..N-1}, indexed by bitmask.
class TableGame {
 public:
  TableGame(int n_clients, std::vector<double> values);

  int n_clients() const { return n_clients_; }
  double value(Coalition s) const { return values_.at(s.mask()); }
  std::span<const double> values() const { return values_; }

  /// Oracle view backed by this table. The table must outlive the oracle.
  CoalitionOracle oracle() const;

 private:
  int n_clients_;
  std::vector<double> values_;
};

/// Text format:
///
///   # comment lines and blank lines are ignored
///   n_clients 3
///   0 0.0
///   1 0.5
///   ...
///
/// Every mask in [0, 2^N) must appear exactly once; order is free.
TableGame read_table_game(std::istream& in);
TableGame read_table_game_file(const std::string& path);
void write_table_game(std::ostream& out, const TableGame& game);

/// v(base ∪ {client}) − v(base).
double marginal(CoalitionOracle& oracle, Coalition base, int client);

/// Exact Shapley value, SV(i) = Σ_{S ⊆ [N]\{i}} |S|!(N−|S|−1)!/N! · (v(S∪{i}) − v(S)).
/// Evaluates every coalition exactly once (2^N oracle calls).
ScoreVector shapley_exact(CoalitionOracle& oracle);

/// Raw (unnormalized) Banzhaf index, 2^{-(N-1)} Σ_{S ⊆ [N]\{i}} (v(S∪{i}) − v(S)).
ScoreVector banzhaf_raw(CoalitionOracle& oracle);

/// Evaluates all 2^N coalitions into a table (parallel over coalitions).
std::vector<double> tabulate(CoalitionOracle& oracle);

}  // namespace fedscore
