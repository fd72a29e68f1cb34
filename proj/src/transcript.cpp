#include "fedscore/transcript.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fedscore {

double RoundTranscript::aggregation_residual() const {
  ModelParams sum = m0;
  for (const auto& u : updates) sum += u.delta;
  double worst = 0.0;
  for (std::size_t i = 0; i < m.dim(); ++i) worst = std::max(worst, std::abs(m[i] - sum[i]));
  return worst;
}

void RoundTranscript::validate() const {
  if (updates.empty()) throw std::invalid_argument("transcript has no client updates");
  if (m.dim() != m0.dim()) throw std::invalid_argument("transcript m and m0 dimensions differ");
  for (const auto& u : updates)
    if (u.delta.dim() != m0.dim())
      throw std::invalid_argument("update of client " + std::to_string(u.client) + " has the wrong dimension");
}

ModelParams coalition_model(const RoundTranscript& t, Coalition s) {
  const int n = t.n_clients();
  if (!s.within(n)) throw std::invalid_argument("coalition exceeds transcript clients");
  if (s.is_empty()) return t.m0;
  if (s == Coalition::grand(n)) return t.m;
  if (s.size() == 1) {
    const int i = std::countr_zero(s.mask());
    return t.m0 + t.updates[static_cast<std::size_t>(i)].delta;
  }
  if (s.size() == n - 1) {
    const int i = std::countr_zero(~s.mask());
    return t.m - t.updates[static_cast<std::size_t>(i)].delta;
  }
  ModelParams model = t.m0;
  for (int i = 0; i < n; ++i)
    if (s.contains(i)) model += t.updates[static_cast<std::size_t>(i)].delta;
  return model;
}

CoalitionOracle round_oracle(const RoundTranscript& t, const ModelEvaluator& v) {
  t.validate();
  return CoalitionOracle(t.n_clients(), [&t, &v](Coalition s) { return v(coalition_model(t, s)); });
}

}  // namespace fedscore
