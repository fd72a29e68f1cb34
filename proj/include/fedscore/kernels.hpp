#pragma once

#include <span>
#include <vector>

#include "fedscore/game.hpp"
#include "fedscore/model.hpp"

// Data-parallel inner loops. Each kernel has an OpenMP version (used by the
// library) and a serial reference kept for tests and benchmarks. The
// parallel versions write each result to its own slot and reduce serially, so
// both produce bit-identical output regardless of thread count.
namespace fedscore::kernels {

namespace serial {
std::vector<double> tabulate(CoalitionOracle& oracle);
std::vector<double> shapley_from_table(std::span<const double> values, int n_clients);
std::vector<double> banzhaf_from_table(std::span<const double> values, int n_clients);
Evaluation evaluate_mlp(const MlpShape& shape, const ModelParams& params, const LabeledDataset& data);
}  // namespace serial

namespace parallel {
std::vector<double> tabulate(CoalitionOracle& oracle);
std::vector<double> shapley_from_table(std::span<const double> values, int n_clients);
std::vector<double> banzhaf_from_table(std::span<const double> values, int n_clients);
Evaluation evaluate_mlp(const MlpShape& shape, const ModelParams& params, const LabeledDataset& data);
}  // namespace parallel

/// |S|!(N-|S|-1)!/N! for |S| = 0..N-1.
std::vector<double> shapley_weights(int n_clients);

}  // namespace fedscore::kernels
