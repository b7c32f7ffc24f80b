#ifndef EXITRANK_GBDT_HPP
#define EXITRANK_GBDT_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "exitrank/ensemble.hpp"

namespace exitrank {

enum class Loss { WeightedLogistic, Squared };

struct TrainParams {
  int num_trees = 10;
  int max_leaves = 32;
  double learning_rate = 0.1;
  double l2_lambda = 1.0;
  int min_examples_per_leaf = 5;
  Loss loss = Loss::WeightedLogistic;
  /// Restricts split search to these feature indices (top-m gain filter).
  std::optional<std::vector<int>> feature_subset;
};

/// Row-major dense example matrix.
struct DataMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values.data() + i * cols, cols);
  }
  void push_row(std::span<const double> r);
};

/// A trained forest: an additive ensemble plus its loss tag. predict_raw is
/// the additive sum; predict_proba is sigmoid(raw) for the logistic loss.
struct Forest {
  Ensemble model;
  Loss loss = Loss::WeightedLogistic;
  /// Set when nothing was learnable (degenerate labels, or no tree found a
  /// positive-gain split) and the forest predicts a constant.
  bool constant_warning = false;
  /// Weighted mean training loss after each boosting round.
  std::vector<double> round_train_loss;
  /// Total split gain per feature, recorded at fit time.
  std::vector<double> split_gain;
};

struct GradHess {
  double g = 0.0;
  double h = 0.0;
};

/// Weighted logistic loss derivatives w.r.t. the raw score:
/// p = sigmoid(raw), g = w*(p - label), h = w*p*(1-p).
GradHess logistic_grad_hess(double raw, int label, double weight);

/// Called after each boosting round with the freshly fitted tree.
using RoundObserver = std::function<void(int round, const Tree& tree)>;

/// Newton boosting with exact greedy split search. Per round, one tree is
/// grown best-first: the candidate leaf with the largest gain
///   0.5 * [G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)]
/// is split until the leaf budget is exhausted or no positive-gain split
/// remains. Thresholds are midpoints between consecutive distinct sorted
/// values; ties break on lowest feature index, then lowest threshold.
/// Leaf values are -learning_rate * G/(H+l). Initial raw score is 0.
/// Degenerate input (identical labels under the logistic loss) yields a
/// constant-0 forest with constant_warning set instead of failing.
Forest train_forest(const DataMatrix& data, std::span<const double> labels,
                    std::span<const double> weights, const TrainParams& params,
                    const RoundObserver& observer = {});

double predict_raw(const Forest& forest, std::span<const double> features);

/// Sigmoid of the raw score, strictly inside (0, 1) for finite inputs.
/// Throws for squared-loss forests (no probability semantics).
double predict_proba(const Forest& forest, std::span<const double> features);

/// (feature, total split gain) sorted by descending gain; unsplit features
/// are absent. Requires a forest trained in-process by this module.
std::vector<std::pair<int, double>> feature_importance(const Forest& forest);

/// Native ensemble schema with an added "loss" field.
std::string save_forest(const Forest& forest);
Forest load_forest(std::string_view text, int max_leaves = kDefaultMaxLeaves);
void save_forest_file(const Forest& forest, const std::string& path);
Forest load_forest_file(const std::string& path,
                        int max_leaves = kDefaultMaxLeaves);

}  // namespace exitrank

#endif  // EXITRANK_GBDT_HPP
