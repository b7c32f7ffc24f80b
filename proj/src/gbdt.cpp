#include "exitrank/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "exitrank/errors.hpp"
#include "native_schema.hpp"

namespace exitrank {

void DataMatrix::push_row(std::span<const double> r) {
  if (rows == 0 && cols == 0) cols = r.size();
  if (r.size() != cols) {
    throw std::invalid_argument("row length " + std::to_string(r.size()) +
                                " does not match matrix width " +
                                std::to_string(cols));
  }
  values.insert(values.end(), r.begin(), r.end());
  ++rows;
}

namespace {

double sigmoid(double raw) {
  if (raw >= 0.0) return 1.0 / (1.0 + std::exp(-raw));
  double e = std::exp(raw);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double example_loss(Loss loss, double raw, double label, double weight) {
  if (loss == Loss::WeightedLogistic) {
    return weight * softplus(label > 0.5 ? -raw : raw);
  }
  double r = raw - label;
  return weight * 0.5 * r * r;
}

}  // namespace

GradHess logistic_grad_hess(double raw, int label, double weight) {
  double p = sigmoid(raw);
  return {weight * (p - static_cast<double>(label)),
          weight * p * (1.0 - p)};
}

// ---------------------------------------------------------------------------
// Exact greedy tree growing (best-first)
// ---------------------------------------------------------------------------

namespace {

struct SplitCandidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
  bool valid = false;
};

struct OpenLeaf {
  std::vector<int> indices;
  double sum_g = 0.0;
  double sum_h = 0.0;
  int parent_node = -1;  // internal node owning the child slot, -1 for root
  bool is_left = false;
  bool closed = false;
  SplitCandidate cand;
};

// Midpoints between consecutive distinct sorted values. Candidates whose
// midpoint rounds onto the right value are skipped so that the `<=` routing
// rule always reproduces the prefix partition the gain was computed from.
SplitCandidate best_split(const DataMatrix& data, std::span<const double> g,
                          std::span<const double> h, const OpenLeaf& leaf,
                          std::span<const int> features,
                          const TrainParams& params) {
  SplitCandidate best;
  std::size_t n = leaf.indices.size();
  if (n < 2 * static_cast<std::size_t>(params.min_examples_per_leaf)) {
    return best;
  }
  const double lambda = params.l2_lambda;
  const double parent_term =
      leaf.sum_g * leaf.sum_g / (leaf.sum_h + lambda);

  struct Entry {
    double value, g, h;
    int index;
  };
  std::vector<Entry> sorted(n);
  for (int f : features) {
    for (std::size_t k = 0; k < n; ++k) {
      int i = leaf.indices[k];
      std::size_t row = static_cast<std::size_t>(i);
      sorted[k] = {data.values[row * data.cols + static_cast<std::size_t>(f)],
                   g[row], h[row], i};
    }
    std::sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) {
      if (a.value != b.value) return a.value < b.value;
      return a.index < b.index;
    });

    double left_g = 0.0, left_h = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      left_g += sorted[k].g;
      left_h += sorted[k].h;
      if (sorted[k].value == sorted[k + 1].value) continue;
      std::size_t left_count = k + 1;
      std::size_t right_count = n - left_count;
      if (left_count < static_cast<std::size_t>(params.min_examples_per_leaf) ||
          right_count < static_cast<std::size_t>(params.min_examples_per_leaf)) {
        continue;
      }
      double thr = (sorted[k].value + sorted[k + 1].value) / 2.0;
      if (!(thr >= sorted[k].value && thr < sorted[k + 1].value)) continue;
      double right_g = leaf.sum_g - left_g;
      double right_h = leaf.sum_h - left_h;
      double gain = 0.5 * (left_g * left_g / (left_h + lambda) +
                           right_g * right_g / (right_h + lambda) -
                           parent_term);
      // Strict > keeps the lowest feature index, then the lowest
      // threshold, among equal-gain candidates.
      if (gain > best.gain) {
        best = {gain, f, thr, true};
      }
    }
  }
  if (!(best.gain > 0.0)) best.valid = false;
  return best;
}

Tree fit_tree(const DataMatrix& data, std::span<const double> g,
              std::span<const double> h, std::span<const int> features,
              const TrainParams& params, std::vector<double>& feature_gain,
              std::vector<double>& raw) {
  std::size_t n = data.rows;
  Tree tree;

  std::vector<OpenLeaf> open;
  {
    OpenLeaf root;
    root.indices.resize(n);
    std::iota(root.indices.begin(), root.indices.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      root.sum_g += g[i];
      root.sum_h += h[i];
    }
    root.cand = best_split(data, g, h, root, features, params);
    open.push_back(std::move(root));
  }

  int leaves = 1;
  while (leaves < params.max_leaves) {
    std::size_t pick = open.size();
    double pick_gain = 0.0;
    for (std::size_t i = 0; i < open.size(); ++i) {
      if (open[i].closed || !open[i].cand.valid) continue;
      if (open[i].cand.gain > pick_gain) {
        pick_gain = open[i].cand.gain;
        pick = i;
      }
    }
    if (pick == open.size()) break;

    OpenLeaf& leaf = open[pick];
    int node = tree.num_internal();
    tree.split_feature.push_back(leaf.cand.feature);
    tree.threshold.push_back(leaf.cand.threshold);
    tree.left.push_back(0);
    tree.right.push_back(0);
    if (leaf.parent_node >= 0) {
      auto& slot = leaf.is_left
                       ? tree.left[static_cast<std::size_t>(leaf.parent_node)]
                       : tree.right[static_cast<std::size_t>(leaf.parent_node)];
      slot = node;
    }
    if (static_cast<std::size_t>(leaf.cand.feature) >= feature_gain.size()) {
      feature_gain.resize(static_cast<std::size_t>(leaf.cand.feature) + 1, 0.0);
    }
    feature_gain[static_cast<std::size_t>(leaf.cand.feature)] +=
        leaf.cand.gain;

    OpenLeaf l, r;
    l.parent_node = node;
    l.is_left = true;
    r.parent_node = node;
    r.is_left = false;
    std::size_t fcol = static_cast<std::size_t>(leaf.cand.feature);
    for (int i : leaf.indices) {
      std::size_t row = static_cast<std::size_t>(i);
      if (data.values[row * data.cols + fcol] <= leaf.cand.threshold) {
        l.indices.push_back(i);
        l.sum_g += g[row];
        l.sum_h += h[row];
      } else {
        r.indices.push_back(i);
        r.sum_g += g[row];
        r.sum_h += h[row];
      }
    }
    leaf.closed = true;
    leaf.indices.clear();
    l.cand = best_split(data, g, h, l, features, params);
    r.cand = best_split(data, g, h, r, features, params);
    open.push_back(std::move(l));
    open.push_back(std::move(r));
    ++leaves;
  }

  for (auto& leaf : open) {
    if (leaf.closed) continue;
    double value = -params.learning_rate * leaf.sum_g /
                   (leaf.sum_h + params.l2_lambda);
    int leaf_index = tree.num_leaves();
    tree.leaf_value.push_back(value);
    if (leaf.parent_node >= 0) {
      auto& slot = leaf.is_left
                       ? tree.left[static_cast<std::size_t>(leaf.parent_node)]
                       : tree.right[static_cast<std::size_t>(leaf.parent_node)];
      slot = -(leaf_index + 1);
    }
    for (int i : leaf.indices) raw[static_cast<std::size_t>(i)] += value;
  }
  return tree;
}

void check_train_params(const TrainParams& params) {
  if (params.num_trees < 1) throw std::invalid_argument("num_trees must be >= 1");
  if (params.max_leaves < 2) throw std::invalid_argument("max_leaves must be >= 2");
  if (!(params.learning_rate > 0.0)) {
    throw std::invalid_argument("learning_rate must be > 0");
  }
  if (params.l2_lambda < 0.0) {
    throw std::invalid_argument("l2_lambda must be >= 0");
  }
  if (params.min_examples_per_leaf < 1) {
    throw std::invalid_argument("min_examples_per_leaf must be >= 1");
  }
}

double weighted_mean_loss(Loss loss, std::span<const double> raw,
                          std::span<const double> labels,
                          std::span<const double> weights) {
  double total = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    total += example_loss(loss, raw[i], labels[i], weights[i]);
    wsum += weights[i];
  }
  return total / wsum;
}

Forest constant_zero_forest(std::size_t cols, Loss loss,
                            std::span<const double> labels,
                            std::span<const double> weights) {
  Forest forest;
  forest.loss = loss;
  forest.constant_warning = true;
  forest.model.num_features = static_cast<int>(cols);
  Tree constant;
  constant.leaf_value.push_back(0.0);
  forest.model.trees.push_back(std::move(constant));
  std::vector<double> raw(labels.size(), 0.0);
  forest.round_train_loss.push_back(
      weighted_mean_loss(loss, raw, labels, weights));
  return forest;
}

}  // namespace

Forest train_forest(const DataMatrix& data, std::span<const double> labels,
                    std::span<const double> weights, const TrainParams& params,
                    const RoundObserver& observer) {
  check_train_params(params);
  std::size_t n = data.rows;
  if (n == 0) throw std::invalid_argument("no training examples");
  if (labels.size() != n || weights.size() != n) {
    throw std::invalid_argument("labels/weights length does not match rows");
  }
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("weights must be > 0");
  }
  if (params.loss == Loss::WeightedLogistic) {
    for (double y : labels) {
      if (y != 0.0 && y != 1.0) {
        throw std::invalid_argument("logistic labels must be 0 or 1");
      }
    }
    bool all_equal = std::all_of(labels.begin(), labels.end(),
                                 [&](double y) { return y == labels[0]; });
    if (all_equal) {
      return constant_zero_forest(data.cols, params.loss, labels, weights);
    }
  }

  std::vector<int> features;
  if (params.feature_subset) {
    features = *params.feature_subset;
    std::sort(features.begin(), features.end());
    features.erase(std::unique(features.begin(), features.end()),
                   features.end());
    for (int f : features) {
      if (f < 0 || static_cast<std::size_t>(f) >= data.cols) {
        throw std::invalid_argument("feature_subset index " +
                                    std::to_string(f) + " out of range");
      }
    }
    if (features.empty()) {
      throw std::invalid_argument("feature_subset is empty");
    }
  } else {
    features.resize(data.cols);
    std::iota(features.begin(), features.end(), 0);
  }

  Forest forest;
  forest.loss = params.loss;
  forest.model.num_features = static_cast<int>(data.cols);
  forest.split_gain.assign(data.cols, 0.0);

  std::vector<double> raw(n, 0.0);
  std::vector<double> g(n), h(n);
  for (int round = 0; round < params.num_trees; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      if (params.loss == Loss::WeightedLogistic) {
        GradHess gh = logistic_grad_hess(raw[i], labels[i] > 0.5 ? 1 : 0,
                                         weights[i]);
        g[i] = gh.g;
        h[i] = gh.h;
      } else {
        g[i] = weights[i] * (raw[i] - labels[i]);
        h[i] = weights[i];
      }
    }
    Tree tree =
        fit_tree(data, g, h, features, params, forest.split_gain, raw);
    forest.round_train_loss.push_back(
        weighted_mean_loss(params.loss, raw, labels, weights));
    forest.model.trees.push_back(std::move(tree));
    if (observer) observer(round, forest.model.trees.back());
  }

  forest.constant_warning =
      std::all_of(forest.model.trees.begin(), forest.model.trees.end(),
                  [](const Tree& t) { return t.num_internal() == 0; });
  return forest;
}

double predict_raw(const Forest& forest, std::span<const double> features) {
  return score_full(forest.model, features);
}

double predict_proba(const Forest& forest, std::span<const double> features) {
  if (forest.loss != Loss::WeightedLogistic) {
    throw std::invalid_argument(
        "predict_proba requires a logistic-loss forest");
  }
  return sigmoid(predict_raw(forest, features));
}

std::vector<std::pair<int, double>> feature_importance(const Forest& forest) {
  std::vector<std::pair<int, double>> out;
  for (std::size_t f = 0; f < forest.split_gain.size(); ++f) {
    if (forest.split_gain[f] > 0.0) {
      out.emplace_back(static_cast<int>(f), forest.split_gain[f]);
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

std::string save_forest(const Forest& forest) {
  nlohmann::json j = detail::ensemble_to_json(forest.model);
  j["loss"] =
      forest.loss == Loss::WeightedLogistic ? "weighted_logistic" : "squared";
  return j.dump(2) + "\n";
}

Forest load_forest(std::string_view text, int max_leaves) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("forest: invalid JSON: ") + e.what());
  }
  if (!j.contains("loss") || !j.at("loss").is_string()) {
    throw ParseError("forest: missing '/loss'");
  }
  Forest forest;
  std::string loss = j.at("loss").get<std::string>();
  if (loss == "weighted_logistic") {
    forest.loss = Loss::WeightedLogistic;
  } else if (loss == "squared") {
    forest.loss = Loss::Squared;
  } else {
    throw ParseError("forest: unknown loss '" + loss + "'");
  }
  forest.model = detail::ensemble_from_json(j, max_leaves);
  return forest;
}

void save_forest_file(const Forest& forest, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open output file: " + path);
  out << save_forest(forest);
}

Forest load_forest_file(const std::string& path, int max_leaves) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open classifier file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_forest(ss.str(), max_leaves);
}

}  // namespace exitrank
