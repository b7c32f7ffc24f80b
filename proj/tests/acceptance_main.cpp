// End-to-end gate for the scoring engine: each check prints one [PASS] or
// [FAIL] line and the process exits nonzero if anything failed. Numeric
// thresholds are frozen against the committed synthetic benchmark.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "exitrank/dataset.hpp"
#include "exitrank/ensemble.hpp"
#include "exitrank/exitset.hpp"
#include "exitrank/gbdt.hpp"
#include "exitrank/metrics.hpp"
#include "exitrank/scorer.hpp"
#include "exitrank/strategies.hpp"
#include "exitrank/text.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"
#include "test_paths.hpp"

using namespace exitrank;

namespace {

struct Gate {
  int failures = 0;

  void report(const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name;
    if (!detail.empty()) std::cout << "  (" << detail << ")";
    std::cout << "\n" << std::flush;
    failures += ok ? 0 : 1;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt_seconds(double s) {
  std::ostringstream out;
  out.precision(3);
  out << s << " s";
  return out.str();
}

Forest train_ranker(const Dataset& ds, int num_trees) {
  DataMatrix data;
  std::vector<double> labels, weights;
  for (const QueryGroup& g : ds.groups) {
    for (const Document& d : g.documents) {
      data.push_row(d.features);
      labels.push_back(static_cast<double>(d.relevance));
      weights.push_back(1.0);
    }
  }
  TrainParams params;
  params.num_trees = num_trees;
  params.max_leaves = 32;
  params.learning_rate = 0.1;
  params.min_examples_per_leaf = 5;
  params.loss = Loss::Squared;
  return train_forest(data, labels, weights, params);
}

std::vector<int> group_relevances(const QueryGroup& g) {
  std::vector<int> rels;
  rels.reserve(g.documents.size());
  for (const Document& d : g.documents) rels.push_back(d.relevance);
  return rels;
}

double mean_ndcg_of(const PipelineResult& result, const Dataset& ds, int k) {
  std::vector<QueryNdcg> per_query;
  per_query.reserve(ds.groups.size());
  for (std::size_t i = 0; i < ds.groups.size(); ++i) {
    per_query.push_back(
        query_ndcg(result.queries[i].ranking, group_relevances(ds.groups[i]), k));
  }
  return mean_ndcg(per_query, ZeroIdcgPolicy::ScoreOne);
}

void write_letor(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  for (const QueryGroup& g : ds.groups) {
    for (const Document& d : g.documents) {
      out << d.relevance << " qid:" << g.query_id;
      for (std::size_t j = 0; j < d.features.size(); ++j) {
        out << ' ' << (j + 1) << ':' << fmt_double(d.features[j]);
      }
      out << '\n';
    }
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<double>> read_csv_rows(const std::string& path) {
  std::vector<std::vector<double>> rows;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

// --------------------------------------------------------------------------
// 1. The per-query oracle cut loses nothing against full scoring.
// --------------------------------------------------------------------------
void check_ideal_zero_delta(Gate& gate, const Ensemble& model,
                            const Dataset& test, Clock::time_point start) {
  PipelineOptions opts;
  opts.threads = 4;
  PipelineResult ideal =
      run_pipeline(model, test, SentinelConfig{50}, IdealParams{10}, opts);
  PipelineResult full =
      run_pipeline(model, test, SentinelConfig{50}, FullParams{}, opts);

  int mismatches = 0;
  for (std::size_t i = 0; i < test.groups.size(); ++i) {
    std::vector<int> rels = group_relevances(test.groups[i]);
    QueryNdcg a = query_ndcg(ideal.queries[i].ranking, rels, 10);
    QueryNdcg b = query_ndcg(full.queries[i].ranking, rels, 10);
    mismatches += a.value != b.value;
  }
  double elapsed = seconds_since(start);
  bool ok = mismatches == 0 && ideal.cost.ranker_trees <= full.cost.ranker_trees &&
            elapsed < 30.0;
  gate.report("oracle cut matches full scoring per query",
              ok,
              std::to_string(test.groups.size()) + " queries, " +
                  std::to_string(mismatches) + " mismatches, " +
                  fmt_seconds(elapsed));
}

// --------------------------------------------------------------------------
// 2. Splitting traversal at any sentinel changes nothing.
// --------------------------------------------------------------------------
void check_staging_identity(Gate& gate, const Ensemble& model,
                            const Dataset& test) {
  auto start = Clock::now();
  int T = static_cast<int>(model.trees.size());
  double max_dev = 0.0;
  int backend_mismatches = 0;
  for (int s : {1, T / 4, T / 2, 3 * T / 4, T}) {
    for (const QueryGroup& g : test.groups) {
      backend_mismatches += !backend_equivalence(model, g, SentinelConfig{s});
      TraversalCost cost;
      ScoringState state = score_prefix(model, g, SentinelConfig{s}, cost);
      for (DocState& d : state.docs) d.continued = true;
      resume_scoring(model, g, state, SentinelConfig{s}, cost);
      for (std::size_t i = 0; i < g.documents.size(); ++i) {
        double one_shot = score_full(model, g.documents[i].features);
        max_dev = std::max(max_dev,
                           std::abs(*state.docs[i].full_score - one_shot));
      }
    }
  }
  double elapsed = seconds_since(start);
  bool ok = max_dev <= 1e-9 && backend_mismatches == 0 && elapsed < 10.0;
  std::ostringstream detail;
  detail << "max |staged - one-shot| = " << max_dev << ", "
         << backend_mismatches << " backend mismatches, "
         << fmt_seconds(elapsed);
  gate.report("staged scoring equals one-shot scoring at every sentinel", ok,
              detail.str());
}

// --------------------------------------------------------------------------
// 3. Strategy families are monotone in their thresholds.
// --------------------------------------------------------------------------
void check_monotonicity(Gate& gate, const Ensemble& model, const Dataset& valid,
                        const Forest& classifier) {
  long violations = 0;
  auto subset_of = [](const ExitDecision& small, const ExitDecision& big) {
    long bad = 0;
    for (std::size_t i = 0; i < small.continued.size(); ++i) {
      bad += small.continued[i] && !big.continued[i];
    }
    return bad;
  };

  for (const QueryGroup& g : valid.groups) {
    TraversalCost cost;
    ScoringState state = score_prefix(model, g, SentinelConfig{50}, cost);

    const std::vector<int> ks_grid{1, 5, 10, 20, 40};
    for (std::size_t i = 0; i + 1 < ks_grid.size(); ++i) {
      violations += subset_of(apply_ert(state, ks_grid[i]),
                              apply_ert(state, ks_grid[i + 1]));
    }

    const std::vector<double> p_grid{0.0, 0.25, 0.5, 1.0, 2.0};
    for (std::size_t i = 0; i + 1 < p_grid.size(); ++i) {
      violations += subset_of(apply_ept(state, 10, p_grid[i]),
                              apply_ept(state, 10, p_grid[i + 1]));
    }

    // The score-tolerance rule can only widen the rank cutoff.
    for (int k_s : {5, 10}) {
      violations += subset_of(apply_ert(state, k_s),
                              apply_ept(state, k_s, 0.0));
    }

    const std::vector<double> tau_grid{0.1, 0.3, 0.5, 0.7, 0.9};
    for (std::size_t i = 0; i + 1 < tau_grid.size(); ++i) {
      violations += subset_of(
          apply_lear(state, g, classifier, tau_grid[i + 1], cost),
          apply_lear(state, g, classifier, tau_grid[i], cost));
    }
  }
  gate.report("continue sets are monotone in k_s, p, and tau",
              violations == 0, std::to_string(violations) + " violations");
}

// --------------------------------------------------------------------------
// 4. Traversal cost follows the closed form, including the two-document
//    worked example (100 trees, sentinel 50, one continue, ten-tree filter).
// --------------------------------------------------------------------------
void check_cost_exactness(Gate& gate, const Ensemble& model,
                          const Dataset& valid,
                          const std::shared_ptr<const Forest>& classifier) {
  std::uint64_t T = model.trees.size();
  bool ok = true;
  std::ostringstream detail;

  std::vector<StrategyParams> strategies;
  strategies.push_back(ErtParams{10});
  strategies.push_back(EptParams{10, 0.3});
  strategies.push_back(IdealParams{10});
  strategies.push_back(LearParams{classifier, 0.5});
  for (int s : {25, 50}) {
    for (const StrategyParams& params : strategies) {
      PipelineResult result =
          run_pipeline(model, valid, SentinelConfig{s}, params);
      std::uint64_t expected = 0;
      for (std::size_t i = 0; i < valid.groups.size(); ++i) {
        std::uint64_t n = valid.groups[i].documents.size();
        std::uint64_t cont = static_cast<std::uint64_t>(
            result.queries[i].decision.continued_count());
        expected += n * static_cast<std::uint64_t>(s) +
                    cont * (T - static_cast<std::uint64_t>(s));
      }
      if (result.cost.ranker_trees != expected) {
        ok = false;
        detail << "cost mismatch at sentinel " << s << "; ";
      }
    }
  }

  // Hand-checkable instance: document B wins the prefix, the rank feature
  // sends only it forward, and the filter itself costs 2 * 10 trees.
  Ensemble toy;
  toy.num_features = 1;
  for (int t = 0; t < 100; ++t) {
    Tree stump;
    stump.split_feature = {0};
    stump.threshold = {0.5};
    stump.left = {-1};
    stump.right = {-2};
    stump.leaf_value = {1.0, 2.0};
    toy.trees.push_back(std::move(stump));
  }
  auto filter = std::make_shared<Forest>();
  filter->loss = Loss::WeightedLogistic;
  filter->model.num_features = 5;  // raw + partial, minmax, rank, candidates
  {
    Tree rank_stump;
    rank_stump.split_feature = {3};
    rank_stump.threshold = {1.5};
    rank_stump.left = {-1};
    rank_stump.right = {-2};
    rank_stump.leaf_value = {2.0, -2.0};
    filter->model.trees.push_back(std::move(rank_stump));
    for (int t = 1; t < 10; ++t) {
      Tree zero;
      zero.leaf_value = {0.0};
      filter->model.trees.push_back(std::move(zero));
    }
  }
  Dataset pair;
  pair.num_features = 1;
  QueryGroup g;
  g.query_id = 1;
  for (int d = 0; d < 2; ++d) {
    Document doc;
    doc.doc_index = d;
    doc.relevance = d;
    doc.features = {static_cast<double>(d)};
    g.documents.push_back(std::move(doc));
  }
  pair.groups.push_back(std::move(g));

  PipelineResult ee = run_pipeline(toy, pair, SentinelConfig{50},
                                   LearParams{filter, 0.5});
  TraversalCost full = full_scoring_cost(toy, pair);
  double ratio = speedup(ee.cost, full, CostMode::TreeCount);
  if (ee.cost.ranker_trees != 150 || ee.cost.strategy_trees != 20 ||
      full.ranker_trees != 200 || ratio != 200.0 / 170.0) {
    ok = false;
    detail << "worked example: " << full.ranker_trees << "/("
           << ee.cost.ranker_trees << "+" << ee.cost.strategy_trees << "); ";
  }

  if (ok) {
    detail << "closed form holds; worked example = 200/170";
  }
  gate.report("tree counts follow n*s + continued*(T-s) exactly", ok,
              detail.str());
}

// --------------------------------------------------------------------------
// 5. Trainer calculus: derivatives, split search, and loss trajectory.
// --------------------------------------------------------------------------
void check_gbdt(Gate& gate) {
  bool ok = true;
  std::ostringstream detail;

  {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> raw_dist(-8.0, 8.0);
    std::uniform_int_distribution<int> label_dist(0, 1);
    std::uniform_real_distribution<double> w_dist(0.25, 30.0);
    const double step = 1e-5;
    double max_g_err = 0.0, max_h_err = 0.0;
    for (int i = 0; i < 20; ++i) {
      double raw = raw_dist(rng);
      int label = label_dist(rng);
      double w = w_dist(rng);
      auto loss = [&](double z) {
        return w * (std::log1p(std::exp(z)) - label * z);
      };
      GradHess gh = logistic_grad_hess(raw, label, w);
      double num_g = (loss(raw + step) - loss(raw - step)) / (2.0 * step);
      double num_h = (logistic_grad_hess(raw + step, label, w).g -
                      logistic_grad_hess(raw - step, label, w).g) /
                     (2.0 * step);
      max_g_err = std::max(max_g_err, std::abs(gh.g - num_g));
      max_h_err = std::max(max_h_err, std::abs(gh.h - num_h));
    }
    if (max_g_err > 1e-6 || max_h_err > 1e-6) {
      ok = false;
      detail << "finite differences: g err " << max_g_err << ", h err "
             << max_h_err << "; ";
    }
  }

  {
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> val(-3.0, 3.0);
    std::uniform_int_distribution<int> label_dist(0, 1);
    std::uniform_real_distribution<double> w_dist(0.5, 4.0);
    int split_mismatches = 0;
    for (int rep = 0; rep < 10; ++rep) {
      std::size_t n = 6 + rng() % 45;
      std::size_t cols = 1 + rng() % 3;
      DataMatrix m;
      std::vector<double> labels, weights;
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(cols);
        for (double& v : row) v = std::round(val(rng) * 2.0) / 2.0;
        m.push_row(row);
        labels.push_back(static_cast<double>(label_dist(rng)));
        weights.push_back(w_dist(rng));
      }
      labels[0] = 0.0;
      labels[1] = 1.0;
      TrainParams params;
      params.num_trees = 1;
      params.max_leaves = 2;
      params.l2_lambda = (rep % 3) * 0.5;
      params.min_examples_per_leaf = 1 + rep % 3;
      std::vector<double> g(n), h(n);
      for (std::size_t i = 0; i < n; ++i) {
        GradHess gh =
            logistic_grad_hess(0.0, labels[i] > 0.5 ? 1 : 0, weights[i]);
        g[i] = gh.g;
        h[i] = gh.h;
      }
      testsupport::OracleSplit oracle =
          testsupport::brute_force_root_split(m, g, h, params);
      Forest forest = train_forest(m, labels, weights, params);
      const Tree& tree = forest.model.trees[0];
      if (!oracle.found) {
        split_mismatches += tree.num_internal() != 0;
        continue;
      }
      bool same =
          tree.num_internal() == 1 && tree.split_feature[0] == oracle.feature &&
          tree.threshold[0] == oracle.threshold &&
          forest.split_gain[static_cast<std::size_t>(oracle.feature)] ==
              oracle.gain;
      split_mismatches += !same;
    }
    if (split_mismatches != 0) {
      ok = false;
      detail << split_mismatches << " split-oracle mismatches; ";
    }
  }

  {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    DataMatrix m;
    std::vector<double> labels, weights;
    for (int i = 0; i < 40; ++i) {
      std::vector<double> row{val(rng), val(rng), val(rng)};
      double label = row[0] + 0.3 * row[1] > 0.0 ? 1.0 : 0.0;
      if (i % 9 == 0) label = 1.0 - label;
      m.push_row(row);
      labels.push_back(label);
      weights.push_back(static_cast<double>(1 + i % 3));
    }
    TrainParams params;
    params.num_trees = 10;
    params.max_leaves = 8;
    params.min_examples_per_leaf = 2;
    Forest forest = train_forest(m, labels, weights, params);
    int increases = 0;
    for (std::size_t i = 1; i < forest.round_train_loss.size(); ++i) {
      increases += forest.round_train_loss[i] > forest.round_train_loss[i - 1];
    }
    if (increases != 0) {
      ok = false;
      detail << increases << " loss increases; ";
    }
  }

  if (ok) detail << "derivatives, exact splits, loss trajectory";
  gate.report("boosting trainer matches its oracles", ok, detail.str());
}

// --------------------------------------------------------------------------
// 6. Ranking quality metric against exhaustive enumeration.
// --------------------------------------------------------------------------
void check_ndcg_oracle(Gate& gate) {
  std::mt19937_64 rng(107);
  long violations = 0;
  for (int rep = 0; rep < 200; ++rep) {
    std::size_t n = 1 + rng() % 6;
    std::vector<int> rels(n);
    for (int& r : rels) r = static_cast<int>(rng() % 5);
    int k = 1 + static_cast<int>(rng() % 10);

    std::vector<int> best(n);
    std::iota(best.begin(), best.end(), 0);
    std::sort(best.begin(), best.end(), [&](int a, int b) {
      if (rels[static_cast<std::size_t>(a)] !=
          rels[static_cast<std::size_t>(b)]) {
        return rels[static_cast<std::size_t>(a)] >
               rels[static_cast<std::size_t>(b)];
      }
      return a < b;
    });
    double best_value = ndcg_at_k(best, rels, k);

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      violations += ndcg_at_k(perm, rels, k) > best_value + 1e-12;
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  std::vector<int> ranking{0, 1};
  std::vector<int> rels{0, 3};
  double hand = ndcg_at_k(ranking, rels, 2);
  double expected = 1.0 / std::log2(3.0);
  bool hand_ok = std::abs(hand - expected) < 1e-6;

  std::ostringstream detail;
  detail << violations << " optimality violations, swapped-pair value "
         << hand;
  gate.report("relevance-descending order maximizes the quality metric",
              violations == 0 && hand_ok, detail.str());
}

// --------------------------------------------------------------------------
// 7. Learned filter earns its keep on the frozen benchmark.
// --------------------------------------------------------------------------
void check_lear_end_to_end(Gate& gate, const Ensemble& model,
                           const Dataset& train, const Dataset& valid,
                           std::shared_ptr<const Forest>& classifier_out) {
  auto start = Clock::now();
  // A small filter is the point: every classifier tree is overhead charged at
  // each sentinel, so a 4-tree forest at a permissive threshold beats a deeper
  // one that has to be throttled to stay under budget.
  constexpr int kLabelDepth = 10;
  constexpr double kTau = 0.15;
  std::vector<ExitExample> train_set =
      build_exit_training_set(model, train, SentinelConfig{50}, kLabelDepth, 4);
  DataMatrix data;
  std::vector<double> labels, weights;
  for (const ExitExample& ex : train_set) {
    data.push_row(ex.features);
    labels.push_back(ex.label == ExitLabel::Continue ? 1.0 : 0.0);
    weights.push_back(ex.weight);
  }
  TrainParams params;
  params.num_trees = 4;
  params.max_leaves = 16;
  params.learning_rate = 0.3;
  params.min_examples_per_leaf = 20;
  auto classifier =
      std::make_shared<const Forest>(train_forest(data, labels, weights, params));
  classifier_out = classifier;

  PipelineOptions opts;
  opts.threads = 4;
  PipelineResult ee = run_pipeline(model, valid, SentinelConfig{50},
                                   LearParams{classifier, kTau}, opts);
  PipelineResult full =
      run_pipeline(model, valid, SentinelConfig{50}, FullParams{}, opts);
  double ndcg_ee = mean_ndcg_of(ee, valid, 10);
  double ndcg_full = mean_ndcg_of(full, valid, 10);
  double delta_pct = 100.0 * (ndcg_ee - ndcg_full) / ndcg_full;
  double ratio =
      speedup(ee.cost, full_scoring_cost(model, valid), CostMode::TreeCount);

  std::vector<ExitExample> valid_set =
      build_exit_training_set(model, valid, SentinelConfig{50}, kLabelDepth, 4);
  long tp = 0, actual = 0;
  for (const ExitExample& ex : valid_set) {
    if (ex.label != ExitLabel::Continue) continue;
    ++actual;
    tp += predict_proba(*classifier, ex.features) >= kTau;
  }
  double recall = actual == 0 ? 1.0 : static_cast<double>(tp) /
                                          static_cast<double>(actual);
  double elapsed = seconds_since(start);

  bool ok = ratio >= 1.5 && delta_pct >= -1.0 && recall >= 0.90 &&
            elapsed < 120.0;
  std::ostringstream detail;
  detail.precision(4);
  detail << "speedup " << ratio << "x, quality delta " << delta_pct
         << "%, continue recall " << recall << ", " << fmt_seconds(elapsed);
  gate.report("learned filter: >= 1.5x cheaper within 1% quality", ok,
              detail.str());
}

// --------------------------------------------------------------------------
// 8. Model parsers agree with producer outputs and round-trip losslessly.
// --------------------------------------------------------------------------
void check_parser_fidelity(Gate& gate, const Ensemble& trained) {
  std::string dir(testpaths::kFixturesDir);
  Ensemble imported = load_model_file(dir + "/lightgbm_model.txt");
  auto inputs = read_csv_rows(dir + "/lightgbm_inputs.csv");
  auto expected = read_csv_rows(dir + "/lightgbm_expected.csv");

  bool ok = inputs.size() == 100 && expected.size() == inputs.size();
  double max_dev = 0.0;
  double max_roundtrip = 0.0;
  if (ok) {
    Ensemble back = load_native(save_native(imported));
    Ensemble trained_back = load_native(save_native(trained));
    std::mt19937_64 rng(109);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      double score = score_full(imported, inputs[i]);
      max_dev = std::max(max_dev, std::abs(score - expected[i][0]));
      max_roundtrip = std::max(
          max_roundtrip, std::abs(score_full(back, inputs[i]) - score));

      std::vector<double> probe(
          static_cast<std::size_t>(trained.num_features));
      for (double& v : probe) v = unit(rng);
      max_roundtrip = std::max(max_roundtrip,
                               std::abs(score_full(trained_back, probe) -
                                        score_full(trained, probe)));
    }
    ok = max_dev < 1e-6 && max_roundtrip < 1e-12;
  }
  std::ostringstream detail;
  detail << "producer dev " << max_dev << ", round-trip dev " << max_roundtrip;
  gate.report("imported models score like their producer", ok, detail.str());
}

// --------------------------------------------------------------------------
// 9. The sweep command is bytewise reproducible regardless of threading.
// --------------------------------------------------------------------------
void check_sweep_determinism(Gate& gate, const Ensemble& model,
                             const Dataset& valid) {
  std::string dir(testpaths::kScratchDir);
  std::string model_path = dir + "/acceptance.model.json";
  std::string data_path = dir + "/acceptance.valid.letor";
  save_native_file(model, model_path);
  write_letor(valid, data_path);

  std::vector<std::string> outputs;
  bool ran_ok = true;
  int run_id = 0;
  for (int threads : {1, 8}) {
    for (int rep = 0; rep < 3; ++rep) {
      std::string out = dir + "/acceptance.sweep." + std::to_string(run_id++) +
                        ".csv";
      std::string cmd = std::string("'") + testpaths::kCliPath +
                        "' sweep --model '" + model_path + "' --data '" +
                        data_path + "' --sentinels 25 50 --k 10" +
                        " --ert-grid 5,10 --ept-grid 0.1:0.5:0.2" +
                        " --threads " + std::to_string(threads) + " --out '" +
                        out + "' > /dev/null 2>&1";
      ran_ok = ran_ok && std::system(cmd.c_str()) == 0;
      outputs.push_back(out);
    }
  }

  bool identical = ran_ok;
  std::string reference = ran_ok ? slurp(outputs[0]) : "";
  for (const std::string& path : outputs) {
    identical = identical && !reference.empty() && slurp(path) == reference;
  }
  std::ostringstream detail;
  detail << outputs.size() << " runs across 1 and 8 threads";
  if (!ran_ok) detail << ", command failed";
  gate.report("sweep output is byte-identical across runs and threads",
              identical, detail.str());
}

}  // namespace

int main() {
  Gate gate;

  testsupport::SyntheticConfig train_cfg;
  train_cfg.num_queries = 200;
  train_cfg.seed = 1;
  testsupport::SyntheticConfig valid_cfg;
  valid_cfg.num_queries = 150;
  valid_cfg.seed = 2;
  testsupport::SyntheticConfig test_cfg;
  test_cfg.num_queries = 500;
  test_cfg.seed = 3;

  Dataset train = make_synthetic(train_cfg);
  Dataset valid = make_synthetic(valid_cfg);
  Dataset test = make_synthetic(test_cfg);

  // The ranker is part of criterion 1's time budget.
  auto ranker_start = Clock::now();
  Forest ranker = train_ranker(train, 100);
  const Ensemble& model = ranker.model;

  check_ideal_zero_delta(gate, model, test, ranker_start);
  check_staging_identity(gate, model, test);

  std::shared_ptr<const Forest> classifier;
  check_lear_end_to_end(gate, model, train, valid, classifier);
  check_monotonicity(gate, model, valid, *classifier);
  check_cost_exactness(gate, model, valid, classifier);
  check_gbdt(gate);
  check_ndcg_oracle(gate);
  check_parser_fidelity(gate, model);
  check_sweep_determinism(gate, model, valid);

  if (gate.failures != 0) {
    std::cout << gate.failures << " acceptance check(s) failed\n";
    return 1;
  }
  std::cout << "all acceptance checks passed\n";
  return 0;
}
