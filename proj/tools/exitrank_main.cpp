#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "exitrank/dataset.hpp"
#include "exitrank/ensemble.hpp"
#include "exitrank/errors.hpp"
#include "exitrank/exitset.hpp"
#include "exitrank/gbdt.hpp"
#include "exitrank/metrics.hpp"
#include "exitrank/scorer.hpp"
#include "exitrank/strategies.hpp"
#include "exitrank/text.hpp"

namespace {

using namespace exitrank;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

int default_threads() {
  const char* v = std::getenv("EXITRANK_THREADS");
  if (v == nullptr || *v == '\0') return 1;
  long long t = 0;
  if (parse_int(v, t) && t >= 1) return static_cast<int>(t);
  std::cerr << "warning: ignoring invalid EXITRANK_THREADS value \"" << v
            << "\"\n";
  return 1;
}

// Relative output paths land under EXITRANK_OUTPUT_DIR when it is set.
std::string resolve_out(const std::string& path) {
  const char* dir = std::getenv("EXITRANK_OUTPUT_DIR");
  if (dir == nullptr || *dir == '\0' || path.empty()) return path;
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(dir) / p).string();
}

void ensure_parent_dir(const std::string& path) {
  std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

double round9(double v) { return std::round(v * 1e9) / 1e9; }

// Either an explicit comma list ("0.3,0.5") or an inclusive range
// ("0.3:0.8:0.1").
std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
      std::size_t next = spec.find(':', pos);
      if (next == std::string::npos) next = spec.size();
      parts.push_back(spec.substr(pos, next - pos));
      pos = next + 1;
    }
    if (parts.size() != 3) {
      throw std::invalid_argument("grid \"" + spec +
                                  "\" must be start:stop:step");
    }
    double start = 0.0, stop = 0.0, step = 0.0;
    if (!parse_double(parts[0], start) || !parse_double(parts[1], stop) ||
        !parse_double(parts[2], step)) {
      throw std::invalid_argument("grid \"" + spec +
                                  "\" has a malformed number");
    }
    if (!(step > 0.0)) throw std::invalid_argument("grid step must be > 0");
    if (stop < start) throw std::invalid_argument("grid stop < start");
    for (int i = 0;; ++i) {
      double v = round9(start + static_cast<double>(i) * step);
      if (v > stop + step * 1e-6) break;
      out.push_back(v);
    }
  } else {
    std::size_t pos = 0;
    while (pos <= spec.size()) {
      std::size_t next = spec.find(',', pos);
      if (next == std::string::npos) next = spec.size();
      std::string tok(strip(spec.substr(pos, next - pos)));
      if (!tok.empty()) {
        double v = 0.0;
        if (!parse_double(tok, v)) {
          throw std::invalid_argument("grid \"" + spec +
                                      "\" has a malformed number");
        }
        out.push_back(v);
      }
      pos = next + 1;
    }
  }
  if (out.empty()) throw std::invalid_argument("grid \"" + spec + "\" is empty");
  return out;
}

std::vector<int> parse_int_grid(const std::string& spec) {
  std::vector<int> out;
  for (double v : parse_grid(spec)) {
    double r = std::round(v);
    if (std::abs(v - r) > 1e-9 || r < 1.0) {
      throw std::invalid_argument("grid \"" + spec +
                                  "\" must hold positive integers");
    }
    out.push_back(static_cast<int>(r));
  }
  return out;
}

struct NdcgFlags {
  bool linear_gain = false;
  bool skip_zero_idcg = false;

  NdcgOptions options() const {
    NdcgOptions opts;
    opts.gain = linear_gain ? NdcgGain::Linear : NdcgGain::Exponential;
    opts.zero_idcg =
        skip_zero_idcg ? ZeroIdcgPolicy::Skip : ZeroIdcgPolicy::ScoreOne;
    return opts;
  }
};

double pipeline_mean_ndcg(const PipelineResult& result, const Dataset& ds,
                          int k, const NdcgFlags& flags) {
  NdcgOptions opts = flags.options();
  std::vector<QueryNdcg> per_query;
  per_query.reserve(ds.groups.size());
  for (std::size_t gi = 0; gi < ds.groups.size(); ++gi) {
    const QueryGroup& g = ds.groups[gi];
    std::vector<int> rels(g.documents.size());
    for (std::size_t i = 0; i < rels.size(); ++i) {
      rels[i] = g.documents[i].relevance;
    }
    per_query.push_back(query_ndcg(result.queries[gi].ranking, rels, k, opts));
  }
  return mean_ndcg(per_query, opts.zero_idcg);
}

void write_text_file(const std::string& path, const std::string& body) {
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open output file: " + path);
  out << body;
}

// Emitted reports must be reproducible; refuse to write non-finite values.
double finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw DataError(std::string("non-finite ") + what + " in report");
  }
  return v;
}

void write_json_report(const std::string& path, const json& report) {
  write_text_file(resolve_out(path), report.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// train-ranker
// ---------------------------------------------------------------------------

struct TrainRankerArgs {
  std::string train_path;
  std::string valid_path;
  std::string out_path;
  std::string report_path;
  TrainParams params;
  int ndcg_k = 10;
  NdcgFlags ndcg;
};

// Incrementally rescoring the validation split after each boosting round is
// much cheaper than rescoring with the whole forest every time.
struct ValidTracker {
  const Dataset& ds;
  int k;
  NdcgFlags flags;
  std::vector<double> raw;
  std::vector<std::size_t> offsets;
  std::vector<double> per_round;

  ValidTracker(const Dataset& valid, int ndcg_k, const NdcgFlags& f)
      : ds(valid), k(ndcg_k), flags(f) {
    offsets.reserve(ds.groups.size());
    std::size_t total = 0;
    for (const QueryGroup& g : ds.groups) {
      offsets.push_back(total);
      total += g.documents.size();
    }
    raw.assign(total, 0.0);
  }

  void observe(const Tree& tree) {
    NdcgOptions opts = flags.options();
    std::vector<QueryNdcg> per_query;
    per_query.reserve(ds.groups.size());
    for (std::size_t gi = 0; gi < ds.groups.size(); ++gi) {
      const QueryGroup& g = ds.groups[gi];
      std::size_t off = offsets[gi];
      for (std::size_t i = 0; i < g.documents.size(); ++i) {
        raw[off + i] += eval_tree(tree, g.documents[i].features);
      }
      std::vector<int> ranking = rank_descending(
          std::span<const double>(raw.data() + off, g.documents.size()));
      std::vector<int> rels(g.documents.size());
      for (std::size_t i = 0; i < rels.size(); ++i) {
        rels[i] = g.documents[i].relevance;
      }
      per_query.push_back(query_ndcg(ranking, rels, k, opts));
    }
    per_round.push_back(mean_ndcg(per_query, opts.zero_idcg));
  }
};

int cmd_train_ranker(const TrainRankerArgs& args) {
  Dataset train = load_dataset_file(args.train_path);
  std::optional<Dataset> valid;
  if (!args.valid_path.empty()) {
    valid = load_dataset_file(args.valid_path, train.num_features);
  }

  DataMatrix data;
  std::vector<double> labels, weights;
  for (const QueryGroup& g : train.groups) {
    for (const Document& d : g.documents) {
      data.push_row(d.features);
      labels.push_back(static_cast<double>(d.relevance));
      weights.push_back(1.0);
    }
  }

  TrainParams params = args.params;
  params.loss = Loss::Squared;

  std::optional<ValidTracker> tracker;
  if (valid) tracker.emplace(*valid, args.ndcg_k, args.ndcg);
  RoundObserver observer;
  if (tracker) {
    observer = [&](int, const Tree& tree) { tracker->observe(tree); };
  }

  Forest forest = train_forest(data, labels, weights, params, observer);

  for (std::size_t r = 0; r < forest.round_train_loss.size(); ++r) {
    std::cout << "round " << (r + 1) << " train_loss "
              << fmt_double(forest.round_train_loss[r]);
    if (tracker) {
      std::cout << " valid_ndcg@" << args.ndcg_k << " "
                << fmt_double(tracker->per_round[r]);
    }
    std::cout << "\n";
  }
  if (forest.constant_warning) {
    std::cerr << "warning: model is constant (no split improved the loss)\n";
  }

  std::string out = resolve_out(args.out_path);
  ensure_parent_dir(out);
  save_native_file(forest.model, out);
  std::cout << "model written to " << out << "\n";

  if (!args.report_path.empty()) {
    json report;
    report["command"] = "train-ranker";
    report["config"] = {{"train", args.train_path},
                        {"valid", args.valid_path},
                        {"out", out},
                        {"num_trees", params.num_trees},
                        {"max_leaves", params.max_leaves},
                        {"learning_rate", params.learning_rate},
                        {"l2_lambda", params.l2_lambda},
                        {"min_examples_per_leaf", params.min_examples_per_leaf},
                        {"ndcg_k", args.ndcg_k}};
    report["results"]["train_loss"] = forest.round_train_loss;
    if (tracker) report["results"]["valid_ndcg"] = tracker->per_round;
    report["results"]["constant_warning"] = forest.constant_warning;
    write_json_report(args.report_path, report);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// train-exit / eval-classifier
// ---------------------------------------------------------------------------

struct TauRow {
  double tau = 0.0;
  PrecisionRecall pr;
  int predicted_continue = 0;
};

struct TauReport {
  std::vector<TauRow> rows;
  double recommended_tau = 0.0;
  bool floor_met = false;
  bool no_continue_truth = false;
};

TauReport tau_sweep(const Forest& classifier,
                    const std::vector<ExitExample>& examples,
                    const std::vector<double>& grid,
                    double exit_recall_floor) {
  std::vector<double> proba(examples.size());
  std::vector<ExitLabel> truth(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    proba[i] = predict_proba(classifier, examples[i].features);
    truth[i] = examples[i].label;
  }

  TauReport report;
  report.no_continue_truth =
      std::none_of(truth.begin(), truth.end(), [](ExitLabel l) {
        return l == ExitLabel::Continue;
      });

  std::vector<ExitLabel> predicted(examples.size());
  for (double tau : grid) {
    int n_continue = 0;
    for (std::size_t i = 0; i < proba.size(); ++i) {
      bool cont = proba[i] >= tau;
      predicted[i] = cont ? ExitLabel::Continue : ExitLabel::Exit;
      n_continue += cont;
    }
    report.rows.push_back({tau, precision_recall(truth, predicted), n_continue});
  }

  // Continue recall is antitone in tau, so the smallest tau whose Exit
  // recall clears the floor maximizes it.
  for (const TauRow& row : report.rows) {
    if (row.pr.exit_cls.recall >= exit_recall_floor) {
      report.recommended_tau = row.tau;
      report.floor_met = true;
      break;
    }
  }
  if (!report.floor_met && !report.rows.empty()) {
    report.recommended_tau = report.rows.back().tau;
  }
  return report;
}

void print_tau_table(const TauReport& report) {
  std::cout << "tau    cont_prec  cont_rec   exit_prec  exit_rec   "
               "predicted_continue\n";
  for (const TauRow& row : report.rows) {
    auto cell = [](double v) {
      std::string s = fmt_double(v);
      if (s.size() < 9) s.resize(9, ' ');
      return s;
    };
    std::cout << cell(row.tau).substr(0, 5) << "  " << cell(row.pr.continue_cls.precision)
              << "  " << cell(row.pr.continue_cls.recall) << "  "
              << cell(row.pr.exit_cls.precision) << "  "
              << cell(row.pr.exit_cls.recall) << "  " << row.predicted_continue
              << "\n";
  }
}

json tau_report_json(const TauReport& report, double floor) {
  json rows = json::array();
  for (const TauRow& row : report.rows) {
    rows.push_back({{"tau", row.tau},
                    {"continue_precision", row.pr.continue_cls.precision},
                    {"continue_recall", row.pr.continue_cls.recall},
                    {"exit_precision", row.pr.exit_cls.precision},
                    {"exit_recall", row.pr.exit_cls.recall},
                    {"predicted_continue", row.predicted_continue}});
  }
  return {{"rows", rows},
          {"recommended_tau", report.recommended_tau},
          {"exit_recall_floor", floor},
          {"floor_met", report.floor_met}};
}

std::string sentinel_feature_name(int index, int num_raw) {
  switch (index - num_raw) {
    case 0:
      return "partial_score";
    case 1:
      return "minmax_score";
    case 2:
      return "sentinel_rank";
    case 3:
      return "n_candidates";
    default:
      return "f" + std::to_string(index + 1);
  }
}

struct TrainExitArgs {
  std::string model_path;
  std::string train_path;
  std::string valid_path;
  std::string out_path;
  std::string report_path;
  std::string dump_prefix;
  int sentinel = 50;
  int k_label = 15;
  TrainParams params;
  std::string tau_grid = "0.1:0.7:0.1";
  double exit_recall_floor = 0.75;
  int top_features = 0;
  int threads = 1;
};

int cmd_train_exit(const TrainExitArgs& args) {
  Ensemble model = load_model_file(args.model_path);
  Dataset train = load_dataset_file(args.train_path, model.num_features);

  SentinelConfig sentinel{args.sentinel};
  std::vector<ExitExample> examples = build_exit_training_set(
      model, train, sentinel, args.k_label, args.threads);

  std::size_t n_continue = 0;
  for (const ExitExample& ex : examples) {
    n_continue += ex.label == ExitLabel::Continue;
  }
  std::cout << "training set: " << examples.size() << " examples, "
            << n_continue << " Continue / " << (examples.size() - n_continue)
            << " Exit\n";

  if (!args.dump_prefix.empty()) {
    std::string prefix = resolve_out(args.dump_prefix);
    ensure_parent_dir(prefix);
    write_exit_training_set(examples, model.num_features, prefix + ".letor",
                            prefix + ".weights");
    std::cout << "training set dumped to " << prefix << ".letor / "
              << prefix << ".weights\n";
  }

  DataMatrix data;
  std::vector<double> labels, weights;
  for (const ExitExample& ex : examples) {
    data.push_row(ex.features);
    labels.push_back(ex.label == ExitLabel::Continue ? 1.0 : 0.0);
    weights.push_back(ex.weight);
  }

  TrainParams params = args.params;
  params.loss = Loss::WeightedLogistic;
  Forest classifier = train_forest(data, labels, weights, params);

  if (args.top_features > 0) {
    auto importance = feature_importance(classifier);
    std::size_t keep = std::min(importance.size(),
                                static_cast<std::size_t>(args.top_features));
    std::cout << "feature importance (top " << keep << "):\n";
    std::vector<int> subset;
    for (std::size_t i = 0; i < keep; ++i) {
      subset.push_back(importance[i].first);
      std::cout << "  "
                << sentinel_feature_name(importance[i].first,
                                         model.num_features)
                << " gain " << fmt_double(importance[i].second) << "\n";
    }
    if (subset.empty()) {
      std::cerr << "warning: no informative features; keeping full layout\n";
    } else {
      params.feature_subset = subset;
      std::cout << "retraining on the top " << keep << " features\n";
      classifier = train_forest(data, labels, weights, params);
    }
  }

  if (classifier.constant_warning) {
    std::cerr << "warning: classifier is constant (no split improved the "
                 "loss)\n";
  }

  std::string out = resolve_out(args.out_path);
  ensure_parent_dir(out);
  save_forest_file(classifier, out);
  std::cout << "classifier written to " << out << "\n";

  json report;
  report["command"] = "train-exit";
  report["config"] = {{"model", args.model_path},
                      {"train", args.train_path},
                      {"valid", args.valid_path},
                      {"out", out},
                      {"sentinel", args.sentinel},
                      {"k_label", args.k_label},
                      {"num_trees", params.num_trees},
                      {"max_leaves", params.max_leaves},
                      {"learning_rate", params.learning_rate},
                      {"l2_lambda", params.l2_lambda},
                      {"min_examples_per_leaf", params.min_examples_per_leaf},
                      {"tau_grid", args.tau_grid},
                      {"exit_recall_floor", args.exit_recall_floor},
                      {"top_features", args.top_features},
                      {"threads", args.threads}};
  report["results"]["examples"] = examples.size();
  report["results"]["continue_examples"] = n_continue;
  report["results"]["train_loss"] = classifier.round_train_loss;
  report["results"]["constant_warning"] = classifier.constant_warning;

  if (!args.valid_path.empty()) {
    Dataset valid = load_dataset_file(args.valid_path, model.num_features);
    std::vector<ExitExample> valid_examples = build_exit_training_set(
        model, valid, sentinel, args.k_label, args.threads);
    TauReport tau = tau_sweep(classifier, valid_examples,
                              parse_grid(args.tau_grid),
                              args.exit_recall_floor);
    std::cout << "tau sweep on " << args.valid_path << ":\n";
    print_tau_table(tau);
    if (tau.no_continue_truth) {
      std::cerr << "warning: validation split has no Continue examples; "
                   "recall defaults to 1.0\n";
    }
    if (!tau.floor_met) {
      std::cerr << "warning: no tau reaches exit recall "
                << fmt_double(args.exit_recall_floor)
                << "; recommending the most conservative grid point\n";
    }
    std::cout << "recommended tau: " << fmt_double(tau.recommended_tau)
              << " (exit recall floor " << fmt_double(args.exit_recall_floor)
              << ")\n";
    report["results"]["tau_sweep"] =
        tau_report_json(tau, args.exit_recall_floor);
  }

  if (!args.report_path.empty()) write_json_report(args.report_path, report);
  return 0;
}

struct EvalClassifierArgs {
  std::string model_path;
  std::string classifier_path;
  std::string data_path;
  std::string report_path;
  int sentinel = 50;
  int k_label = 15;
  std::string tau_grid = "0.1:0.7:0.1";
  double exit_recall_floor = 0.75;
  int threads = 1;
};

int cmd_eval_classifier(const EvalClassifierArgs& args) {
  Ensemble model = load_model_file(args.model_path);
  Forest classifier = load_forest_file(args.classifier_path);
  Dataset data = load_dataset_file(args.data_path, model.num_features);

  std::vector<ExitExample> examples = build_exit_training_set(
      model, data, SentinelConfig{args.sentinel}, args.k_label, args.threads);
  TauReport tau = tau_sweep(classifier, examples, parse_grid(args.tau_grid),
                            args.exit_recall_floor);

  std::size_t n_continue = 0;
  for (const ExitExample& ex : examples) {
    n_continue += ex.label == ExitLabel::Continue;
  }
  std::cout << examples.size() << " examples, " << n_continue
            << " Continue / " << (examples.size() - n_continue) << " Exit\n";
  print_tau_table(tau);
  if (tau.no_continue_truth) {
    std::cerr << "warning: split has no Continue examples; recall defaults "
                 "to 1.0\n";
  }
  std::cout << "recommended tau: " << fmt_double(tau.recommended_tau) << "\n";

  if (!args.report_path.empty()) {
    json report;
    report["command"] = "eval-classifier";
    report["config"] = {{"model", args.model_path},
                        {"classifier", args.classifier_path},
                        {"data", args.data_path},
                        {"sentinel", args.sentinel},
                        {"k_label", args.k_label},
                        {"tau_grid", args.tau_grid},
                        {"exit_recall_floor", args.exit_recall_floor},
                        {"threads", args.threads}};
    report["results"] = tau_report_json(tau, args.exit_recall_floor);
    report["results"]["examples"] = examples.size();
    report["results"]["continue_examples"] = n_continue;
    write_json_report(args.report_path, report);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// run / sweep
// ---------------------------------------------------------------------------

struct StrategySpec {
  std::string name;  // full | ideal | ert | ept | lear
  double threshold = 0.0;
  StrategyParams params;
};

struct RunArgs {
  std::string model_path;
  std::string data_path;
  std::string classifier_path;
  std::string report_path;
  std::string strategy = "full";
  int sentinel = 50;
  int k_s = 15;
  double p = 0.5;
  double tau = 0.5;
  int k = 10;
  bool merge_by_score = false;
  bool wall_clock = false;
  int reps = 5;
  int threads = 1;
  NdcgFlags ndcg;
};

std::shared_ptr<const Forest> load_classifier_or_fail(
    const std::string& path, const std::string& strategy) {
  if (path.empty()) {
    throw std::invalid_argument("strategy " + strategy +
                                " requires --classifier");
  }
  return std::make_shared<Forest>(load_forest_file(path));
}

StrategySpec make_strategy(const std::string& name, const RunArgs& args,
                           const std::shared_ptr<const Forest>& classifier) {
  StrategySpec spec;
  spec.name = name;
  if (name == "full") {
    spec.params = FullParams{};
    spec.threshold = 0.0;
  } else if (name == "ideal") {
    spec.params = IdealParams{args.k};
    spec.threshold = static_cast<double>(args.k);
  } else if (name == "ert") {
    spec.params = ErtParams{args.k_s};
    spec.threshold = static_cast<double>(args.k_s);
  } else if (name == "ept") {
    spec.params = EptParams{args.k_s, args.p};
    spec.threshold = args.p;
  } else if (name == "lear") {
    spec.params = LearParams{classifier, args.tau};
    spec.threshold = args.tau;
  } else {
    throw std::invalid_argument("unknown strategy \"" + name +
                                "\" (expected full|ideal|ert|ept|lear)");
  }
  return spec;
}

std::uint64_t median_wall_ns(const Ensemble& model, const Dataset& data,
                             SentinelConfig sentinel,
                             const StrategyParams& params,
                             const PipelineOptions& opts, int reps) {
  std::vector<std::uint64_t> samples;
  samples.reserve(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    PipelineResult result = run_pipeline(model, data, sentinel, params, opts);
    samples.push_back(result.cost.wall_ns.value_or(0));
  }
  std::sort(samples.begin(), samples.end());
  return samples[samples.size() / 2];
}

int cmd_run(const RunArgs& args) {
  Ensemble model = load_model_file(args.model_path);
  Dataset data = load_dataset_file(args.data_path, model.num_features);

  std::shared_ptr<const Forest> classifier;
  if (args.strategy == "lear") {
    classifier = load_classifier_or_fail(args.classifier_path, args.strategy);
  }
  StrategySpec spec = make_strategy(args.strategy, args, classifier);

  SentinelConfig sentinel{args.sentinel};
  PipelineOptions opts;
  opts.merge_by_score = args.merge_by_score;
  opts.threads = args.threads;

  PipelineResult ee = run_pipeline(model, data, sentinel, spec.params, opts);
  PipelineResult full =
      run_pipeline(model, data, sentinel, FullParams{}, opts);
  TraversalCost full_cost = full_scoring_cost(model, data);

  double ndcg = pipeline_mean_ndcg(ee, data, args.k, args.ndcg);
  double ndcg_full = pipeline_mean_ndcg(full, data, args.k, args.ndcg);
  double delta_pct = 100.0 * (ndcg - ndcg_full) / ndcg_full;
  double tree_speedup = speedup(ee.cost, full_cost, CostMode::TreeCount);
  std::vector<int> counts = ee.continued_counts();
  CutStats cuts = cut_statistics(counts);

  std::optional<double> wall_speedup;
  std::uint64_t ee_wall = 0, full_wall = 0;
  if (args.wall_clock) {
    int reps = std::max(args.reps, 5);
    ee_wall = median_wall_ns(model, data, sentinel, spec.params, opts, reps);
    full_wall = median_wall_ns(model, data, sentinel, FullParams{}, opts, reps);
    TraversalCost ee_t, full_t;
    ee_t.wall_ns = ee_wall;
    full_t.wall_ns = full_wall;
    wall_speedup = speedup(ee_t, full_t, CostMode::WallClock);
  }

  std::cout << "strategy " << spec.name << "  sentinel " << args.sentinel;
  if (spec.name == "ert") {
    std::cout << "  k_s " << args.k_s;
  } else if (spec.name == "ept") {
    std::cout << "  k_s " << args.k_s << "  p " << fmt_double(args.p);
  } else if (spec.name == "lear") {
    std::cout << "  tau " << fmt_double(args.tau);
  } else if (spec.name == "ideal") {
    std::cout << "  k " << args.k;
  }
  std::cout << "\n";
  std::cout << "ndcg@" << args.k << "      " << fmt_double(ndcg) << " (full "
            << fmt_double(ndcg_full) << ")\n";
  std::cout << "delta_pct   " << fmt_double(delta_pct) << "\n";
  std::cout << "speedup     " << fmt_double(tree_speedup) << "x (tree count)\n";
  if (wall_speedup) {
    std::cout << "speedup     " << fmt_double(*wall_speedup)
              << "x (wall clock, median of " << std::max(args.reps, 5)
              << ")\n";
  }
  std::cout << "ks_mu       " << fmt_double(cuts.mean) << "\n";
  std::cout << "ks_sigma    " << fmt_double(cuts.stddev) << "\n";
  std::cout << "trees       full " << full_cost.ranker_trees << ", ee "
            << ee.cost.ranker_trees << " + " << ee.cost.strategy_trees
            << " strategy\n";

  if (!args.report_path.empty()) {
    json report;
    report["command"] = "run";
    report["config"] = {{"model", args.model_path},
                        {"data", args.data_path},
                        {"classifier", args.classifier_path},
                        {"strategy", spec.name},
                        {"sentinel", args.sentinel},
                        {"k_s", args.k_s},
                        {"p", args.p},
                        {"tau", args.tau},
                        {"k", args.k},
                        {"merge_by_score", args.merge_by_score},
                        {"wall_clock", args.wall_clock},
                        {"threads", args.threads},
                        {"linear_gain", args.ndcg.linear_gain},
                        {"skip_zero_idcg", args.ndcg.skip_zero_idcg}};
    json results = {{"ndcg", finite(ndcg, "ndcg")},
                    {"ndcg_full", finite(ndcg_full, "ndcg_full")},
                    {"delta_pct", finite(delta_pct, "delta_pct")},
                    {"speedup_tree_count", finite(tree_speedup, "speedup")},
                    {"ks_mu", finite(cuts.mean, "ks_mu")},
                    {"ks_sigma", finite(cuts.stddev, "ks_sigma")},
                    {"cost",
                     {{"ranker_trees", ee.cost.ranker_trees},
                      {"strategy_trees", ee.cost.strategy_trees}}},
                    {"cost_full",
                     {{"ranker_trees", full_cost.ranker_trees},
                      {"strategy_trees", full_cost.strategy_trees}}}};
    if (wall_speedup) {
      results["speedup_wall_clock"] = *wall_speedup;
      results["wall_ns"] = ee_wall;
      results["wall_ns_full"] = full_wall;
    }
    report["results"] = results;
    write_json_report(args.report_path, report);
  }
  return 0;
}

struct SweepArgs {
  std::string model_path;
  std::string data_path;
  std::string classifier_path;
  std::string out_path;
  std::vector<std::string> strategies;
  std::vector<int> sentinels{50, 100, 200};
  std::string ert_grid = "15,20";
  std::string ept_grid = "0.3:0.8:0.1";
  std::string tau_grid = "0.1:0.7:0.1";
  int ept_k_s = 15;
  int k = 10;
  bool merge_by_score = false;
  int threads = 1;
  NdcgFlags ndcg;
};

int cmd_sweep(const SweepArgs& args) {
  Ensemble model = load_model_file(args.model_path);
  Dataset data = load_dataset_file(args.data_path, model.num_features);

  std::vector<std::string> strategies = args.strategies;
  if (strategies.empty()) {
    strategies = {"full", "ideal", "ert", "ept"};
    if (!args.classifier_path.empty()) strategies.push_back("lear");
  }
  std::shared_ptr<const Forest> classifier;
  for (const std::string& name : strategies) {
    if (name == "lear") {
      classifier = load_classifier_or_fail(args.classifier_path, name);
    }
  }

  int num_trees = static_cast<int>(model.trees.size());
  std::vector<int> sentinels;
  for (int s : args.sentinels) {
    if (s < 1 || s > num_trees) {
      std::cerr << "warning: skipping sentinel " << s
                << " outside 1.." << num_trees << "\n";
      continue;
    }
    sentinels.push_back(s);
  }
  if (sentinels.empty()) {
    throw std::invalid_argument("no usable sentinel for a " +
                                std::to_string(num_trees) + "-tree model");
  }

  PipelineOptions opts;
  opts.merge_by_score = args.merge_by_score;
  opts.threads = args.threads;

  TraversalCost full_cost = full_scoring_cost(model, data);
  PipelineResult full_run = run_pipeline(model, data, SentinelConfig{sentinels[0]},
                                         FullParams{}, opts);
  double ndcg_full = pipeline_mean_ndcg(full_run, data, args.k, args.ndcg);

  auto thresholds_for = [&](const std::string& name) -> std::vector<double> {
    if (name == "full") return {0.0};
    if (name == "ideal") return {static_cast<double>(args.k)};
    if (name == "ert") {
      std::vector<double> out;
      for (int v : parse_int_grid(args.ert_grid)) {
        out.push_back(static_cast<double>(v));
      }
      return out;
    }
    if (name == "ept") return parse_grid(args.ept_grid);
    if (name == "lear") return parse_grid(args.tau_grid);
    throw std::invalid_argument("unknown strategy \"" + name +
                                "\" (expected full|ideal|ert|ept|lear)");
  };

  std::string body = "strategy,sentinel,threshold,ndcg,delta_pct,speedup,"
                     "ks_mu,ks_sigma\n";
  for (const std::string& name : strategies) {
    for (double threshold : thresholds_for(name)) {
      StrategyParams params;
      if (name == "full") {
        params = FullParams{};
      } else if (name == "ideal") {
        params = IdealParams{args.k};
      } else if (name == "ert") {
        params = ErtParams{static_cast<int>(threshold)};
      } else if (name == "ept") {
        params = EptParams{args.ept_k_s, threshold};
      } else {
        params = LearParams{classifier, threshold};
      }
      for (int s : sentinels) {
        PipelineResult result =
            run_pipeline(model, data, SentinelConfig{s}, params, opts);
        double ndcg = pipeline_mean_ndcg(result, data, args.k, args.ndcg);
        double delta_pct = 100.0 * (ndcg - ndcg_full) / ndcg_full;
        double sp = speedup(result.cost, full_cost, CostMode::TreeCount);
        std::vector<int> counts = result.continued_counts();
        CutStats cuts = cut_statistics(counts);
        body += name;
        body += ',' + std::to_string(s);
        body += ',' + fmt_double(finite(threshold, "threshold"));
        body += ',' + fmt_double(finite(ndcg, "ndcg"));
        body += ',' + fmt_double(finite(delta_pct, "delta_pct"));
        body += ',' + fmt_double(finite(sp, "speedup"));
        body += ',' + fmt_double(finite(cuts.mean, "ks_mu"));
        body += ',' + fmt_double(finite(cuts.stddev, "ks_sigma"));
        body += '\n';
      }
    }
  }

  std::string out = resolve_out(args.out_path);
  ensure_parent_dir(out);
  std::string tmp = out + ".tmp";
  write_text_file(tmp, body);
  std::filesystem::rename(tmp, out);
  std::cout << "sweep written to " << out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

struct StatsArgs {
  std::string data_path;
  std::string report_path;
};

int cmd_stats(const StatsArgs& args) {
  Dataset ds = load_dataset_file(args.data_path);
  DatasetStats stats = dataset_stats(ds);
  std::cout << "queries        " << stats.num_queries << "\n";
  std::cout << "documents      " << stats.num_documents << "\n";
  std::cout << "features       " << ds.num_features << "\n";
  std::cout << "docs per query " << fmt_double(stats.mean_docs_per_query)
            << " mean, " << stats.min_docs_per_query << " min, "
            << stats.max_docs_per_query << " max\n";
  std::cout << "relevance histogram:";
  for (std::size_t grade = 0; grade < stats.relevance_histogram.size();
       ++grade) {
    std::cout << "  " << grade << ":" << stats.relevance_histogram[grade];
  }
  std::cout << "\n";

  if (!args.report_path.empty()) {
    json report;
    report["command"] = "stats";
    report["config"] = {{"data", args.data_path}};
    report["results"] = {{"num_queries", stats.num_queries},
                         {"num_documents", stats.num_documents},
                         {"num_features", ds.num_features},
                         {"mean_docs_per_query", stats.mean_docs_per_query},
                         {"min_docs_per_query", stats.min_docs_per_query},
                         {"max_docs_per_query", stats.max_docs_per_query},
                         {"relevance_histogram", stats.relevance_histogram}};
    write_json_report(args.report_path, report);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Early-exit scoring for additive tree ensembles"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file (CLI flags take precedence)");
  app.set_version_flag("--version", "exitrank 0.1.0");

  int threads = default_threads();

  TrainRankerArgs ranker;
  ranker.params.num_trees = 100;
  auto* tr = app.add_subcommand("train-ranker",
                                "Train a squared-loss ranking forest");
  tr->add_option("--train", ranker.train_path, "Training split (LETOR)")
      ->required();
  tr->add_option("--valid", ranker.valid_path,
                 "Validation split for per-round NDCG");
  tr->add_option("--out", ranker.out_path, "Output model path")->required();
  tr->add_option("--trees", ranker.params.num_trees, "Boosting rounds");
  tr->add_option("--max-leaves", ranker.params.max_leaves, "Leaves per tree");
  tr->add_option("--learning-rate", ranker.params.learning_rate, "Shrinkage");
  tr->add_option("--lambda", ranker.params.l2_lambda, "L2 regularization");
  tr->add_option("--min-leaf", ranker.params.min_examples_per_leaf,
                 "Minimum examples per leaf");
  tr->add_option("--ndcg-k", ranker.ndcg_k, "NDCG cutoff");
  tr->add_flag("--linear-gain", ranker.ndcg.linear_gain,
               "Linear NDCG gain instead of 2^rel - 1");
  tr->add_flag("--skip-zero-idcg", ranker.ndcg.skip_zero_idcg,
               "Drop zero-IDCG queries from mean NDCG");
  tr->add_option("--report", ranker.report_path, "JSON report path");

  TrainExitArgs exit_args;
  auto* te = app.add_subcommand("train-exit",
                                "Train the Continue/Exit classifier");
  te->add_option("--model", exit_args.model_path, "Ranker model")->required();
  te->add_option("--train", exit_args.train_path, "Training split (LETOR)")
      ->required();
  te->add_option("--valid", exit_args.valid_path,
                 "Validation split for the tau sweep");
  te->add_option("--out", exit_args.out_path, "Output classifier path")
      ->required();
  te->add_option("--sentinel", exit_args.sentinel, "Sentinel tree index")
      ->required();
  te->add_option("--k-label", exit_args.k_label,
                 "Top-k cutoff for Continue labels");
  te->add_option("--trees", exit_args.params.num_trees, "Boosting rounds");
  te->add_option("--max-leaves", exit_args.params.max_leaves,
                 "Leaves per tree");
  te->add_option("--learning-rate", exit_args.params.learning_rate,
                 "Shrinkage");
  te->add_option("--lambda", exit_args.params.l2_lambda, "L2 regularization");
  te->add_option("--min-leaf", exit_args.params.min_examples_per_leaf,
                 "Minimum examples per leaf");
  te->add_option("--tau-grid", exit_args.tau_grid,
                 "Tau grid (start:stop:step or comma list)");
  te->add_option("--exit-recall-floor", exit_args.exit_recall_floor,
                 "Minimum Exit recall for the recommended tau");
  te->add_option("--top-features", exit_args.top_features,
                 "Retrain on the m highest-gain features");
  te->add_option("--dump-trainset", exit_args.dump_prefix,
                 "Dump the training set to PREFIX.letor/.weights");
  te->add_option("--threads", threads, "Worker threads");
  te->add_option("--report", exit_args.report_path, "JSON report path");

  RunArgs run_args;
  auto* rn = app.add_subcommand("run", "Evaluate one strategy configuration");
  rn->add_option("--model", run_args.model_path, "Ranker model")->required();
  rn->add_option("--data", run_args.data_path, "Test split (LETOR)")
      ->required();
  rn->add_option("--strategy", run_args.strategy,
                 "full | ideal | ert | ept | lear");
  rn->add_option("--sentinel", run_args.sentinel, "Sentinel tree index")
      ->required();
  rn->add_option("--k-s", run_args.k_s, "Rank cutoff for ert/ept");
  rn->add_option("--p", run_args.p, "Proximity threshold for ept");
  rn->add_option("--tau", run_args.tau, "Probability threshold for lear");
  rn->add_option("--classifier", run_args.classifier_path,
                 "Classifier file for lear");
  rn->add_option("--k", run_args.k, "NDCG cutoff / ideal-oracle top-k");
  rn->add_flag("--merge-by-score", run_args.merge_by_score,
               "Merge exited and continued documents by score");
  rn->add_flag("--wall-clock", run_args.wall_clock,
               "Also report wall-clock speedup");
  rn->add_option("--reps", run_args.reps,
                 "Wall-clock repetitions (minimum 5)");
  rn->add_option("--threads", threads, "Worker threads");
  rn->add_flag("--linear-gain", run_args.ndcg.linear_gain,
               "Linear NDCG gain instead of 2^rel - 1");
  rn->add_flag("--skip-zero-idcg", run_args.ndcg.skip_zero_idcg,
               "Drop zero-IDCG queries from mean NDCG");
  rn->add_option("--json", run_args.report_path, "JSON report path");

  SweepArgs sweep_args;
  auto* sw = app.add_subcommand("sweep",
                                "Grid sweep over strategies and sentinels");
  sw->add_option("--model", sweep_args.model_path, "Ranker model")->required();
  sw->add_option("--data", sweep_args.data_path, "Test split (LETOR)")
      ->required();
  sw->add_option("--strategies", sweep_args.strategies,
                 "Comma list among full,ideal,ert,ept,lear")
      ->delimiter(',');
  sw->add_option("--sentinels", sweep_args.sentinels, "Sentinel tree indices")
      ->delimiter(',');
  sw->add_option("--ert-grid", sweep_args.ert_grid, "k_s grid for ert");
  sw->add_option("--ept-grid", sweep_args.ept_grid, "p grid for ept");
  sw->add_option("--tau-grid", sweep_args.tau_grid, "tau grid for lear");
  sw->add_option("--ept-k-s", sweep_args.ept_k_s, "Rank cutoff for ept");
  sw->add_option("--classifier", sweep_args.classifier_path,
                 "Classifier file for lear");
  sw->add_option("--k", sweep_args.k, "NDCG cutoff / ideal-oracle top-k");
  sw->add_flag("--merge-by-score", sweep_args.merge_by_score,
               "Merge exited and continued documents by score");
  sw->add_option("--threads", threads, "Worker threads");
  sw->add_flag("--linear-gain", sweep_args.ndcg.linear_gain,
               "Linear NDCG gain instead of 2^rel - 1");
  sw->add_flag("--skip-zero-idcg", sweep_args.ndcg.skip_zero_idcg,
               "Drop zero-IDCG queries from mean NDCG");
  sw->add_option("--out", sweep_args.out_path, "Output CSV path")->required();

  EvalClassifierArgs eval_args;
  auto* ec = app.add_subcommand("eval-classifier",
                                "Precision/recall of a classifier over a "
                                "tau grid");
  ec->add_option("--model", eval_args.model_path, "Ranker model")->required();
  ec->add_option("--classifier", eval_args.classifier_path, "Classifier file")
      ->required();
  ec->add_option("--data", eval_args.data_path, "Evaluation split (LETOR)")
      ->required();
  ec->add_option("--sentinel", eval_args.sentinel, "Sentinel tree index")
      ->required();
  ec->add_option("--k-label", eval_args.k_label,
                 "Top-k cutoff for Continue labels");
  ec->add_option("--tau-grid", eval_args.tau_grid, "Tau grid");
  ec->add_option("--exit-recall-floor", eval_args.exit_recall_floor,
                 "Minimum Exit recall for the recommended tau");
  ec->add_option("--threads", threads, "Worker threads");
  ec->add_option("--json", eval_args.report_path, "JSON report path");

  StatsArgs stats_args;
  auto* st = app.add_subcommand("stats", "Describe a LETOR dataset");
  st->add_option("--data", stats_args.data_path, "Dataset (LETOR)")
      ->required();
  st->add_option("--json", stats_args.report_path, "JSON report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  exit_args.threads = threads;
  run_args.threads = threads;
  sweep_args.threads = threads;
  eval_args.threads = threads;

  try {
    if (tr->parsed()) return cmd_train_ranker(ranker);
    if (te->parsed()) return cmd_train_exit(exit_args);
    if (rn->parsed()) return cmd_run(run_args);
    if (sw->parsed()) return cmd_sweep(sweep_args);
    if (ec->parsed()) return cmd_eval_classifier(eval_args);
    if (st->parsed()) return cmd_stats(stats_args);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
