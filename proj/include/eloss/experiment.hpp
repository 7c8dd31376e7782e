#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eloss/analysis.hpp"
#include "eloss/dataset.hpp"
#include "eloss/io.hpp"
#include "eloss/network.hpp"

namespace eloss {

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);
std::string to_string(OptimizerKind k);
OptimizerKind optimizer_kind_from_string(const std::string& name);
std::string to_string(MeasurePoint m);
MeasurePoint measure_point_from_string(const std::string& name);
std::string to_string(SampleConvention c);
SampleConvention sample_convention_from_string(const std::string& name);
std::string to_string(DuplicatePolicy::Kind k);
DuplicatePolicy::Kind duplicate_policy_kind_from_string(const std::string& name);

/// Everything one training run depends on. `seed` is the master seed; the
/// dataset, the weight init, and the epoch shuffles each draw from a stream
/// derived from it, so DatasetSpec::seed is ignored here. Network input and
/// output widths follow the dataset kind.
struct ExperimentConfig {
  DatasetSpec dataset;
  int hidden_width = 32;
  int hidden_count = 4;
  Activation activation = Activation::kTanh;
  OptimizerConfig optimizer;
  EntropyLossConfig entropy;
  MeasurePoint measure = MeasurePoint::kPostActivation;
  int epochs = 200;
  int batch_size = 64;
  std::uint64_t seed = 0;
  std::string out_dir;  // empty: keep everything in memory

  // Defaults tuned for the stock blob experiment. With tanh layers, direction
  // weights of 0.1 or even 0.01 eventually push activations into saturation:
  // the delta spread inflates instead of flattening and the classifier
  // collapses late in the run. 0.001 keeps the term active without the
  // blow-up. Saturated rows also collide exactly, hence jitter over reject.
  ExperimentConfig() {
    optimizer.kind = OptimizerKind::kAdam;
    optimizer.learning_rate = 1e-3;
    entropy.w_direction = 0.001;
    entropy.duplicate_policy = DuplicatePolicy::jitter();
  }
};

std::string experiment_config_to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const std::string& text);

struct ExperimentResult {
  ExperimentConfig config;  // effective config, echoed into every artifact
  RunRecord record;
  ToyNetwork network;
  TrainValSplit data;
  double total_wall_seconds = 0.0;
};

/// Trains for config.epochs epochs and evaluates after each one. Entropy
/// statistics in the record come from a fixed probe (the validation inputs)
/// over all hidden layers, so runs with the loss disabled log the same
/// quantities as runs training against it. With out_dir set, writes
/// config.json, run_record.json, curves.csv (all byte-deterministic for a
/// given config) and run_meta.json (wall-clock times). Degenerate-sample
/// failures are rethrown with epoch context; configure a jitter policy to
/// trade exactness for robustness instead.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// run_record.json layout: {"config": ..., "initial": ..., "epochs": [...]}.
/// Wall-clock fields are deliberately excluded.
std::string run_record_to_json(const RunRecord& record,
                               const ExperimentConfig& config);
RunRecord run_record_from_json(const std::string& text);

/// Entropy profile of a stored activation dump: per-layer entropies, deltas,
/// both delta losses, and how many transitions decrease.
struct ProfileReport {
  std::vector<std::string> layer_names;
  EntropyProfile profile;
  double l1 = 0.0;
  double l2 = 0.0;
  double sum_deltas = 0.0;
  int negative_delta_count = 0;
};

ProfileReport profile_dump(const ActivationDump& dump,
                           const EntropyLossConfig& config);
std::string profile_report_to_json(const ProfileReport& report);

struct RunSummary {
  std::vector<double> metric_curve;    // val_metric per epoch
  std::vector<double> smoothed_curve;  // centered moving average, window 5
  double mean_metric = 0.0;
  CurveFit fit;                          // val_metric ~ a*log(t+1) + b
  double l1_final_mean = 0.0;          // mean l1 over the last <=50 epochs
};

struct ComparisonReport {
  RunSummary a;
  RunSummary b;
  double delta_mean_metric = 0.0;  // b minus a
  double delta_r_squared = 0.0;
  double delta_l1_final_mean = 0.0;
  bool truncated = false;  // epoch counts differed; common prefix compared
  int common_epochs = 0;
};

/// Summarizes two run records side by side. Records of unequal length are
/// truncated to the common prefix and flagged. Needs at least three common
/// epochs for the log fit.
ComparisonReport compare_runs(const RunRecord& a, const RunRecord& b);
std::string comparison_to_json(const ComparisonReport& report);

/// Entropy estimate for a point file (see load_point_matrix for the format).
EntropyEstimate estimate_file(
    const std::string& path, int k,
    SampleConvention convention = SampleConvention::kBatchRows,
    const DuplicatePolicy& policy = DuplicatePolicy::reject());

}  // namespace eloss
