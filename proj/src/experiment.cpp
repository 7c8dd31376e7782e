#include "eloss/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "json.hpp"

#include "eloss/errors.hpp"
#include "eloss/rng.hpp"

namespace eloss {
namespace {

using nlohmann::json;

constexpr std::uint64_t kDataStream = 101;
constexpr std::uint64_t kInitStream = 102;
constexpr std::uint64_t kShuffleStream = 103;

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    const std::size_t upto = std::min(byte, text.size());
    const int line =
        1 + static_cast<int>(std::count(text.begin(), text.begin() + upto, '\n'));
    throw ParseError(e.what(), line);
  }
}

json dataset_to_json(const DatasetSpec& spec) {
  return json{{"kind", to_string(spec.kind)},
              {"n_train", spec.n_train},
              {"n_val", spec.n_val},
              {"noise", spec.noise}};
}

DatasetSpec dataset_from_json(const json& j) {
  DatasetSpec spec;
  if (j.contains("kind")) spec.kind = dataset_kind_from_string(j.at("kind"));
  spec.n_train = j.value("n_train", spec.n_train);
  spec.n_val = j.value("n_val", spec.n_val);
  spec.noise = j.value("noise", spec.noise);
  return spec;
}

json entropy_to_json(const EntropyLossConfig& c) {
  return json{{"k", c.k},
              {"w_variance", c.w_variance},
              {"w_direction", c.w_direction},
              {"sample_convention", to_string(c.sample_convention)},
              {"duplicate_policy",
               json{{"kind", to_string(c.duplicate_policy.kind)},
                    {"sigma", c.duplicate_policy.sigma},
                    {"seed", c.duplicate_policy.seed}}},
              {"layer_subset", c.layer_subset}};
}

EntropyLossConfig entropy_from_json(const json& j) {
  EntropyLossConfig c;
  c.k = j.value("k", c.k);
  c.w_variance = j.value("w_variance", c.w_variance);
  c.w_direction = j.value("w_direction", c.w_direction);
  if (j.contains("sample_convention")) {
    c.sample_convention = sample_convention_from_string(j.at("sample_convention"));
  }
  if (j.contains("duplicate_policy")) {
    const json& p = j.at("duplicate_policy");
    if (p.contains("kind")) {
      c.duplicate_policy.kind = duplicate_policy_kind_from_string(p.at("kind"));
    }
    c.duplicate_policy.sigma = p.value("sigma", c.duplicate_policy.sigma);
    c.duplicate_policy.seed = p.value("seed", c.duplicate_policy.seed);
  }
  if (j.contains("layer_subset")) {
    c.layer_subset = j.at("layer_subset").get<std::vector<int>>();
  }
  return c;
}

json optimizer_to_json(const OptimizerConfig& c) {
  return json{{"kind", to_string(c.kind)},
              {"learning_rate", c.learning_rate},
              {"momentum", c.momentum},
              {"beta1", c.beta1},
              {"beta2", c.beta2},
              {"epsilon", c.epsilon}};
}

OptimizerConfig optimizer_from_json(const json& j) {
  OptimizerConfig c;
  if (j.contains("kind")) c.kind = optimizer_kind_from_string(j.at("kind"));
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.momentum = j.value("momentum", c.momentum);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.epsilon = j.value("epsilon", c.epsilon);
  return c;
}

json config_to_json_object(const ExperimentConfig& c) {
  return json{{"dataset", dataset_to_json(c.dataset)},
              {"hidden_width", c.hidden_width},
              {"hidden_count", c.hidden_count},
              {"activation", to_string(c.activation)},
              {"optimizer", optimizer_to_json(c.optimizer)},
              {"entropy", entropy_to_json(c.entropy)},
              {"measure", to_string(c.measure)},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"seed", c.seed}};
}

ExperimentConfig config_from_json_object(const json& j) {
  ExperimentConfig c;
  if (j.contains("dataset")) c.dataset = dataset_from_json(j.at("dataset"));
  c.hidden_width = j.value("hidden_width", c.hidden_width);
  c.hidden_count = j.value("hidden_count", c.hidden_count);
  if (j.contains("activation")) {
    c.activation = activation_from_string(j.at("activation"));
  }
  if (j.contains("optimizer")) c.optimizer = optimizer_from_json(j.at("optimizer"));
  if (j.contains("entropy")) c.entropy = entropy_from_json(j.at("entropy"));
  if (j.contains("measure")) c.measure = measure_point_from_string(j.at("measure"));
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  return c;
}

json initial_to_json(const InitialEval& e) {
  return json{{"val_metric", e.val_metric},
              {"layer_entropies", e.layer_entropies},
              {"l1", e.l1},
              {"l2", e.l2},
              {"sum_deltas", e.sum_deltas}};
}

InitialEval initial_from_json(const json& j) {
  InitialEval e;
  e.val_metric = j.value("val_metric", 0.0);
  if (j.contains("layer_entropies")) {
    e.layer_entropies = j.at("layer_entropies").get<std::vector<double>>();
  }
  e.l1 = j.value("l1", 0.0);
  e.l2 = j.value("l2", 0.0);
  e.sum_deltas = j.value("sum_deltas", 0.0);
  return e;
}

json epoch_to_json(const EpochRecord& e) {
  // wall_seconds stays out: the record must be byte-identical across reruns.
  return json{{"epoch", e.epoch},
              {"task_loss", e.task_loss},
              {"l1", e.l1},
              {"l2", e.l2},
              {"total_loss", e.total_loss},
              {"layer_entropies", e.layer_entropies},
              {"sum_deltas", e.sum_deltas},
              {"val_metric", e.val_metric}};
}

EpochRecord epoch_from_json(const json& j) {
  EpochRecord e;
  e.epoch = j.value("epoch", 0);
  e.task_loss = j.value("task_loss", 0.0);
  e.l1 = j.value("l1", 0.0);
  e.l2 = j.value("l2", 0.0);
  e.total_loss = j.value("total_loss", 0.0);
  if (j.contains("layer_entropies")) {
    e.layer_entropies = j.at("layer_entropies").get<std::vector<double>>();
  }
  e.sum_deltas = j.value("sum_deltas", 0.0);
  e.val_metric = j.value("val_metric", 0.0);
  return e;
}

struct ProbeStats {
  std::vector<double> layer_entropies;
  double l1 = 0.0;
  double l2 = 0.0;
  double sum_deltas = 0.0;
};

// The record always covers every hidden layer, whatever subset the training
// loss reads.
EntropyLossConfig probe_entropy_config(const ExperimentConfig& config) {
  EntropyLossConfig probe = config.entropy;
  probe.layer_subset.clear();
  return probe;
}

ProbeStats measure_probe(const ToyNetwork& net, const SampleMatrix& probe,
                         const ExperimentConfig& config) {
  const ForwardPass pass = forward(net, probe);
  const std::vector<SampleMatrix>& layers =
      config.measure == MeasurePoint::kPostActivation ? pass.activations
                                                      : pass.pre_activations;
  const EntropyProfile prof =
      activation_entropy_profile(layers, probe_entropy_config(config));
  ProbeStats stats;
  stats.layer_entropies = prof.layer_entropies;
  stats.l1 = variance_loss(prof.deltas);
  stats.l2 = direction_loss(prof.deltas);
  stats.sum_deltas =
      std::accumulate(prof.deltas.begin(), prof.deltas.end(), 0.0);
  return stats;
}

double validation_metric(const ToyNetwork& net, const Dataset& val) {
  return val.regression ? evaluate_mse(net, val.inputs, val.targets)
                        : evaluate_accuracy(net, val.inputs, val.labels);
}

void validate_experiment_config(const ExperimentConfig& config) {
  if (config.epochs < 1) throw InvalidArgumentError("epochs must be >= 1");
  if (config.batch_size < 2) throw InvalidArgumentError("batch_size must be >= 2");
  if (config.entropy.k < 1) throw InvalidArgumentError("entropy k must be >= 1");
  if (config.dataset.n_val <= config.entropy.k) {
    throw InvalidArgumentError(
        "n_val must exceed the entropy k for the probe evaluation");
  }
  const int min_batch = std::max(2, config.entropy.k + 1);
  if (config.dataset.n_train < min_batch) {
    throw InvalidArgumentError("n_train is too small for a single batch");
  }
}

std::string curves_csv(const RunRecord& record) {
  std::string out =
      "epoch,task_loss,total_loss,l1,l2,sum_deltas,val_metric\n";
  for (const EpochRecord& e : record.epochs) {
    out += std::to_string(e.epoch);
    out += ',' + format_double(e.task_loss);
    out += ',' + format_double(e.total_loss);
    out += ',' + format_double(e.l1);
    out += ',' + format_double(e.l2);
    out += ',' + format_double(e.sum_deltas);
    out += ',' + format_double(e.val_metric);
    out += '\n';
  }
  return out;
}

template <typename Fn>
auto with_context(const std::string& prefix, Fn&& fn) {
  try {
    return fn();
  } catch (const DegenerateSampleError& e) {
    throw DegenerateSampleError(prefix + e.what());
  }
}

json summary_to_json(const RunSummary& s) {
  return json{{"metric_curve", s.metric_curve},
              {"smoothed_curve", s.smoothed_curve},
              {"mean_metric", s.mean_metric},
              {"fit", json{{"a", s.fit.a},
                           {"b", s.fit.b},
                           {"r_squared", s.fit.r_squared}}},
              {"l1_final_mean", s.l1_final_mean}};
}

RunSummary summarize_run(const RunRecord& record, std::size_t len) {
  RunSummary s;
  s.metric_curve.reserve(len);
  std::vector<double> l1_curve;
  l1_curve.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    s.metric_curve.push_back(record.epochs[i].val_metric);
    l1_curve.push_back(record.epochs[i].l1);
  }
  int window = static_cast<int>(std::min<std::size_t>(5, len));
  if (window % 2 == 0) --window;
  s.smoothed_curve = smooth_curve(s.metric_curve, window);
  s.mean_metric =
      std::accumulate(s.metric_curve.begin(), s.metric_curve.end(), 0.0) /
      static_cast<double>(len);
  try {
    s.fit = log_regression_r2(s.metric_curve);
  } catch (const DegenerateDataError&) {
    // A perfectly flat curve has no meaningful fit quality.
    s.fit.a = 0.0;
    s.fit.b = s.metric_curve.front();
    s.fit.r_squared = std::numeric_limits<double>::quiet_NaN();
  }
  const std::size_t tail = std::min<std::size_t>(50, len);
  s.l1_final_mean =
      std::accumulate(l1_curve.end() - static_cast<std::ptrdiff_t>(tail),
                      l1_curve.end(), 0.0) /
      static_cast<double>(tail);
  return s;
}

}  // namespace

std::string to_string(Activation a) {
  return a == Activation::kRelu ? "relu" : "tanh";
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw InvalidArgumentError("unknown activation: " + name);
}

std::string to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::kSgd:
      return "sgd";
    case OptimizerKind::kMomentum:
      return "momentum";
    case OptimizerKind::kAdam:
      return "adam";
  }
  return "unknown";
}

OptimizerKind optimizer_kind_from_string(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "momentum") return OptimizerKind::kMomentum;
  if (name == "adam") return OptimizerKind::kAdam;
  throw InvalidArgumentError("unknown optimizer: " + name);
}

std::string to_string(MeasurePoint m) {
  return m == MeasurePoint::kPostActivation ? "post_activation"
                                            : "pre_activation";
}

MeasurePoint measure_point_from_string(const std::string& name) {
  if (name == "post_activation") return MeasurePoint::kPostActivation;
  if (name == "pre_activation") return MeasurePoint::kPreActivation;
  throw InvalidArgumentError("unknown measure point: " + name);
}

std::string to_string(SampleConvention c) {
  return c == SampleConvention::kBatchRows ? "batch_rows" : "feature_channels";
}

SampleConvention sample_convention_from_string(const std::string& name) {
  if (name == "batch_rows") return SampleConvention::kBatchRows;
  if (name == "feature_channels") return SampleConvention::kFeatureChannels;
  throw InvalidArgumentError("unknown sample convention: " + name);
}

std::string to_string(DuplicatePolicy::Kind k) {
  return k == DuplicatePolicy::Kind::kReject ? "reject" : "jitter";
}

DuplicatePolicy::Kind duplicate_policy_kind_from_string(
    const std::string& name) {
  if (name == "reject") return DuplicatePolicy::Kind::kReject;
  if (name == "jitter") return DuplicatePolicy::Kind::kJitter;
  throw InvalidArgumentError("unknown duplicate policy: " + name);
}

std::string experiment_config_to_json(const ExperimentConfig& config) {
  return config_to_json_object(config).dump(2) + "\n";
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  const json j = parse_json(text);
  if (!j.is_object()) throw ParseError("config must be a JSON object", 1);
  return config_from_json_object(j);
}

std::string run_record_to_json(const RunRecord& record,
                               const ExperimentConfig& config) {
  json epochs = json::array();
  for (const EpochRecord& e : record.epochs) epochs.push_back(epoch_to_json(e));
  const json j{{"config", config_to_json_object(config)},
               {"initial", initial_to_json(record.initial)},
               {"epochs", epochs}};
  return j.dump(2) + "\n";
}

RunRecord run_record_from_json(const std::string& text) {
  const json j = parse_json(text);
  if (!j.is_object() || !j.contains("epochs")) {
    throw ParseError("run record must be an object with an 'epochs' array", 1);
  }
  RunRecord record;
  if (j.contains("initial")) record.initial = initial_from_json(j.at("initial"));
  for (const json& e : j.at("epochs")) record.epochs.push_back(epoch_from_json(e));
  return record;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate_experiment_config(config);
  const auto run_start = std::chrono::steady_clock::now();

  DatasetSpec spec = config.dataset;
  spec.seed = derive_seed(config.seed, kDataStream);
  ExperimentResult result;
  result.config = config;
  result.data = generate_dataset(spec);
  const Dataset& train = result.data.train;
  const Dataset& val = result.data.val;

  NetworkDims dims;
  dims.input_dim = dataset_input_dim(config.dataset.kind);
  dims.hidden_width = config.hidden_width;
  dims.hidden_count = config.hidden_count;
  dims.output_dim = train.regression ? 1 : 2;
  result.network =
      init_network(dims, config.activation, derive_seed(config.seed, kInitStream));
  ToyNetwork& net = result.network;
  OptimizerState opt = init_optimizer(config.optimizer, net);

  const SampleMatrix& probe = val.inputs;
  result.record.initial.val_metric = validation_metric(net, val);
  {
    const ProbeStats stats = with_context(
        "initial evaluation: ", [&] { return measure_probe(net, probe, config); });
    result.record.initial.layer_entropies = stats.layer_entropies;
    result.record.initial.l1 = stats.l1;
    result.record.initial.l2 = stats.l2;
    result.record.initial.sum_deltas = stats.sum_deltas;
  }

  const int n = static_cast<int>(train.size());
  const int min_batch = std::max(2, config.entropy.k + 1);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(derive_seed(config.seed, kShuffleStream));

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();
    shuffle_rng.shuffle(order);

    double task_sum = 0.0;
    double total_sum = 0.0;
    int steps = 0;
    for (int start = 0; start < n; start += config.batch_size) {
      const int count = std::min(config.batch_size, n - start);
      if (count < min_batch) break;  // drop a too-small trailing batch
      SampleMatrix batch(count, train.inputs.cols());
      Eigen::VectorXi labels(train.regression ? 0 : count);
      SampleMatrix targets(train.regression ? count : 0, 1);
      for (int i = 0; i < count; ++i) {
        const int row = order[static_cast<std::size_t>(start + i)];
        batch.row(i) = train.inputs.row(row);
        if (train.regression) {
          targets(i, 0) = train.targets(row, 0);
        } else {
          labels(i) = train.labels(row);
        }
      }
      const std::string where =
          "epoch " + std::to_string(epoch) + ", batch " +
          std::to_string(start / config.batch_size) + ": ";
      const StepMetrics metrics = with_context(where, [&] {
        return train.regression
                   ? train_step(net, opt, batch, targets, config.entropy,
                                config.measure)
                   : train_step(net, opt, batch, labels, config.entropy,
                                config.measure);
      });
      task_sum += metrics.task_loss;
      total_sum += metrics.total_loss;
      ++steps;
    }

    const std::string where = "epoch " + std::to_string(epoch) + " evaluation: ";
    const ProbeStats stats =
        with_context(where, [&] { return measure_probe(net, probe, config); });

    EpochRecord rec;
    rec.epoch = epoch;
    rec.task_loss = task_sum / steps;
    rec.total_loss = total_sum / steps;
    rec.l1 = stats.l1;
    rec.l2 = stats.l2;
    rec.layer_entropies = stats.layer_entropies;
    rec.sum_deltas = stats.sum_deltas;
    rec.val_metric = validation_metric(net, val);
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      epoch_start)
            .count();
    result.record.epochs.push_back(std::move(rec));
  }

  result.total_wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - run_start)
          .count();

  if (!config.out_dir.empty()) {
    const std::string dir = config.out_dir + "/";
    write_text_atomic(dir + "config.json", experiment_config_to_json(config));
    write_text_atomic(dir + "run_record.json",
                      run_record_to_json(result.record, config));
    write_text_atomic(dir + "curves.csv", curves_csv(result.record));
    json meta{{"total_wall_seconds", result.total_wall_seconds}};
    json walls = json::array();
    for (const EpochRecord& e : result.record.epochs) {
      walls.push_back(e.wall_seconds);
    }
    meta["epoch_wall_seconds"] = walls;
    write_text_atomic(dir + "run_meta.json", meta.dump(2) + "\n");
  }
  return result;
}

ProfileReport profile_dump(const ActivationDump& dump,
                           const EntropyLossConfig& config) {
  if (dump.layers.size() < 2) {
    throw InvalidDataError("activation dump needs at least two layers");
  }
  if (config.sample_convention == SampleConvention::kBatchRows) {
    const Eigen::Index rows = dump.layers.front().second.rows();
    for (const auto& [name, matrix] : dump.layers) {
      if (matrix.rows() != rows) {
        throw InvalidDataError("layer '" + name +
                               "' disagrees on sample count with '" +
                               dump.layers.front().first + "'");
      }
    }
  }
  ProfileReport report;
  std::vector<double> entropies;
  for (const auto& [name, matrix] : dump.layers) {
    report.layer_names.push_back(name);
    const SampleMatrix oriented =
        config.sample_convention == SampleConvention::kFeatureChannels
            ? SampleMatrix(matrix.transpose())
            : matrix;
    try {
      entropies.push_back(
          entropy_knn(oriented, config.k, config.duplicate_policy).value);
    } catch (const DegenerateSampleError& e) {
      throw DegenerateSampleError("layer '" + name + "': " + e.what());
    } catch (const InvalidDataError& e) {
      throw InvalidDataError("layer '" + name + "': " + e.what());
    } catch (const InvalidArgumentError& e) {
      throw InvalidArgumentError("layer '" + name + "': " + e.what());
    }
  }
  report.profile = layer_deltas(entropies);
  report.l1 = variance_loss(report.profile.deltas);
  report.l2 = direction_loss(report.profile.deltas);
  for (double d : report.profile.deltas) {
    report.sum_deltas += d;
    if (d < 0.0) ++report.negative_delta_count;
  }
  return report;
}

std::string profile_report_to_json(const ProfileReport& report) {
  const json j{{"layer_names", report.layer_names},
               {"layer_entropies", report.profile.layer_entropies},
               {"deltas", report.profile.deltas},
               {"l1", report.l1},
               {"l2", report.l2},
               {"sum_deltas", report.sum_deltas},
               {"negative_delta_count", report.negative_delta_count}};
  return j.dump(2) + "\n";
}

ComparisonReport compare_runs(const RunRecord& a, const RunRecord& b) {
  if (a.epochs.empty() || b.epochs.empty()) {
    throw InvalidArgumentError("cannot compare a run record with no epochs");
  }
  const std::size_t common = std::min(a.epochs.size(), b.epochs.size());
  if (common < 3) {
    throw InvalidArgumentError("need at least three common epochs to compare");
  }
  ComparisonReport report;
  report.truncated = a.epochs.size() != b.epochs.size();
  report.common_epochs = static_cast<int>(common);
  report.a = summarize_run(a, common);
  report.b = summarize_run(b, common);
  report.delta_mean_metric = report.b.mean_metric - report.a.mean_metric;
  report.delta_r_squared = report.b.fit.r_squared - report.a.fit.r_squared;
  report.delta_l1_final_mean = report.b.l1_final_mean - report.a.l1_final_mean;
  return report;
}

std::string comparison_to_json(const ComparisonReport& report) {
  const json j{{"run_a", summary_to_json(report.a)},
               {"run_b", summary_to_json(report.b)},
               {"delta", json{{"mean_metric", report.delta_mean_metric},
                              {"r_squared", report.delta_r_squared},
                              {"l1_final_mean", report.delta_l1_final_mean}}},
               {"truncated", report.truncated},
               {"common_epochs", report.common_epochs}};
  return j.dump(2) + "\n";
}

EntropyEstimate estimate_file(const std::string& path, int k,
                              SampleConvention convention,
                              const DuplicatePolicy& policy) {
  const SampleMatrix points = load_point_matrix(path);
  if (convention == SampleConvention::kFeatureChannels) {
    return entropy_knn(SampleMatrix(points.transpose()), k, policy);
  }
  return entropy_knn(points, k, policy);
}

}  // namespace eloss
