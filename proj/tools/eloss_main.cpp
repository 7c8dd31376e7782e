#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "eloss/errors.hpp"
#include "eloss/experiment.hpp"

namespace {

using nlohmann::json;

struct EstimateArgs {
  std::string input;
  int k = 1;
  std::string convention = "batch_rows";
  std::string policy = "reject";
  double sigma = 0.0;
  std::uint64_t jitter_seed = 0;
};

eloss::DuplicatePolicy make_policy(const std::string& kind, double sigma,
                                   std::uint64_t seed) {
  if (eloss::duplicate_policy_kind_from_string(kind) ==
      eloss::DuplicatePolicy::Kind::kJitter) {
    return eloss::DuplicatePolicy::jitter(sigma, seed);
  }
  return eloss::DuplicatePolicy::reject();
}

void run_estimate(const EstimateArgs& args) {
  const eloss::EntropyEstimate est = eloss::estimate_file(
      args.input, args.k, eloss::sample_convention_from_string(args.convention),
      make_policy(args.policy, args.sigma, args.jitter_seed));
  const json out{{"value", est.value},
                 {"n", est.n},
                 {"d", est.d},
                 {"k", est.k}};
  std::cout << out.dump(2) << "\n";
}

struct TrainArgs {
  std::string config_path;
  eloss::ExperimentConfig config;
  bool baseline = false;
};

void run_train(const TrainArgs& args) {
  eloss::ExperimentConfig config = args.config;
  if (args.baseline) {
    config.entropy.w_variance = 0.0;
    config.entropy.w_direction = 0.0;
  }
  const eloss::ExperimentResult result = eloss::run_experiment(config);
  const eloss::EpochRecord& last = result.record.epochs.back();
  const json out{{"epochs", static_cast<int>(result.record.epochs.size())},
                 {"initial_val_metric", result.record.initial.val_metric},
                 {"final_val_metric", last.val_metric},
                 {"final_task_loss", last.task_loss},
                 {"final_l1", last.l1},
                 {"final_l2", last.l2},
                 {"wall_seconds", result.total_wall_seconds},
                 {"out_dir", config.out_dir}};
  std::cout << out.dump(2) << "\n";
}

struct ProfileArgs {
  std::string input;
  int k = 1;
  std::string convention = "batch_rows";
  std::string policy = "reject";
  double sigma = 0.0;
  std::uint64_t jitter_seed = 0;
};

void run_profile(const ProfileArgs& args) {
  const eloss::ActivationDump dump = eloss::load_activation_dump(args.input);
  eloss::EntropyLossConfig config;
  config.k = args.k;
  config.sample_convention =
      eloss::sample_convention_from_string(args.convention);
  config.duplicate_policy =
      make_policy(args.policy, args.sigma, args.jitter_seed);
  std::cout << eloss::profile_report_to_json(eloss::profile_dump(dump, config));
}

struct CompareArgs {
  std::string a;
  std::string b;
  std::string out;
};

void run_compare(const CompareArgs& args) {
  const eloss::RunRecord rec_a =
      eloss::run_record_from_json(eloss::read_text_file(args.a));
  const eloss::RunRecord rec_b =
      eloss::run_record_from_json(eloss::read_text_file(args.b));
  const std::string report =
      eloss::comparison_to_json(eloss::compare_runs(rec_a, rec_b));
  if (!args.out.empty()) eloss::write_text_atomic(args.out, report);
  std::cout << report;
}

struct GenDataArgs {
  std::string dataset = "gaussian_blobs";
  int n_train = 512;
  int n_val = 256;
  double noise = 0.5;
  std::uint64_t seed = 0;
  std::string out_dir;
};

void run_gen_data(const GenDataArgs& args) {
  eloss::DatasetSpec spec;
  spec.kind = eloss::dataset_kind_from_string(args.dataset);
  spec.n_train = args.n_train;
  spec.n_val = args.n_val;
  spec.noise = args.noise;
  spec.seed = args.seed;
  const eloss::TrainValSplit split = eloss::generate_dataset(spec);
  const std::vector<std::string> comments{
      "dataset: " + args.dataset, "noise: " + eloss::format_double(spec.noise),
      "seed: " + std::to_string(spec.seed)};
  const std::string train_path = args.out_dir + "/train.txt";
  const std::string val_path = args.out_dir + "/val.txt";
  eloss::save_dataset(train_path, split.train, comments);
  eloss::save_dataset(val_path, split.val, comments);
  const json out{{"train", train_path},
                 {"val", val_path},
                 {"n_train", static_cast<int>(split.train.size())},
                 {"n_val", static_cast<int>(split.val.size())}};
  std::cout << out.dump(2) << "\n";
}

void add_policy_flags(CLI::App* cmd, std::string* policy, double* sigma,
                      std::uint64_t* jitter_seed) {
  cmd->add_option("--policy", *policy,
                  "Duplicate-row policy: reject or jitter");
  cmd->add_option("--sigma", *sigma,
                  "Jitter half-width; <= 0 picks a scale-relative default");
  cmd->add_option("--jitter-seed", *jitter_seed, "Jitter noise seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"k-nearest-neighbor entropy estimation and training toolkit"};
  app.require_subcommand(1);

  EstimateArgs est;
  CLI::App* estimate = app.add_subcommand(
      "estimate", "Differential entropy of a point file");
  estimate->add_option("-i,--input", est.input, "Point file, one sample per row")
      ->required();
  estimate->add_option("-k,--k", est.k, "Neighbor order");
  estimate->add_option("--convention", est.convention,
                       "batch_rows or feature_channels");
  add_policy_flags(estimate, &est.policy, &est.sigma, &est.jitter_seed);

  TrainArgs train;
  std::string dataset_name;
  std::string activation_name;
  std::string optimizer_name;
  std::string measure_name;
  std::string policy_name;
  double sigma = 0.0;
  std::uint64_t jitter_seed = 0;
  CLI::App* train_cmd = app.add_subcommand(
      "train", "Train the toy network, optionally against the entropy loss");
  CLI::Option* config_opt = train_cmd->add_option(
      "-c,--config", train.config_path, "Experiment config JSON");
  CLI::Option* seed_opt =
      train_cmd->add_option("--seed", train.config.seed, "Master seed");
  CLI::Option* out_opt = train_cmd->add_option("--out-dir", train.config.out_dir,
                                               "Artifact directory");
  CLI::Option* dataset_opt = train_cmd->add_option(
      "--dataset", dataset_name,
      "gaussian_blobs, ring_vs_blob, or regression_sine");
  CLI::Option* n_train_opt =
      train_cmd->add_option("--n-train", train.config.dataset.n_train);
  CLI::Option* n_val_opt =
      train_cmd->add_option("--n-val", train.config.dataset.n_val);
  CLI::Option* noise_opt =
      train_cmd->add_option("--noise", train.config.dataset.noise);
  CLI::Option* epochs_opt =
      train_cmd->add_option("--epochs", train.config.epochs);
  CLI::Option* batch_opt =
      train_cmd->add_option("--batch-size", train.config.batch_size);
  CLI::Option* width_opt =
      train_cmd->add_option("--hidden-width", train.config.hidden_width);
  CLI::Option* count_opt =
      train_cmd->add_option("--hidden-count", train.config.hidden_count);
  CLI::Option* act_opt =
      train_cmd->add_option("--activation", activation_name, "relu or tanh");
  CLI::Option* optim_opt = train_cmd->add_option(
      "--optimizer", optimizer_name, "sgd, momentum, or adam");
  CLI::Option* lr_opt =
      train_cmd->add_option("--lr", train.config.optimizer.learning_rate);
  CLI::Option* k_opt = train_cmd->add_option("-k,--k", train.config.entropy.k);
  CLI::Option* wvar_opt =
      train_cmd->add_option("--w-variance", train.config.entropy.w_variance);
  CLI::Option* wdir_opt =
      train_cmd->add_option("--w-direction", train.config.entropy.w_direction);
  CLI::Option* measure_opt = train_cmd->add_option(
      "--measure", measure_name, "post_activation or pre_activation");
  CLI::Option* policy_opt = train_cmd->add_option(
      "--policy", policy_name, "Duplicate-row policy: reject or jitter");
  CLI::Option* sigma_opt = train_cmd->add_option("--sigma", sigma);
  CLI::Option* jseed_opt = train_cmd->add_option("--jitter-seed", jitter_seed);
  train_cmd->add_flag("--baseline", train.baseline,
                      "Zero both entropy weights (task-only control run)");

  ProfileArgs prof;
  CLI::App* profile = app.add_subcommand(
      "profile", "Layer entropy profile of an activation dump");
  profile->add_option("-i,--input", prof.input, "Activation dump file")
      ->required();
  profile->add_option("-k,--k", prof.k, "Neighbor order");
  profile->add_option("--convention", prof.convention,
                      "batch_rows or feature_channels");
  add_policy_flags(profile, &prof.policy, &prof.sigma, &prof.jitter_seed);

  CompareArgs cmp;
  CLI::App* compare =
      app.add_subcommand("compare", "Side-by-side summary of two run records");
  compare->add_option("-a,--a", cmp.a, "First run_record.json")->required();
  compare->add_option("-b,--b", cmp.b, "Second run_record.json")->required();
  compare->add_option("-o,--out", cmp.out, "Also write the report here");

  GenDataArgs gen;
  CLI::App* gen_data =
      app.add_subcommand("gen-data", "Write a synthetic dataset to disk");
  gen_data->add_option("--dataset", gen.dataset,
                       "gaussian_blobs, ring_vs_blob, or regression_sine");
  gen_data->add_option("--n-train", gen.n_train);
  gen_data->add_option("--n-val", gen.n_val);
  gen_data->add_option("--noise", gen.noise);
  gen_data->add_option("--seed", gen.seed);
  gen_data->add_option("--out-dir", gen.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);

    if (estimate->parsed()) run_estimate(est);
    if (profile->parsed()) run_profile(prof);
    if (compare->parsed()) run_compare(cmp);
    if (gen_data->parsed()) run_gen_data(gen);
    if (train_cmd->parsed()) {
      if (*config_opt) {
        // The file is the base; explicitly passed flags override it.
        TrainArgs merged = train;
        merged.config = eloss::experiment_config_from_json(
            eloss::read_text_file(train.config_path));
        if (*seed_opt) merged.config.seed = train.config.seed;
        if (*out_opt) merged.config.out_dir = train.config.out_dir;
        if (*n_train_opt) merged.config.dataset.n_train = train.config.dataset.n_train;
        if (*n_val_opt) merged.config.dataset.n_val = train.config.dataset.n_val;
        if (*noise_opt) merged.config.dataset.noise = train.config.dataset.noise;
        if (*epochs_opt) merged.config.epochs = train.config.epochs;
        if (*batch_opt) merged.config.batch_size = train.config.batch_size;
        if (*width_opt) merged.config.hidden_width = train.config.hidden_width;
        if (*count_opt) merged.config.hidden_count = train.config.hidden_count;
        if (*lr_opt) {
          merged.config.optimizer.learning_rate =
              train.config.optimizer.learning_rate;
        }
        if (*k_opt) merged.config.entropy.k = train.config.entropy.k;
        if (*wvar_opt) merged.config.entropy.w_variance = train.config.entropy.w_variance;
        if (*wdir_opt) merged.config.entropy.w_direction = train.config.entropy.w_direction;
        train = merged;
      }
      if (*dataset_opt) {
        train.config.dataset.kind = eloss::dataset_kind_from_string(dataset_name);
      }
      if (*act_opt) {
        train.config.activation = eloss::activation_from_string(activation_name);
      }
      if (*optim_opt) {
        train.config.optimizer.kind =
            eloss::optimizer_kind_from_string(optimizer_name);
      }
      if (*measure_opt) {
        train.config.measure = eloss::measure_point_from_string(measure_name);
      }
      if (*policy_opt || *sigma_opt || *jseed_opt) {
        const std::string kind = *policy_opt ? policy_name : "jitter";
        train.config.entropy.duplicate_policy =
            make_policy(kind, sigma, jitter_seed);
      }
      run_train(train);
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const eloss::InvalidArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const eloss::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const eloss::DegenerateSampleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const eloss::DegenerateDataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const eloss::InvalidDataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
