// Command-line front end: train / attack / sweep / theory / report.
// Exit codes: 0 success, 1 configuration or input error, 2 runtime numeric
// failure.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "privbench/attack.hpp"
#include "privbench/dataset.hpp"
#include "privbench/defense.hpp"
#include "privbench/errors.hpp"
#include "privbench/harness.hpp"
#include "privbench/model_io.hpp"
#include "privbench/rng.hpp"
#include "privbench/theory.hpp"

namespace {

using namespace privbench;

struct PreparedData {
  LabeledDataset train;
  LabeledDataset reference;
  LabeledDataset test;
  LabeledDataset attacker;
};

PreparedData prepare_data(const ExperimentConfig& config, std::uint64_t run_seed) {
  LabeledDataset pool;
  if (config.dataset_path.empty()) {
    pool = synthesize(config.synthetic.classes, config.synthetic.per_class,
                      config.synthetic.dim, config.synthetic.flip_prob,
                      derive_seed(config.master_seed, 0));
  } else {
    LoadOptions options;
    options.labels_one_based = config.labels_one_based;
    pool = load_tabular(config.dataset_path, options);
  }
  const std::size_t total =
      config.n_train + config.n_reference + config.n_test + config.n_attacker;
  if (total > pool.size()) {
    throw ConfigError("split sizes exceed the dataset (" +
                      std::to_string(total) + " > " +
                      std::to_string(pool.size()) + ")");
  }
  SplitSpec spec;
  spec.n_train = config.n_train;
  spec.n_reference = config.n_reference;
  spec.n_test = config.n_test + config.n_attacker;
  spec.seed = derive_seed(run_seed, 100);
  DataSplits splits = split(pool, spec);
  PreparedData data;
  data.train = std::move(splits.train);
  data.reference = std::move(splits.reference);
  if (config.n_attacker > 0) {
    std::vector<std::size_t> test_idx(config.n_test), att_idx(config.n_attacker);
    for (std::size_t i = 0; i < config.n_test; ++i) test_idx[i] = i;
    for (std::size_t i = 0; i < config.n_attacker; ++i) {
      att_idx[i] = config.n_test + i;
    }
    data.test = splits.test.subset(test_idx);
    data.attacker = splits.test.subset(att_idx);
  } else {
    data.test = std::move(splits.test);
  }
  return data;
}

int cmd_train(const std::string& config_path, std::size_t defense_index,
              std::uint64_t seed_override, bool have_seed,
              const std::string& model_out, const std::string& confidences_out) {
  ExperimentConfig config = parse_config_file(config_path);
  if (defense_index >= config.defenses.size()) {
    throw ConfigError("defense index " + std::to_string(defense_index) +
                      " out of range (config has " +
                      std::to_string(config.defenses.size()) + ")");
  }
  const DefenseSpec& spec = config.defenses[defense_index];
  const std::uint64_t run_seed =
      have_seed ? seed_override
                : derive_seed(config.master_seed, 1 + defense_index * 1024);
  PreparedData data = prepare_data(config, run_seed);
  TrainedInstance instance =
      train_defense(data.train, data.reference, data.test, spec, run_seed);
  std::cout << "defense=" << defense_kind_name(spec.kind)
            << " parameter=" << spec.tradeoff_parameter()
            << " seed=" << run_seed << '\n';
  std::cout << "train_loss=" << instance.train_loss
            << " train_acc=" << instance.train_accuracy << '\n';
  std::cout << "test_loss=" << instance.test_loss
            << " test_acc=" << instance.test_accuracy << '\n';
  std::cout << "generalization_gap=" << generalization_gap(instance) << '\n';
  if (!model_out.empty()) save_model(instance.model, model_out);
  if (!confidences_out.empty()) {
    ConfidenceDump dump;
    auto append = [&](const LabeledDataset& ds, const std::string& tag,
                      Matrix probs) {
      for (std::size_t r = 0; r < ds.size(); ++r) {
        dump.split_tags.push_back(tag);
        dump.labels.push_back(ds.labels[r]);
      }
      if (dump.probs.rows() == 0) {
        dump.probs = std::move(probs);
      } else {
        Matrix merged(dump.probs.rows() + probs.rows(), probs.cols());
        for (std::size_t r = 0; r < dump.probs.rows(); ++r) {
          for (std::size_t c = 0; c < probs.cols(); ++c) {
            merged(r, c) = dump.probs(r, c);
          }
        }
        for (std::size_t r = 0; r < probs.rows(); ++r) {
          for (std::size_t c = 0; c < probs.cols(); ++c) {
            merged(dump.probs.rows() + r, c) = probs(r, c);
          }
        }
        dump.probs = std::move(merged);
      }
    };
    append(data.train, "train", forward(instance.model, data.train.features));
    append(data.reference, "reference",
           forward(instance.model, data.reference.features));
    append(data.test, "test", forward(instance.model, data.test.features));
    if (data.attacker.size() > 0) {
      append(data.attacker, "attacker",
             forward(instance.model, data.attacker.features));
    }
    write_confidence_csv(dump, confidences_out);
  }
  return 0;
}

int cmd_attack(const std::string& confidences_path,
               const std::vector<std::string>& attack_names,
               std::uint64_t seed) {
  ConfidenceDump dump = read_confidence_csv(confidences_path);
  auto [train_probs, train_labels] = select_split(dump, "train");
  auto [ref_probs, ref_labels] = select_split(dump, "reference");
  auto [test_probs, test_labels] = select_split(dump, "test");
  auto [att_probs, att_labels] = select_split(dump, "attacker");
  if (train_labels.empty() || test_labels.empty()) {
    throw ConfigError("confidence dump needs train and test splits");
  }

  auto make_input = [](const Matrix& mem, const std::vector<std::size_t>& mem_y,
                       const Matrix& non, const std::vector<std::size_t>& non_y) {
    const std::size_t n = std::min(mem_y.size(), non_y.size());
    AttackInput input;
    input.member_confidences = Matrix(n, mem.cols());
    input.nonmember_confidences = Matrix(n, non.cols());
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < mem.cols(); ++c) {
        input.member_confidences(r, c) = mem(r, c);
      }
      for (std::size_t c = 0; c < non.cols(); ++c) {
        input.nonmember_confidences(r, c) = non(r, c);
      }
    }
    input.member_labels.assign(mem_y.begin(), mem_y.begin() + n);
    input.nonmember_labels.assign(non_y.begin(), non_y.begin() + n);
    return input;
  };

  auto run_side = [&](const std::string& side, const Matrix& mem,
                      const std::vector<std::size_t>& mem_y) {
    AttackInput input = make_input(mem, mem_y, test_probs, test_labels);
    for (const auto& name : attack_names) {
      auto kind = attack_kind_from_name(name);
      if (!kind) throw ConfigError("unknown attack '" + name + "'");
      AttackReport report;
      switch (*kind) {
        case AttackKind::kGap:
          report = gap_attack(input);
          break;
        case AttackKind::kConfidenceThreshold:
          report = threshold_attack(input, ScoreKind::kConfidence);
          break;
        case AttackKind::kEntropyThreshold:
          report = threshold_attack(input, ScoreKind::kEntropy);
          break;
        case AttackKind::kModifiedEntropyThreshold:
          report = threshold_attack(input, ScoreKind::kModifiedEntropy);
          break;
        case AttackKind::kNeuralNetwork: {
          if (att_labels.empty()) {
            throw ConfigError("nn attack needs an attacker split in the dump");
          }
          const std::size_t half = mem_y.size() / 2;
          if (half == 0) throw ConfigError("nn attack: member split too small");
          auto slice = [&](const Matrix& m, std::size_t b, std::size_t e) {
            Matrix out(e - b, m.cols());
            for (std::size_t r = b; r < e; ++r) {
              for (std::size_t c = 0; c < m.cols(); ++c) {
                out(r - b, c) = m(r, c);
              }
            }
            return out;
          };
          AttackInput known;
          known.member_confidences = slice(mem, half, mem_y.size());
          known.member_labels.assign(mem_y.begin() + half, mem_y.end());
          known.nonmember_confidences = att_probs;
          known.nonmember_labels = att_labels;
          AttackInput eval = make_input(slice(mem, 0, half),
                                        {mem_y.begin(), mem_y.begin() + half},
                                        test_probs, test_labels);
          report = nn_attack(eval, known, {64, 32}, seed);
          break;
        }
      }
      std::cout << side << ' ' << name << " accuracy=" << report.accuracy;
      if (report.threshold) std::cout << " threshold=" << *report.threshold;
      std::cout << '\n';
    }
  };
  run_side("train", train_probs, train_labels);
  if (!ref_labels.empty()) run_side("reference", ref_probs, ref_labels);
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_override) {
  ExperimentConfig config = parse_config_file(config_path);
  if (!out_override.empty()) config.output_dir = out_override;
  std::vector<TradeoffPoint> points = run_sweep(config);
  std::vector<RegimeSelection> selections;
  for (Regime regime : {Regime::kPublicReference, Regime::kEqualPrivacy,
                        Regime::kHighReferencePrivacy}) {
    selections.push_back(select_instance(points, regime));
  }
  ReportBundle bundle =
      emit_report(points, selections, config, config.output_dir);
  std::cout << "wrote " << bundle.results_csv << '\n';
  std::cout << "wrote " << bundle.selections_csv << '\n';
  std::cout << "wrote " << bundle.timing_csv << '\n';
  std::cout << "wrote " << bundle.pcc_csv << '\n';
  std::cout << "wrote " << bundle.curves_svg << '\n';
  for (const auto& p : points) {
    if (p.failed) {
      std::cout << p.defense << " w/lambda=" << p.parameter
                << " FAILED: " << p.failure_reason << '\n';
    } else {
      std::cout << p.defense << " w/lambda=" << p.parameter
                << " test_acc=" << p.test_accuracy.mean
                << " mia_train=" << p.mia_train.mean
                << " mia_ref=" << p.mia_ref.mean << '\n';
    }
  }
  return 0;
}

int cmd_theory(std::size_t n_train, std::size_t n_reference, double epsilon_0,
               double delta, std::size_t steps, double clip_norm,
               double sampling_ratio, double vc_dim, std::size_t grid,
               const std::string& out_dir) {
  if (grid < 2) throw ConfigError("theory: grid must be >= 2");
  std::vector<double> w_grid(grid);
  for (std::size_t i = 0; i < grid; ++i) {
    w_grid[i] = static_cast<double>(i) / static_cast<double>(grid - 1);
  }
  TheoryCurve curve = theory_curve(n_train, n_reference, epsilon_0, w_grid,
                                   delta, steps, clip_norm, sampling_ratio,
                                   vc_dim);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  write_theory_curve_csv(curve, out_dir + "/theory.csv");
  write_theory_curve_svg(curve, out_dir + "/theory.svg");
  std::cout << "wrote " << out_dir << "/theory.csv\n";
  std::cout << "wrote " << out_dir << "/theory.svg\n";
  return 0;
}

int cmd_report(const std::string& results_path, const std::string& out_dir,
               std::size_t n_train, std::size_t n_reference) {
  std::vector<TradeoffPoint> points = read_results_csv(results_path);
  ExperimentConfig config;
  config.n_train = n_train;
  config.n_reference = n_reference;
  config.defenses.emplace_back();  // satisfies validate(); not used by reports
  std::vector<RegimeSelection> selections;
  for (Regime regime : {Regime::kPublicReference, Regime::kEqualPrivacy,
                        Regime::kHighReferencePrivacy}) {
    selections.push_back(select_instance(points, regime));
  }
  ReportBundle bundle = emit_report(points, selections, config, out_dir);
  std::cout << "wrote " << bundle.results_csv << '\n';
  std::cout << "wrote " << bundle.selections_csv << '\n';
  std::cout << "wrote " << bundle.pcc_csv << '\n';
  std::cout << "wrote " << bundle.curves_svg << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Utility-privacy benchmark for reference-data defenses"};
  app.require_subcommand(1);

  std::string config_path, model_out, confidences_out, out_dir, results_path;
  std::string confidences_path;
  std::size_t defense_index = 0;
  std::uint64_t seed = 0;
  bool have_seed = false;
  std::vector<std::string> attack_names{"confidence", "gap"};

  auto* train = app.add_subcommand("train", "Train one defended model");
  train->add_option("--config", config_path, "experiment config file")
      ->required();
  train->add_option("--defense-index", defense_index,
                    "which [defense] block to train (0-based)");
  auto* seed_opt = train->add_option("--seed", seed, "override the run seed");
  train->add_option("--model-out", model_out, "write the model file here");
  train->add_option("--confidences-out", confidences_out,
                    "write a confidence dump CSV here");

  auto* attack = app.add_subcommand("attack", "Attack a confidence dump");
  attack->add_option("--confidences", confidences_path,
                     "confidence dump CSV from `train`")
      ->required();
  attack->add_option("--attacks", attack_names,
                     "attacks to run (gap, confidence, entropy, "
                     "modified_entropy, nn)");
  attack->add_option("--seed", seed, "seed for the nn attack");

  auto* sweep = app.add_subcommand("sweep", "Full train-attack-report sweep");
  sweep->add_option("--config", config_path, "experiment config file")
      ->required();
  sweep->add_option("--out", out_dir, "override the config output_dir");

  std::size_t n_train = 5000, n_reference = 5000, steps = 1000, grid = 11;
  double epsilon_0 = 1.0, delta = 1e-5, clip_norm = 1.0, sampling_ratio = 0.1;
  double vc_dim = 100.0;
  auto* theory = app.add_subcommand("theory", "Analytic tradeoff curves");
  theory->add_option("--n-train", n_train, "training-set size");
  theory->add_option("--n-reference", n_reference, "reference-set size");
  theory->add_option("--epsilon0", epsilon_0, "per-step base budget");
  theory->add_option("--delta", delta, "privacy delta");
  theory->add_option("--steps", steps, "training steps K");
  theory->add_option("--clip", clip_norm, "gradient clip norm C");
  theory->add_option("--alpha", sampling_ratio, "sampling ratio");
  theory->add_option("--vc", vc_dim, "VC dimension for the bound");
  theory->add_option("--grid", grid, "number of w grid points");
  theory->add_option("--out", out_dir, "output directory")->required();

  auto* report = app.add_subcommand("report", "Re-render reports from results.csv");
  report->add_option("--results", results_path, "results.csv path")->required();
  report->add_option("--out", out_dir, "output directory")->required();
  report->add_option("--n-train", n_train, "training-set size for the PCC table");
  report->add_option("--n-reference", n_reference,
                     "reference-set size for the PCC table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    have_seed = seed_opt->count() > 0;
    if (train->parsed()) {
      return cmd_train(config_path, defense_index, seed, have_seed, model_out,
                       confidences_out);
    }
    if (attack->parsed()) {
      return cmd_attack(confidences_path, attack_names, seed);
    }
    if (sweep->parsed()) return cmd_sweep(config_path, out_dir);
    if (theory->parsed()) {
      return cmd_theory(n_train, n_reference, epsilon_0, delta, steps,
                        clip_norm, sampling_ratio, vc_dim, grid, out_dir);
    }
    if (report->parsed()) {
      return cmd_report(results_path, out_dir, n_train, n_reference);
    }
  } catch (const privbench::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 2;
  } catch (const privbench::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const privbench::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 1;
  } catch (const privbench::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
