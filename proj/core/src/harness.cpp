#include "privbench/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "privbench/rng.hpp"

namespace privbench {

void ExperimentConfig::validate() const {
  if (defenses.empty()) throw ConfigError("config: at least one defense required");
  if (attacks.empty()) throw ConfigError("config: at least one attack required");
  if (seeds_per_point == 0) throw ConfigError("config: seeds must be >= 1");
  const bool wants_nn = std::find(attacks.begin(), attacks.end(),
                                  AttackKind::kNeuralNetwork) != attacks.end();
  if (wants_nn && n_attacker == 0) {
    throw ConfigError("config: nn attack needs n_attacker > 0 for the "
                      "attacker's known non-member slice");
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& s) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(s)) out.push_back(std::stoul(item));
  return out;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("config: bad boolean '" + s + "'");
}

void apply_defense_key(DefenseSpec& spec, const std::string& key,
                       const std::string& value) {
  auto ensure_dp = [&]() -> DpParams& {
    if (!spec.dp) spec.dp = DpParams{};
    return *spec.dp;
  };
  if (key == "kind") {
    auto kind = defense_kind_from_name(value);
    if (!kind) throw ConfigError("config: unknown defense kind '" + value + "'");
    spec.kind = *kind;
  } else if (key == "w") {
    spec.w = std::stod(value);
  } else if (key == "lambda") {
    spec.lambda = std::stod(value);
  } else if (key == "epochs") {
    spec.epochs = std::stoul(value);
  } else if (key == "batch_size") {
    spec.batch_size = std::stoul(value);
  } else if (key == "learning_rate") {
    spec.learning_rate = std::stod(value);
  } else if (key == "hidden") {
    spec.hidden_sizes = parse_size_list(value);
  } else if (key == "attack_hidden") {
    spec.attack_hidden_sizes = parse_size_list(value);
  } else if (key == "update_ratio") {
    spec.update_ratio = std::stoul(value);
  } else if (key == "kernel_variance") {
    spec.kernel_variance = std::stod(value);
  } else if (key == "warmup_epochs") {
    spec.warmup_epochs = std::stoul(value);
  } else if (key == "clip_norm") {
    ensure_dp().clip_norm = std::stod(value);
  } else if (key == "noise_scale") {
    ensure_dp().noise_scale = std::stod(value);
  } else if (key == "sampling_ratio") {
    ensure_dp().sampling_ratio = std::stod(value);
  } else if (key == "dp_delta") {
    ensure_dp().delta = std::stod(value);
  } else if (key == "dp_steps") {
    ensure_dp().steps = std::stoul(value);
  } else {
    throw ConfigError("config: unknown defense key '" + key + "'");
  }
}

}  // namespace

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  ExperimentConfig config;
  DefenseSpec defaults;
  bool in_defense = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line == "[defense]") {
      config.defenses.push_back(defaults);
      in_defense = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (in_defense) {
      apply_defense_key(config.defenses.back(), key, value);
      continue;
    }
    if (key == "dataset") {
      config.dataset_path = value == "synthetic" ? "" : value;
    } else if (key == "labels_one_based") {
      config.labels_one_based = parse_bool(value);
    } else if (key == "classes") {
      config.synthetic.classes = std::stoul(value);
    } else if (key == "per_class") {
      config.synthetic.per_class = std::stoul(value);
    } else if (key == "dim") {
      config.synthetic.dim = std::stoul(value);
    } else if (key == "flip_prob") {
      config.synthetic.flip_prob = std::stod(value);
    } else if (key == "n_train") {
      config.n_train = std::stoul(value);
    } else if (key == "n_reference") {
      config.n_reference = std::stoul(value);
    } else if (key == "n_test") {
      config.n_test = std::stoul(value);
    } else if (key == "n_attacker") {
      config.n_attacker = std::stoul(value);
    } else if (key == "master_seed") {
      config.master_seed = std::stoull(value);
    } else if (key == "seeds") {
      config.seeds_per_point = std::stoul(value);
    } else if (key == "output_dir") {
      config.output_dir = value;
    } else if (key == "attacks") {
      config.attacks.clear();
      for (const auto& name : split_list(value)) {
        auto kind = attack_kind_from_name(name);
        if (!kind) throw ConfigError("config: unknown attack '" + name + "'");
        config.attacks.push_back(*kind);
      }
    } else {
      // Everything else seeds the per-defense defaults.
      apply_defense_key(defaults, key, value);
    }
  }
  config.validate();
  return config;
}

std::string regime_name(Regime regime) {
  switch (regime) {
    case Regime::kPublicReference: return "public_reference";
    case Regime::kEqualPrivacy: return "equal_privacy";
    case Regime::kHighReferencePrivacy: return "high_reference_privacy";
  }
  return "unknown";
}

RegimeSelection select_instance(const std::vector<TradeoffPoint>& points,
                                Regime regime) {
  if (points.empty()) throw ConfigError("select_instance: no points");
  RegimeSelection selection;
  selection.regime = regime;
  const TradeoffPoint* best = nullptr;
  for (const auto& point : points) {
    if (point.failed) continue;
    bool eligible = false;
    switch (regime) {
      case Regime::kPublicReference:
        eligible = point.mia_train.mean <= 0.51;
        break;
      case Regime::kEqualPrivacy:
        eligible = std::abs(point.mia_train.mean - point.mia_ref.mean) <= 0.04;
        break;
      case Regime::kHighReferencePrivacy:
        eligible = point.mia_ref.mean <= 0.51;
        break;
    }
    if (!eligible) continue;
    if (!best) {
      best = &point;
      continue;
    }
    const auto key = [](const TradeoffPoint& p) {
      return std::make_tuple(-p.test_accuracy.mean, p.mia_train.mean,
                             p.mia_ref.mean);
    };
    if (key(point) < key(*best)) best = &point;
  }
  if (best) {
    selection.chosen = *best;
  } else {
    selection.reason = "no model instances that met the criteria";
  }
  return selection;
}

namespace {

struct FourWaySplit {
  LabeledDataset train;
  LabeledDataset reference;
  LabeledDataset test;
  LabeledDataset attacker;
};

FourWaySplit split_four(const LabeledDataset& dataset, std::size_t n_train,
                        std::size_t n_reference, std::size_t n_test,
                        std::size_t n_attacker, std::uint64_t seed) {
  const std::size_t total = n_train + n_reference + n_test + n_attacker;
  if (total > dataset.size()) {
    throw ConfigError("split: requested " + std::to_string(total) +
                      " examples from dataset of " + std::to_string(dataset.size()));
  }
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  auto engine = make_engine(seed);
  std::shuffle(order.begin(), order.end(), engine);
  auto take = [&](std::size_t offset, std::size_t count) {
    return dataset.subset(std::vector<std::size_t>(
        order.begin() + offset, order.begin() + offset + count));
  };
  FourWaySplit splits;
  splits.train = take(0, n_train);
  splits.reference = take(n_train, n_reference);
  splits.test = take(n_train + n_reference, n_test);
  if (n_attacker > 0) {
    splits.attacker = take(n_train + n_reference + n_test, n_attacker);
  }
  return splits;
}

Matrix truncate_rows(const Matrix& m, std::size_t rows) {
  Matrix out(rows, m.cols());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
  }
  return out;
}

Matrix rows_range(const Matrix& m, std::size_t begin, std::size_t end) {
  Matrix out(end - begin, m.cols());
  for (std::size_t r = begin; r < end; ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out(r - begin, c) = m(r, c);
  }
  return out;
}

AttackInput make_input(const Matrix& member_probs,
                       const std::vector<std::size_t>& member_labels,
                       const Matrix& nonmember_probs,
                       const std::vector<std::size_t>& nonmember_labels) {
  const std::size_t n = std::min(member_labels.size(), nonmember_labels.size());
  AttackInput input;
  input.member_confidences = truncate_rows(member_probs, n);
  input.member_labels.assign(member_labels.begin(), member_labels.begin() + n);
  input.nonmember_confidences = truncate_rows(nonmember_probs, n);
  input.nonmember_labels.assign(nonmember_labels.begin(),
                                nonmember_labels.begin() + n);
  return input;
}

Matrix model_confidences(const MlpModel& model, const LabeledDataset& dataset) {
  constexpr std::size_t kChunk = 512;
  Matrix out(dataset.size(), model.output_size());
  for (std::size_t start = 0; start < dataset.size(); start += kChunk) {
    const std::size_t count = std::min(kChunk, dataset.size() - start);
    Matrix chunk(count, dataset.dim());
    for (std::size_t r = 0; r < count; ++r) {
      for (std::size_t c = 0; c < dataset.dim(); ++c) {
        chunk(r, c) = dataset.features(start + r, c);
      }
    }
    Matrix probs = forward(model, chunk);
    for (std::size_t r = 0; r < count; ++r) {
      for (std::size_t c = 0; c < probs.cols(); ++c) {
        out(start + r, c) = probs(r, c);
      }
    }
  }
  return out;
}

double run_one_attack(AttackKind kind, const AttackInput& input,
                      const Matrix& member_probs,
                      const std::vector<std::size_t>& member_labels,
                      const LabeledDataset& attacker_slice,
                      const MlpModel& model, std::uint64_t seed) {
  switch (kind) {
    case AttackKind::kGap:
      return gap_attack(input).accuracy;
    case AttackKind::kConfidenceThreshold:
      return threshold_attack(input, ScoreKind::kConfidence).accuracy;
    case AttackKind::kEntropyThreshold:
      return threshold_attack(input, ScoreKind::kEntropy).accuracy;
    case AttackKind::kModifiedEntropyThreshold:
      return threshold_attack(input, ScoreKind::kModifiedEntropy).accuracy;
    case AttackKind::kNeuralNetwork: {
      if (attacker_slice.size() == 0) {
        throw ConfigError("nn attack requires an attacker slice (n_attacker)");
      }
      // Known members: back half of the member set; evaluation uses the
      // front half. Known non-members come from the disjoint fourth slice.
      const std::size_t half = member_labels.size() / 2;
      if (half == 0) throw ConfigError("nn attack: member set too small");
      AttackInput known;
      known.member_confidences =
          rows_range(member_probs, half, member_labels.size());
      known.member_labels.assign(member_labels.begin() + half, member_labels.end());
      known.nonmember_confidences = model_confidences(model, attacker_slice);
      known.nonmember_labels = attacker_slice.labels;
      AttackInput eval;
      eval.member_confidences = rows_range(member_probs, 0, half);
      eval.member_labels.assign(member_labels.begin(), member_labels.begin() + half);
      const std::size_t n_non = std::min(input.nonmember_labels.size(),
                                         eval.member_labels.size());
      eval.nonmember_confidences = truncate_rows(input.nonmember_confidences, n_non);
      eval.nonmember_labels.assign(input.nonmember_labels.begin(),
                                   input.nonmember_labels.begin() + n_non);
      return nn_attack(eval, known, {64, 32}, seed).accuracy;
    }
  }
  throw ConfigError("unknown attack kind");
}

}  // namespace

InstanceAttackResults attack_instance(const TrainedInstance& instance,
                                      const LabeledDataset& train,
                                      const LabeledDataset& reference,
                                      const LabeledDataset& test,
                                      const LabeledDataset& attacker_slice,
                                      const std::vector<AttackKind>& attacks,
                                      std::uint64_t seed) {
  const Matrix train_probs = model_confidences(instance.model, train);
  const Matrix ref_probs = model_confidences(instance.model, reference);
  const Matrix test_probs = model_confidences(instance.model, test);

  AttackInput train_input =
      make_input(train_probs, train.labels, test_probs, test.labels);
  AttackInput ref_input =
      make_input(ref_probs, reference.labels, test_probs, test.labels);

  InstanceAttackResults results;
  for (AttackKind kind : attacks) {
    results.train_side[attack_kind_name(kind)] =
        run_one_attack(kind, train_input, train_probs, train.labels,
                       attacker_slice, instance.model, derive_seed(seed, 7));
    results.ref_side[attack_kind_name(kind)] =
        run_one_attack(kind, ref_input, ref_probs, reference.labels,
                       attacker_slice, instance.model, derive_seed(seed, 8));
  }
  return results;
}

namespace {

PointStats stats_of(const std::vector<double>& values) {
  PointStats stats;
  if (values.empty()) return stats;
  const double n = static_cast<double>(values.size());
  for (double v : values) stats.mean += v;
  stats.mean /= n;
  double sq = 0.0;
  for (double v : values) sq += (v - stats.mean) * (v - stats.mean);
  stats.stddev = std::sqrt(sq / n);
  return stats;
}

}  // namespace

std::vector<TradeoffPoint> run_sweep(const ExperimentConfig& config) {
  config.validate();
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

  const std::string primary = attack_kind_name(AttackKind::kConfidenceThreshold);
  std::vector<TradeoffPoint> points;
  for (std::size_t d = 0; d < config.defenses.size(); ++d) {
    const DefenseSpec& spec = config.defenses[d];
    TradeoffPoint point;
    point.defense = defense_kind_name(spec.kind);
    point.parameter = spec.tradeoff_parameter();
    std::vector<double> accs, gaps_train, gaps_ref, epoch_secs;
    std::map<std::string, std::vector<double>> per_attack_train, per_attack_ref;
    try {
      for (std::size_t s = 0; s < config.seeds_per_point; ++s) {
        const std::uint64_t run_seed =
            derive_seed(config.master_seed, 1 + d * 1024 + s);
        point.seeds.push_back(run_seed);
        FourWaySplit splits =
            split_four(pool, config.n_train, config.n_reference, config.n_test,
                       config.n_attacker, derive_seed(run_seed, 100));
        TrainedInstance instance = train_defense(
            splits.train, splits.reference, splits.test, spec, run_seed);
        InstanceAttackResults attack_results =
            attack_instance(instance, splits.train, splits.reference,
                            splits.test, splits.attacker, config.attacks,
                            derive_seed(run_seed, 200));
        accs.push_back(instance.test_accuracy);
        for (const auto& [name, acc] : attack_results.train_side) {
          per_attack_train[name].push_back(acc);
        }
        for (const auto& [name, acc] : attack_results.ref_side) {
          per_attack_ref[name].push_back(acc);
        }
        double mean_epoch = 0.0;
        for (double t : instance.per_epoch_seconds) mean_epoch += t;
        if (!instance.per_epoch_seconds.empty()) {
          mean_epoch /= static_cast<double>(instance.per_epoch_seconds.size());
        }
        epoch_secs.push_back(mean_epoch);
      }
    } catch (const std::exception& e) {
      point.failed = true;
      point.failure_reason = e.what();
      points.push_back(point);
      continue;
    }
    point.test_accuracy = stats_of(accs);
    for (const auto& [name, values] : per_attack_train) {
      point.attack_train[name] = stats_of(values);
    }
    for (const auto& [name, values] : per_attack_ref) {
      point.attack_ref[name] = stats_of(values);
    }
    const std::string key =
        point.attack_train.count(primary) ? primary : point.attack_train.begin()->first;
    point.mia_train = point.attack_train.at(key);
    point.mia_ref = point.attack_ref.at(key);
    point.epoch_seconds_mean = stats_of(epoch_secs).mean;
    points.push_back(point);
  }
  return points;
}

std::map<std::string, double> configurability_by_defense(
    const std::vector<TradeoffPoint>& points, std::size_t n_train,
    std::size_t n_reference) {
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& point : points) {
    if (point.failed) continue;
    double theoretical = 0.0;
    if (point.defense == "werm" || point.defense == "werm_es" ||
        point.defense == "dpsgd_werm") {
      if (point.parameter <= 0.0) continue;  // w = 0 has infinite ratio
      theoretical = relative_privacy_ratio(n_train, n_reference, point.parameter);
    } else if (point.defense == "advreg" || point.defense == "advreg_rt" ||
               point.defense == "mmd") {
      if (point.parameter <= 0.0) continue;
      theoretical = 1.0 / point.parameter;
    } else {
      continue;
    }
    if (point.mia_ref.mean <= 0.0) continue;
    groups[point.defense].first.push_back(theoretical);
    groups[point.defense].second.push_back(point.mia_train.mean / point.mia_ref.mean);
  }
  std::map<std::string, double> out;
  for (const auto& [name, series] : groups) {
    if (series.first.size() < 3) continue;
    try {
      out[name] = pearson_configurability(series.first, series.second);
    } catch (const NumericError&) {
      // zero variance: leave the defense out of the table
    }
  }
  return out;
}

namespace {

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ReportBundle emit_report(const std::vector<TradeoffPoint>& points,
                         const std::vector<RegimeSelection>& selections,
                         const ExperimentConfig& config,
                         const std::string& output_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  ReportBundle bundle;
  bundle.results_csv = output_dir + "/results.csv";
  bundle.selections_csv = output_dir + "/selections.csv";
  bundle.timing_csv = output_dir + "/timing.csv";
  bundle.pcc_csv = output_dir + "/pcc.csv";
  bundle.curves_svg = output_dir + "/curves.svg";

  std::vector<std::string> attack_names;
  for (AttackKind kind : config.attacks) attack_names.push_back(attack_kind_name(kind));
  std::sort(attack_names.begin(), attack_names.end());

  {
    std::ofstream out(bundle.results_csv);
    if (!out) throw IoError("cannot write " + bundle.results_csv);
    out << "defense,parameter,parameter_full,seeds,failed,reason,"
           "test_acc,test_acc_full,test_acc_std,test_acc_std_full,"
           "mia_train,mia_train_full,mia_train_std,mia_train_std_full,"
           "mia_ref,mia_ref_full,mia_ref_std,mia_ref_std_full";
    for (const auto& name : attack_names) {
      out << ",atk_" << name << "_train,atk_" << name << "_train_full"
          << ",atk_" << name << "_ref,atk_" << name << "_ref_full";
    }
    out << '\n';
    for (const auto& p : points) {
      out << p.defense << ',' << fmt6(p.parameter) << ',' << fmt17(p.parameter)
          << ',' << p.seeds.size() << ',' << (p.failed ? 1 : 0) << ','
          << p.failure_reason << ',' << fmt6(p.test_accuracy.mean) << ','
          << fmt17(p.test_accuracy.mean) << ',' << fmt6(p.test_accuracy.stddev)
          << ',' << fmt17(p.test_accuracy.stddev) << ',' << fmt6(p.mia_train.mean)
          << ',' << fmt17(p.mia_train.mean) << ',' << fmt6(p.mia_train.stddev)
          << ',' << fmt17(p.mia_train.stddev) << ',' << fmt6(p.mia_ref.mean)
          << ',' << fmt17(p.mia_ref.mean) << ',' << fmt6(p.mia_ref.stddev)
          << ',' << fmt17(p.mia_ref.stddev);
      for (const auto& name : attack_names) {
        const double train_v =
            p.attack_train.count(name) ? p.attack_train.at(name).mean : 0.0;
        const double ref_v =
            p.attack_ref.count(name) ? p.attack_ref.at(name).mean : 0.0;
        out << ',' << fmt6(train_v) << ',' << fmt17(train_v) << ','
            << fmt6(ref_v) << ',' << fmt17(ref_v);
      }
      out << '\n';
    }
  }

  {
    std::ofstream out(bundle.selections_csv);
    if (!out) throw IoError("cannot write " + bundle.selections_csv);
    out << "regime,defense,parameter,test_acc,mia_train,mia_ref,reason\n";
    for (const auto& sel : selections) {
      out << regime_name(sel.regime) << ',';
      if (sel.chosen) {
        const auto& p = *sel.chosen;
        out << p.defense << ',' << fmt6(p.parameter) << ','
            << fmt6(p.test_accuracy.mean) << ',' << fmt6(p.mia_train.mean)
            << ',' << fmt6(p.mia_ref.mean) << ",\n";
      } else {
        out << ",,,,," << sel.reason << '\n';
      }
    }
  }

  {
    std::ofstream out(bundle.timing_csv);
    if (!out) throw IoError("cannot write " + bundle.timing_csv);
    out << "defense,parameter,epoch_seconds,epoch_seconds_full\n";
    for (const auto& p : points) {
      if (p.failed) continue;
      out << p.defense << ',' << fmt6(p.parameter) << ','
          << fmt6(p.epoch_seconds_mean) << ',' << fmt17(p.epoch_seconds_mean)
          << '\n';
    }
  }

  {
    std::ofstream out(bundle.pcc_csv);
    if (!out) throw IoError("cannot write " + bundle.pcc_csv);
    out << "defense,pcc,pcc_full\n";
    for (const auto& [name, r] :
         configurability_by_defense(points, config.n_train, config.n_reference)) {
      out << name << ',' << fmt6(r) << ',' << fmt17(r) << '\n';
    }
  }

  {
    std::ofstream out(bundle.curves_svg);
    if (!out) throw IoError("cannot write " + bundle.curves_svg);
    const double width = 640, height = 400, margin = 50;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    auto x_of = [&](double mia) {
      return margin + (std::clamp(mia, 0.4, 1.0) - 0.4) / 0.6 * (width - 2 * margin);
    };
    auto y_of = [&](double acc) {
      return height - margin - std::clamp(acc, 0.0, 1.0) * (height - 2 * margin);
    };
    for (const auto& p : points) {
      if (p.failed) continue;
      out << "<circle cx=\"" << x_of(p.mia_train.mean) << "\" cy=\""
          << y_of(p.test_accuracy.mean) << "\" r=\"4\" fill=\"#d62728\"/>\n";
      out << "<circle cx=\"" << x_of(p.mia_ref.mean) << "\" cy=\""
          << y_of(p.test_accuracy.mean) << "\" r=\"4\" fill=\"#2ca02c\"/>\n";
    }
    out << "<text x=\"" << width / 2 << "\" y=\"" << height - 10
        << "\" text-anchor=\"middle\" font-size=\"12\">MIA accuracy "
        << "(red: training data, green: reference data)</text>\n";
    out << "<text x=\"14\" y=\"" << height / 2
        << "\" font-size=\"12\" transform=\"rotate(-90 14 " << height / 2
        << ")\" text-anchor=\"middle\">test accuracy</text>\n";
    out << "</svg>\n";
  }

  // gnuplot-friendly twin of results.csv
  {
    std::ofstream out(output_dir + "/results.dat");
    out << "# defense parameter test_acc mia_train mia_ref\n";
    for (const auto& p : points) {
      if (p.failed) continue;
      out << p.defense << ' ' << fmt17(p.parameter) << ' '
          << fmt17(p.test_accuracy.mean) << ' ' << fmt17(p.mia_train.mean)
          << ' ' << fmt17(p.mia_ref.mean) << '\n';
    }
  }
  return bundle;
}

std::vector<TradeoffPoint> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  std::vector<std::string> header = split_list(line);
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw ParseError(path + ": missing column " + name);
  };
  const std::size_t c_defense = column("defense");
  const std::size_t c_param = column("parameter_full");
  const std::size_t c_failed = column("failed");
  const std::size_t c_reason = column("reason");
  const std::size_t c_acc = column("test_acc_full");
  const std::size_t c_acc_std = column("test_acc_std_full");
  const std::size_t c_train = column("mia_train_full");
  const std::size_t c_train_std = column("mia_train_std_full");
  const std::size_t c_ref = column("mia_ref_full");
  const std::size_t c_ref_std = column("mia_ref_std_full");

  std::vector<TradeoffPoint> points;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    while (fields.size() < header.size()) fields.emplace_back();
    TradeoffPoint p;
    p.defense = fields[c_defense];
    p.parameter = std::stod(fields[c_param]);
    p.failed = fields[c_failed] == "1";
    p.failure_reason = fields[c_reason];
    if (!p.failed) {
      p.test_accuracy = {std::stod(fields[c_acc]), std::stod(fields[c_acc_std])};
      p.mia_train = {std::stod(fields[c_train]), std::stod(fields[c_train_std])};
      p.mia_ref = {std::stod(fields[c_ref]), std::stod(fields[c_ref_std])};
    }
    points.push_back(std::move(p));
  }
  return points;
}

}  // namespace privbench
