#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "privbench/attack.hpp"
#include "privbench/dataset.hpp"
#include "privbench/defense.hpp"
#include "privbench/theory.hpp"

namespace privbench {

struct SyntheticParams {
  std::size_t classes = 100;
  std::size_t per_class = 150;
  std::size_t dim = 600;
  double flip_prob = 0.1;
};

struct ExperimentConfig {
  std::string dataset_path;  // empty means synthetic
  bool labels_one_based = false;
  SyntheticParams synthetic;
  std::size_t n_train = 5000;
  std::size_t n_reference = 5000;
  std::size_t n_test = 4000;
  std::size_t n_attacker = 0;  // fourth slice for the NN attacker's known sets
  std::uint64_t master_seed = 42;
  std::size_t seeds_per_point = 10;
  std::vector<DefenseSpec> defenses;
  std::vector<AttackKind> attacks{AttackKind::kConfidenceThreshold,
                                  AttackKind::kGap};
  std::string output_dir = "out";

  void validate() const;
};

ExperimentConfig parse_config_file(const std::string& path);

struct PointStats {
  double mean = 0.0;
  double stddev = 0.0;
};

/// One defense spec aggregated across seeds; the primary MIA numbers come
/// from the confidence-threshold attack when present, else the first attack.
struct TradeoffPoint {
  std::string defense;
  double parameter = 0.0;
  PointStats test_accuracy;
  PointStats mia_train;
  PointStats mia_ref;
  std::map<std::string, PointStats> attack_train;
  std::map<std::string, PointStats> attack_ref;
  double epoch_seconds_mean = 0.0;
  std::vector<std::uint64_t> seeds;
  bool failed = false;
  std::string failure_reason;
};

enum class Regime { kPublicReference, kEqualPrivacy, kHighReferencePrivacy };

std::string regime_name(Regime regime);

struct RegimeSelection {
  Regime regime = Regime::kPublicReference;
  std::optional<TradeoffPoint> chosen;
  std::string reason;
};

/// Thresholds straight from the selection procedures: filter, then maximize
/// test accuracy with (lowest mia_train, lowest mia_ref) tie-breaks.
RegimeSelection select_instance(const std::vector<TradeoffPoint>& points,
                                Regime regime);

std::vector<TradeoffPoint> run_sweep(const ExperimentConfig& config);

/// Evaluate one trained instance against the configured attacks. Members vs
/// test and reference vs test, larger side truncated to the smaller.
struct InstanceAttackResults {
  std::map<std::string, double> train_side;
  std::map<std::string, double> ref_side;
};

InstanceAttackResults attack_instance(const TrainedInstance& instance,
                                      const LabeledDataset& train,
                                      const LabeledDataset& reference,
                                      const LabeledDataset& test,
                                      const LabeledDataset& attacker_slice,
                                      const std::vector<AttackKind>& attacks,
                                      std::uint64_t seed);

struct ReportBundle {
  std::string results_csv;
  std::string selections_csv;
  std::string timing_csv;
  std::string pcc_csv;
  std::string curves_svg;
};

ReportBundle emit_report(const std::vector<TradeoffPoint>& points,
                         const std::vector<RegimeSelection>& selections,
                         const ExperimentConfig& config,
                         const std::string& output_dir);

/// Re-read the full-precision shadow columns of a results.csv.
std::vector<TradeoffPoint> read_results_csv(const std::string& path);

/// Per-defense Pearson r between theoretical relative-privacy values
/// ((1-w)/w * N_R/N_T for the WERM family, 1/lambda for the regularizers)
/// and empirical mia_train/mia_ref ratios. Non-finite pairs are dropped.
std::map<std::string, double> configurability_by_defense(
    const std::vector<TradeoffPoint>& points, std::size_t n_train,
    std::size_t n_reference);

}  // namespace privbench
