#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "privbench/batch.hpp"
#include "privbench/dataset.hpp"
#include "privbench/mlp.hpp"

namespace privbench {

enum class DefenseKind {
  kErm,
  kWerm,
  kWermEs,
  kAdvReg,
  kAdvRegRT,
  kMmd,
  kDpSgdWerm,
};

std::string defense_kind_name(DefenseKind kind);
std::optional<DefenseKind> defense_kind_from_name(const std::string& name);

struct DpParams {
  double clip_norm = 1.0;       // C
  double noise_scale = 0.0;     // sigma
  double sampling_ratio = 0.1;  // alpha
  double delta = 1e-5;
  std::size_t steps = 0;        // K; 0 means derive from epochs
};

struct DefenseSpec {
  DefenseKind kind = DefenseKind::kErm;
  double w = 0.0;        // reference weight, WERM family
  double lambda = 0.0;   // regularization weight, AdvReg/MMD
  std::size_t epochs = 20;
  std::size_t batch_size = 128;
  double learning_rate = 0.001;
  std::vector<std::size_t> hidden_sizes{256, 128};         // classifier hidden layers
  std::vector<std::size_t> attack_hidden_sizes{256, 64};   // AdvReg attack model
  std::size_t update_ratio = 20;   // attack:classifier update ratio
  double kernel_variance = 1.0;    // MMD Gaussian kernel
  std::size_t warmup_epochs = 1;   // plain-ERM epochs before regularization
  std::optional<DpParams> dp;

  /// The swept parameter for reporting: w for the WERM family, lambda for the
  /// regularizers, 0 for plain ERM.
  double tradeoff_parameter() const;

  void validate() const;
};

struct TrainedInstance {
  MlpModel model;
  DefenseSpec spec;
  std::uint64_t seed = 0;
  std::size_t epochs_run = 0;
  std::vector<double> per_epoch_seconds;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double reference_loss = 0.0;
  double reference_accuracy = 0.0;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
};

/// test_loss - train_loss, the empirical proxy for the generalization gap.
double generalization_gap(const TrainedInstance& instance);

/// Mean loss and accuracy over a dataset, evaluated in chunks.
std::pair<double, double> evaluate_model(const MlpModel& model,
                                         const LabeledDataset& dataset);

/// Dispatch on spec.kind. reference may be empty only for plain ERM.
TrainedInstance train_defense(const LabeledDataset& train,
                              const LabeledDataset& reference,
                              const LabeledDataset& test,
                              const DefenseSpec& spec, std::uint64_t seed);

TrainedInstance train_erm(const LabeledDataset& train, const LabeledDataset& test,
                          const DefenseSpec& spec, std::uint64_t seed);
TrainedInstance train_werm(const LabeledDataset& train,
                           const LabeledDataset& reference,
                           const LabeledDataset& test, const DefenseSpec& spec,
                           std::uint64_t seed);
TrainedInstance train_advreg(const LabeledDataset& train,
                             const LabeledDataset& reference,
                             const LabeledDataset& test, const DefenseSpec& spec,
                             std::uint64_t seed);
TrainedInstance train_mmd(const LabeledDataset& train,
                          const LabeledDataset& reference,
                          const LabeledDataset& test, const DefenseSpec& spec,
                          std::uint64_t seed);
TrainedInstance train_dpsgd_werm(const LabeledDataset& train,
                                 const LabeledDataset& reference,
                                 const LabeledDataset& test,
                                 const DefenseSpec& spec, std::uint64_t seed);

/// Biased MMD^2 estimator between two batches of confidence rows under the
/// Gaussian kernel k(a,b) = exp(-||a-b||^2 / (2 variance)).
double mmd_squared(const Matrix& a, const Matrix& b, double variance);

/// As above, also accumulating d(MMD^2)/d(row) into grad_a / grad_b
/// (same shapes as a and b), scaled by `scale`.
double mmd_squared_with_grad(const Matrix& a, const Matrix& b, double variance,
                             double scale, Matrix& grad_a, Matrix& grad_b);

/// In-place clip to L2 norm <= clip_norm: g <- g / max(1, ||g|| / C).
void clip_gradient(GradientRecord& grads, double clip_norm);

/// Adversarial-regularization gain: mean log h on members plus mean log(1-h)
/// on non-members, with the 1e-12 clamp.
double advreg_gain(const std::vector<double>& member_scores,
                   const std::vector<double>& nonmember_scores);

/// Attack-model input row: one-hot label concatenated with the confidence
/// vector, width 2 * class_count.
Matrix attack_model_input(const Matrix& confidences,
                          const std::vector<std::size_t>& labels,
                          std::size_t class_count);

}  // namespace privbench
