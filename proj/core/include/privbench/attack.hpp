#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "privbench/matrix.hpp"
#include "privbench/mlp.hpp"

namespace privbench {

enum class AttackKind {
  kGap,
  kConfidenceThreshold,
  kEntropyThreshold,
  kModifiedEntropyThreshold,
  kNeuralNetwork,
};

std::string attack_kind_name(AttackKind kind);
std::optional<AttackKind> attack_kind_from_name(const std::string& name);

enum class ScoreKind { kConfidence, kEntropy, kModifiedEntropy };

/// Confidence rows for the member side and the non-member side, with true
/// labels. The standard evaluation uses equal sizes; unequal sizes are legal
/// but flagged.
struct AttackInput {
  Matrix member_confidences;
  std::vector<std::size_t> member_labels;
  Matrix nonmember_confidences;
  std::vector<std::size_t> nonmember_labels;

  void validate() const;
  bool equal_sizes() const {
    return member_labels.size() == nonmember_labels.size();
  }
};

struct AttackReport {
  AttackKind attack_kind = AttackKind::kGap;
  double accuracy = 0.0;
  std::optional<double> threshold;
};

/// (sum of member predictions + sum of flipped non-member predictions) over
/// the total count.
double mia_accuracy(const std::vector<int>& member_predictions,
                    const std::vector<int>& nonmember_predictions);

/// Member iff the model classifies the point correctly. With equal set sizes
/// the accuracy equals 1/2 + (acc_members - acc_nonmembers) / 2.
AttackReport gap_attack(const AttackInput& input);

/// Per-example membership score. Confidence: f(x)_y. Entropy: -sum p log p.
/// Modified entropy: -(1-p_y) log p_y - sum_{c != y} p_c log(1 - p_c).
double membership_score(const Matrix& confidences, std::size_t row,
                        std::size_t label, ScoreKind score);

/// Threshold swept exhaustively over all observed score values plus infinite
/// sentinels, maximizing the accuracy on the input itself (worst-case
/// empirical leakage). Confidence: member iff score >= tau; entropy variants:
/// member iff score <= tau.
AttackReport threshold_attack(const AttackInput& input, ScoreKind score);

/// Trains an MLP on (one-hot label ++ confidence vector) rows from the
/// attacker-known sets, then scores the evaluation input at a 0.5 cutoff.
/// The known sets must be disjoint from the evaluation sets; confidences are
/// compared row-wise to enforce that.
AttackReport nn_attack(const AttackInput& input, const AttackInput& known,
                       const std::vector<std::size_t>& hidden_sizes,
                       std::uint64_t seed);

}  // namespace privbench
