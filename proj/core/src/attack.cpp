#include "privbench/attack.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <unordered_set>

#include "privbench/batch.hpp"
#include "privbench/loss.hpp"
#include "privbench/optimizer.hpp"
#include "privbench/rng.hpp"

namespace privbench {

std::string attack_kind_name(AttackKind kind) {
  switch (kind) {
    case AttackKind::kGap: return "gap";
    case AttackKind::kConfidenceThreshold: return "confidence";
    case AttackKind::kEntropyThreshold: return "entropy";
    case AttackKind::kModifiedEntropyThreshold: return "modified_entropy";
    case AttackKind::kNeuralNetwork: return "nn";
  }
  return "unknown";
}

std::optional<AttackKind> attack_kind_from_name(const std::string& name) {
  for (AttackKind kind :
       {AttackKind::kGap, AttackKind::kConfidenceThreshold,
        AttackKind::kEntropyThreshold, AttackKind::kModifiedEntropyThreshold,
        AttackKind::kNeuralNetwork}) {
    if (attack_kind_name(kind) == name) return kind;
  }
  return std::nullopt;
}

void AttackInput::validate() const {
  if (member_labels.empty() || nonmember_labels.empty()) {
    throw ConfigError("attack input: both sides must be non-empty");
  }
  if (member_confidences.rows() != member_labels.size() ||
      nonmember_confidences.rows() != nonmember_labels.size()) {
    throw ShapeError("attack input: confidence rows != label count");
  }
  if (member_confidences.cols() != nonmember_confidences.cols()) {
    throw ShapeError("attack input: class counts disagree between sides");
  }
}

double mia_accuracy(const std::vector<int>& member_predictions,
                    const std::vector<int>& nonmember_predictions) {
  if (member_predictions.empty() || nonmember_predictions.empty()) {
    throw ConfigError("mia_accuracy: empty prediction sequence");
  }
  std::size_t correct = 0;
  for (int p : member_predictions) correct += (p != 0);
  for (int p : nonmember_predictions) correct += (p == 0);
  return static_cast<double>(correct) /
         static_cast<double>(member_predictions.size() + nonmember_predictions.size());
}

AttackReport gap_attack(const AttackInput& input) {
  input.validate();
  std::vector<int> member_bits(input.member_labels.size());
  std::vector<int> nonmember_bits(input.nonmember_labels.size());
  for (std::size_t r = 0; r < input.member_labels.size(); ++r) {
    member_bits[r] =
        argmax_row(input.member_confidences, r) == input.member_labels[r];
  }
  for (std::size_t r = 0; r < input.nonmember_labels.size(); ++r) {
    nonmember_bits[r] =
        argmax_row(input.nonmember_confidences, r) == input.nonmember_labels[r];
  }
  AttackReport report;
  report.attack_kind = AttackKind::kGap;
  report.accuracy = mia_accuracy(member_bits, nonmember_bits);
  return report;
}

double membership_score(const Matrix& confidences, std::size_t row,
                        std::size_t label, ScoreKind score) {
  const std::size_t k = confidences.cols();
  switch (score) {
    case ScoreKind::kConfidence:
      return confidences(row, label);
    case ScoreKind::kEntropy: {
      double h = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        const double p = std::max(confidences(row, c), kLogClamp);
        h -= confidences(row, c) * std::log(p);
      }
      return h;
    }
    case ScoreKind::kModifiedEntropy: {
      const double py = confidences(row, label);
      double h = -(1.0 - py) * std::log(std::max(py, kLogClamp));
      for (std::size_t c = 0; c < k; ++c) {
        if (c == label) continue;
        const double p = confidences(row, c);
        h -= p * std::log(std::max(1.0 - p, kLogClamp));
      }
      return h;
    }
  }
  return 0.0;
}

namespace {

std::vector<double> score_side(const Matrix& confidences,
                               const std::vector<std::size_t>& labels,
                               ScoreKind score) {
  std::vector<double> out(labels.size());
  for (std::size_t r = 0; r < labels.size(); ++r) {
    out[r] = membership_score(confidences, r, labels[r], score);
  }
  return out;
}

// Correct predictions at threshold tau for "member iff score >= tau":
// members at or above tau plus non-members below it. The member-iff-below
// direction is handled by negating scores first.
double accuracy_at(const std::vector<double>& sorted_members,
                   const std::vector<double>& sorted_nonmembers, double tau) {
  const auto above = [&](const std::vector<double>& v) {
    return v.end() - std::lower_bound(v.begin(), v.end(), tau);
  };
  const std::size_t correct =
      static_cast<std::size_t>(above(sorted_members)) +
      (sorted_nonmembers.size() -
       static_cast<std::size_t>(above(sorted_nonmembers)));
  return static_cast<double>(correct) /
         static_cast<double>(sorted_members.size() + sorted_nonmembers.size());
}

}  // namespace

AttackReport threshold_attack(const AttackInput& input, ScoreKind score) {
  input.validate();
  std::vector<double> members =
      score_side(input.member_confidences, input.member_labels, score);
  std::vector<double> nonmembers =
      score_side(input.nonmember_confidences, input.nonmember_labels, score);

  // Entropy variants predict membership below the threshold; negate so a
  // single "score >= tau" sweep covers both directions.
  const bool member_below = score != ScoreKind::kConfidence;
  if (member_below) {
    for (auto& s : members) s = -s;
    for (auto& s : nonmembers) s = -s;
  }
  std::sort(members.begin(), members.end());
  std::sort(nonmembers.begin(), nonmembers.end());

  std::vector<double> candidates;
  candidates.reserve(members.size() + nonmembers.size() + 2);
  candidates.push_back(-std::numeric_limits<double>::infinity());
  candidates.insert(candidates.end(), members.begin(), members.end());
  candidates.insert(candidates.end(), nonmembers.begin(), nonmembers.end());
  candidates.push_back(std::numeric_limits<double>::infinity());

  double best_tau = candidates.front();
  double best_accuracy = -1.0;
  for (double tau : candidates) {
    const double acc = accuracy_at(members, nonmembers, tau);
    if (acc > best_accuracy) {
      best_accuracy = acc;
      best_tau = tau;
    }
  }

  AttackReport report;
  report.attack_kind = score == ScoreKind::kConfidence
                           ? AttackKind::kConfidenceThreshold
                           : (score == ScoreKind::kEntropy
                                  ? AttackKind::kEntropyThreshold
                                  : AttackKind::kModifiedEntropyThreshold);
  report.accuracy = best_accuracy;
  report.threshold = member_below ? -best_tau : best_tau;
  return report;
}

namespace {

void hash_rows(const Matrix& m, std::unordered_set<std::string>& into) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    into.emplace(reinterpret_cast<const char*>(m.data() + r * m.cols()),
                 m.cols() * sizeof(double));
  }
}

bool any_row_in(const Matrix& m, const std::unordered_set<std::string>& set) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::string key(reinterpret_cast<const char*>(m.data() + r * m.cols()),
                    m.cols() * sizeof(double));
    if (set.count(key)) return true;
  }
  return false;
}

}  // namespace

AttackReport nn_attack(const AttackInput& input, const AttackInput& known,
                       const std::vector<std::size_t>& hidden_sizes,
                       std::uint64_t seed) {
  input.validate();
  known.validate();
  const std::size_t k = input.member_confidences.cols();
  if (known.member_confidences.cols() != k) {
    throw ShapeError("nn_attack: class counts disagree");
  }

  std::unordered_set<std::string> known_rows;
  hash_rows(known.member_confidences, known_rows);
  hash_rows(known.nonmember_confidences, known_rows);
  if (any_row_in(input.member_confidences, known_rows) ||
      any_row_in(input.nonmember_confidences, known_rows)) {
    throw ConfigError("nn_attack: attacker-known sets overlap evaluation sets");
  }

  const std::size_t n_members = known.member_labels.size();
  const std::size_t n_nonmembers = known.nonmember_labels.size();
  LabeledDataset attack_train;
  attack_train.class_count = 2;
  attack_train.features = Matrix(n_members + n_nonmembers, 2 * k);
  for (std::size_t r = 0; r < n_members; ++r) {
    attack_train.features(r, known.member_labels[r]) = 1.0;
    for (std::size_t c = 0; c < k; ++c) {
      attack_train.features(r, k + c) = known.member_confidences(r, c);
    }
    attack_train.labels.push_back(1);
  }
  for (std::size_t r = 0; r < n_nonmembers; ++r) {
    attack_train.features(n_members + r, known.nonmember_labels[r]) = 1.0;
    for (std::size_t c = 0; c < k; ++c) {
      attack_train.features(n_members + r, k + c) = known.nonmember_confidences(r, c);
    }
    attack_train.labels.push_back(0);
  }

  std::vector<std::size_t> arch;
  arch.push_back(2 * k);
  arch.insert(arch.end(), hidden_sizes.begin(), hidden_sizes.end());
  arch.push_back(1);
  MlpModel model = MlpModel::init(arch, OutputKind::kSigmoid, derive_seed(seed, 0));
  OptimizerState state = OptimizerState::make(OptimizerKind::kAdam, 0.001, model);

  BatchStream stream(attack_train, 64, derive_seed(seed, 1));
  // 50 epochs at scale; small known sets get a floor of ~3000 Adam steps so
  // the attack model is trained to convergence either way.
  const std::size_t epochs =
      std::max<std::size_t>(50, 3000 / stream.batches_per_epoch() + 1);
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    const std::size_t batches = stream.batches_per_epoch();
    for (std::size_t b = 0; b < batches; ++b) {
      Batch batch = stream.next();
      ForwardCache cache;
      forward(model, batch.features, &cache);
      std::vector<double> weights(batch.labels.size(),
                                  1.0 / static_cast<double>(batch.labels.size()));
      GradientRecord grads = backward(model, cache, batch.labels, weights);
      optimizer_step(model, state, grads);
    }
  }

  auto predict = [&](const Matrix& confidences,
                     const std::vector<std::size_t>& labels) {
    Matrix features(labels.size(), 2 * k);
    for (std::size_t r = 0; r < labels.size(); ++r) {
      features(r, labels[r]) = 1.0;
      for (std::size_t c = 0; c < k; ++c) {
        features(r, k + c) = confidences(r, c);
      }
    }
    Matrix h = forward(model, features);
    std::vector<int> bits(labels.size());
    for (std::size_t r = 0; r < labels.size(); ++r) bits[r] = h(r, 0) > 0.5;
    return bits;
  };

  AttackReport report;
  report.attack_kind = AttackKind::kNeuralNetwork;
  report.accuracy =
      mia_accuracy(predict(input.member_confidences, input.member_labels),
                   predict(input.nonmember_confidences, input.nonmember_labels));
  return report;
}

}  // namespace privbench
