#include "privbench/defense.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <tuple>

#include "privbench/loss.hpp"
#include "privbench/optimizer.hpp"
#include "privbench/rng.hpp"

namespace privbench {

std::string defense_kind_name(DefenseKind kind) {
  switch (kind) {
    case DefenseKind::kErm: return "erm";
    case DefenseKind::kWerm: return "werm";
    case DefenseKind::kWermEs: return "werm_es";
    case DefenseKind::kAdvReg: return "advreg";
    case DefenseKind::kAdvRegRT: return "advreg_rt";
    case DefenseKind::kMmd: return "mmd";
    case DefenseKind::kDpSgdWerm: return "dpsgd_werm";
  }
  return "unknown";
}

std::optional<DefenseKind> defense_kind_from_name(const std::string& name) {
  for (DefenseKind kind :
       {DefenseKind::kErm, DefenseKind::kWerm, DefenseKind::kWermEs,
        DefenseKind::kAdvReg, DefenseKind::kAdvRegRT, DefenseKind::kMmd,
        DefenseKind::kDpSgdWerm}) {
    if (defense_kind_name(kind) == name) return kind;
  }
  return std::nullopt;
}

double DefenseSpec::tradeoff_parameter() const {
  switch (kind) {
    case DefenseKind::kWerm:
    case DefenseKind::kWermEs:
    case DefenseKind::kDpSgdWerm:
      return w;
    case DefenseKind::kAdvReg:
    case DefenseKind::kAdvRegRT:
    case DefenseKind::kMmd:
      return lambda;
    default:
      return 0.0;
  }
}

void DefenseSpec::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
  switch (kind) {
    case DefenseKind::kWerm:
    case DefenseKind::kWermEs:
    case DefenseKind::kDpSgdWerm:
      if (w < 0.0 || w > 1.0) throw ConfigError("w must be in [0,1]");
      break;
    case DefenseKind::kAdvReg:
    case DefenseKind::kAdvRegRT:
      if (lambda < 0.0) throw ConfigError("lambda must be non-negative");
      if (update_ratio < 1) throw ConfigError("update_ratio must be >= 1");
      break;
    case DefenseKind::kMmd:
      if (lambda < 0.0) throw ConfigError("lambda must be non-negative");
      if (kernel_variance <= 0.0) throw ConfigError("kernel_variance must be positive");
      if (batch_size < 512) {
        throw ConfigError("mmd needs batch_size >= 512 so each class appears "
                          "several times per batch");
      }
      break;
    default:
      break;
  }
  if (kind == DefenseKind::kDpSgdWerm) {
    if (!dp) throw ConfigError("dpsgd_werm needs dp parameters");
    if (dp->clip_norm <= 0.0) throw ConfigError("clip_norm must be positive");
    if (dp->noise_scale < 0.0) throw ConfigError("noise_scale must be non-negative");
    if (dp->sampling_ratio <= 0.0 || dp->sampling_ratio > 1.0) {
      throw ConfigError("sampling_ratio must be in (0,1]");
    }
    if (dp->delta <= 0.0 || dp->delta >= 1.0) throw ConfigError("delta must be in (0,1)");
  }
}

double generalization_gap(const TrainedInstance& instance) {
  return instance.test_loss - instance.train_loss;
}

std::pair<double, double> evaluate_model(const MlpModel& model,
                                         const LabeledDataset& dataset) {
  if (dataset.size() == 0) return {0.0, 0.0};
  constexpr std::size_t kChunk = 512;
  double loss_total = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < dataset.size(); start += kChunk) {
    const std::size_t count = std::min(kChunk, dataset.size() - start);
    Matrix chunk(count, dataset.dim());
    std::vector<std::size_t> labels(count);
    for (std::size_t r = 0; r < count; ++r) {
      for (std::size_t c = 0; c < dataset.dim(); ++c) {
        chunk(r, c) = dataset.features(start + r, c);
      }
      labels[r] = dataset.labels[start + r];
    }
    Matrix probs = forward(model, chunk);
    auto ce = cross_entropy(probs, labels);
    loss_total += ce.mean_loss * static_cast<double>(count);
    for (std::size_t r = 0; r < count; ++r) {
      if (argmax_row(probs, r) == labels[r]) ++correct;
    }
  }
  const double n = static_cast<double>(dataset.size());
  return {loss_total / n, static_cast<double>(correct) / n};
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::size_t> classifier_arch(const DefenseSpec& spec,
                                         const LabeledDataset& train) {
  std::vector<std::size_t> sizes;
  sizes.push_back(train.dim());
  sizes.insert(sizes.end(), spec.hidden_sizes.begin(), spec.hidden_sizes.end());
  sizes.push_back(train.class_count);
  return sizes;
}

void finalize_metrics(TrainedInstance& instance, const LabeledDataset& train,
                      const LabeledDataset& reference,
                      const LabeledDataset& test) {
  std::tie(instance.train_loss, instance.train_accuracy) =
      evaluate_model(instance.model, train);
  std::tie(instance.reference_loss, instance.reference_accuracy) =
      evaluate_model(instance.model, reference);
  std::tie(instance.test_loss, instance.test_accuracy) =
      evaluate_model(instance.model, test);
}

// One plain-ERM epoch over the training stream.
void erm_epoch(MlpModel& model, OptimizerState& state, BatchStream& stream) {
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

}  // namespace

TrainedInstance train_erm(const LabeledDataset& train, const LabeledDataset& test,
                          const DefenseSpec& spec, std::uint64_t seed) {
  spec.validate();
  TrainedInstance instance;
  instance.spec = spec;
  instance.seed = seed;
  instance.model = MlpModel::init(classifier_arch(spec, train),
                                  OutputKind::kSoftmax, derive_seed(seed, 0));
  OptimizerState state =
      OptimizerState::make(OptimizerKind::kAdam, spec.learning_rate, instance.model);
  BatchStream stream(train, spec.batch_size, derive_seed(seed, 1));
  for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
    auto start = Clock::now();
    erm_epoch(instance.model, state, stream);
    instance.per_epoch_seconds.push_back(seconds_since(start));
  }
  instance.epochs_run = spec.epochs;
  finalize_metrics(instance, train, {}, test);
  return instance;
}

TrainedInstance train_werm(const LabeledDataset& train,
                           const LabeledDataset& reference,
                           const LabeledDataset& test, const DefenseSpec& spec,
                           std::uint64_t seed) {
  spec.validate();
  if (spec.w < 1.0 && train.size() == 0) {
    throw ConfigError("werm: empty training data with nonzero training weight");
  }
  if (spec.w > 0.0 && reference.size() == 0) {
    throw ConfigError("werm: empty reference data with nonzero reference weight");
  }

  TrainedInstance instance;
  instance.spec = spec;
  instance.seed = seed;
  instance.model = MlpModel::init(classifier_arch(spec, train),
                                  OutputKind::kSoftmax, derive_seed(seed, 0));
  OptimizerState state =
      OptimizerState::make(OptimizerKind::kAdam, spec.learning_rate, instance.model);

  // Both streams share one seed so swapping the datasets (with N_T = N_R and
  // w <-> 1-w) replays the identical permutations on each side.
  const std::uint64_t stream_seed = derive_seed(seed, 1);
  const double ratio = static_cast<double>(reference.size()) /
                       static_cast<double>(train.size());
  std::size_t ref_batch = static_cast<std::size_t>(
      std::llround(static_cast<double>(spec.batch_size) * ratio));
  ref_batch = std::max<std::size_t>(1, std::min(ref_batch, std::max<std::size_t>(1, reference.size())));

  BatchStream train_stream(train, spec.batch_size, stream_seed);
  std::optional<BatchStream> ref_stream;
  if (spec.w > 0.0) ref_stream.emplace(reference, ref_batch, stream_seed);

  const std::size_t batches = train_stream.batches_per_epoch();
  for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
    auto start = Clock::now();
    for (std::size_t b = 0; b < batches; ++b) {
      Batch bt = train_stream.next();
      GradientRecord grads = GradientRecord::zeros_like(instance.model);
      if (spec.w < 1.0) {
        ForwardCache cache;
        forward(instance.model, bt.features, &cache);
        std::vector<double> weights(
            bt.labels.size(),
            (1.0 - spec.w) / static_cast<double>(bt.labels.size()));
        grads.add_scaled(backward(instance.model, cache, bt.labels, weights), 1.0);
      }
      if (spec.w > 0.0) {
        Batch br = ref_stream->next();
        ForwardCache cache;
        forward(instance.model, br.features, &cache);
        std::vector<double> weights(
            br.labels.size(), spec.w / static_cast<double>(br.labels.size()));
        grads.add_scaled(backward(instance.model, cache, br.labels, weights), 1.0);
      }
      optimizer_step(instance.model, state, grads);
    }
    instance.per_epoch_seconds.push_back(seconds_since(start));
  }
  instance.epochs_run = spec.epochs;
  finalize_metrics(instance, train, reference, test);
  return instance;
}

Matrix attack_model_input(const Matrix& confidences,
                          const std::vector<std::size_t>& labels,
                          std::size_t class_count) {
  if (confidences.cols() != class_count) {
    throw ShapeError("attack_model_input: confidence width != class count");
  }
  Matrix input(confidences.rows(), 2 * class_count);
  for (std::size_t r = 0; r < confidences.rows(); ++r) {
    input(r, labels[r]) = 1.0;
    for (std::size_t c = 0; c < class_count; ++c) {
      input(r, class_count + c) = confidences(r, c);
    }
  }
  return input;
}

double advreg_gain(const std::vector<double>& member_scores,
                   const std::vector<double>& nonmember_scores) {
  double gain = 0.0;
  for (double h : member_scores) {
    gain += std::log(std::max(h, kLogClamp)) /
            static_cast<double>(member_scores.size());
  }
  for (double h : nonmember_scores) {
    gain += std::log(std::max(1.0 - h, kLogClamp)) /
            static_cast<double>(nonmember_scores.size());
  }
  return gain;
}

TrainedInstance train_advreg(const LabeledDataset& train,
                             const LabeledDataset& reference,
                             const LabeledDataset& test, const DefenseSpec& spec,
                             std::uint64_t seed) {
  spec.validate();
  if (reference.size() == 0) throw ConfigError("advreg: empty reference data");
  const std::size_t k = train.class_count;

  TrainedInstance instance;
  instance.spec = spec;
  instance.seed = seed;
  instance.model = MlpModel::init(classifier_arch(spec, train),
                                  OutputKind::kSoftmax, derive_seed(seed, 0));
  OptimizerState cls_state =
      OptimizerState::make(OptimizerKind::kAdam, spec.learning_rate, instance.model);

  std::vector<std::size_t> attack_arch;
  attack_arch.push_back(2 * k);
  attack_arch.insert(attack_arch.end(), spec.attack_hidden_sizes.begin(),
                     spec.attack_hidden_sizes.end());
  attack_arch.push_back(1);
  MlpModel attack = MlpModel::init(attack_arch, OutputKind::kSigmoid,
                                   derive_seed(seed, 2));
  OptimizerState attack_state =
      OptimizerState::make(OptimizerKind::kAdam, spec.learning_rate, attack);

  BatchStream train_stream(train, spec.batch_size, derive_seed(seed, 1));
  BatchStream ref_stream(reference, spec.batch_size, derive_seed(seed, 1) ^ 1);
  auto engine = make_engine(derive_seed(seed, 3));
  std::bernoulli_distribution pick_classifier(
      1.0 / static_cast<double>(spec.update_ratio + 1));

  for (std::size_t epoch = 0; epoch < spec.warmup_epochs; ++epoch) {
    auto start = Clock::now();
    erm_epoch(instance.model, cls_state, train_stream);
    instance.per_epoch_seconds.push_back(seconds_since(start));
  }

  // An epoch visits (ratio + 1) x batches-per-epoch batch pairs so the
  // classifier receives roughly one full pass of updates per epoch; this
  // mirrors the alternating schedule's measured cost structure.
  const std::size_t iterations =
      (spec.update_ratio + 1) * train_stream.batches_per_epoch();

  for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
    auto start = Clock::now();
    for (std::size_t it = 0; it < iterations; ++it) {
      Batch bt = train_stream.next();
      Batch br = ref_stream.next();
      const std::size_t m = bt.labels.size();
      const std::size_t m_ref = br.labels.size();
      if (!pick_classifier(engine)) {
        // Attack model ascends the gain: members target 1, non-members 0.
        Matrix conf_t = forward(instance.model, bt.features);
        Matrix conf_r = forward(instance.model, br.features);
        Matrix in_t = attack_model_input(conf_t, bt.labels, k);
        Matrix in_r = attack_model_input(conf_r, br.labels, k);
        Matrix joined(m + m_ref, 2 * k);
        for (std::size_t r = 0; r < m; ++r) {
          for (std::size_t c = 0; c < 2 * k; ++c) joined(r, c) = in_t(r, c);
        }
        for (std::size_t r = 0; r < m_ref; ++r) {
          for (std::size_t c = 0; c < 2 * k; ++c) joined(m + r, c) = in_r(r, c);
        }
        std::vector<std::size_t> member_bits(m + m_ref, 0);
        std::vector<double> weights(m + m_ref);
        for (std::size_t r = 0; r < m; ++r) {
          member_bits[r] = 1;
          weights[r] = 1.0 / static_cast<double>(m);
        }
        for (std::size_t r = 0; r < m_ref; ++r) {
          weights[m + r] = 1.0 / static_cast<double>(m_ref);
        }
        ForwardCache cache;
        forward(attack, joined, &cache);
        GradientRecord grads = backward(attack, cache, member_bits, weights);
        optimizer_step(attack, attack_state, grads);
      } else {
        // Classifier descends CE + lambda * (1/m) sum log h; the RT variant
        // additionally carries the reference-data term of the objective.
        ForwardCache cls_cache;
        Matrix probs = forward(instance.model, bt.features, &cls_cache);
        Matrix delta = probs;
        for (std::size_t r = 0; r < m; ++r) {
          delta(r, bt.labels[r]) -= 1.0;
          for (std::size_t c = 0; c < k; ++c) {
            delta(r, c) /= static_cast<double>(m);
          }
        }
        if (spec.lambda > 0.0) {
          Matrix in_t = attack_model_input(probs, bt.labels, k);
          ForwardCache at_cache;
          Matrix h = forward(attack, in_t, &at_cache);
          Matrix d_h_pre(m, 1);
          for (std::size_t r = 0; r < m; ++r) {
            // d(log h)/d(preact) = 1 - h
            d_h_pre(r, 0) =
                spec.lambda / static_cast<double>(m) * (1.0 - h(r, 0));
          }
          Matrix d_attack_in;
          backward_from_preactivation(attack, at_cache, d_h_pre, &d_attack_in);
          for (std::size_t r = 0; r < m; ++r) {
            std::vector<double> p_row(k), dp_row(k);
            for (std::size_t c = 0; c < k; ++c) {
              p_row[c] = probs(r, c);
              dp_row[c] = d_attack_in(r, k + c);
            }
            auto dz = softmax_chain(p_row, dp_row);
            for (std::size_t c = 0; c < k; ++c) delta(r, c) += dz[c];
          }
        }
        GradientRecord grads =
            backward_from_preactivation(instance.model, cls_cache, delta);
        if (spec.kind == DefenseKind::kAdvRegRT && spec.lambda > 0.0) {
          ForwardCache ref_cache;
          Matrix ref_probs = forward(instance.model, br.features, &ref_cache);
          Matrix in_r = attack_model_input(ref_probs, br.labels, k);
          ForwardCache at_cache;
          Matrix h = forward(attack, in_r, &at_cache);
          Matrix d_h_pre(m_ref, 1);
          for (std::size_t r = 0; r < m_ref; ++r) {
            // d(log(1-h))/d(preact) = -h
            d_h_pre(r, 0) =
                -spec.lambda / static_cast<double>(m_ref) * h(r, 0);
          }
          Matrix d_attack_in;
          backward_from_preactivation(attack, at_cache, d_h_pre, &d_attack_in);
          Matrix ref_delta(m_ref, k);
          for (std::size_t r = 0; r < m_ref; ++r) {
            std::vector<double> p_row(k), dp_row(k);
            for (std::size_t c = 0; c < k; ++c) {
              p_row[c] = ref_probs(r, c);
              dp_row[c] = d_attack_in(r, k + c);
            }
            auto dz = softmax_chain(p_row, dp_row);
            for (std::size_t c = 0; c < k; ++c) ref_delta(r, c) = dz[c];
          }
          grads.add_scaled(
              backward_from_preactivation(instance.model, ref_cache, ref_delta),
              1.0);
        }
        optimizer_step(instance.model, cls_state, grads);
      }
    }
    instance.per_epoch_seconds.push_back(seconds_since(start));
  }
  instance.epochs_run = spec.warmup_epochs + spec.epochs;
  finalize_metrics(instance, train, reference, test);
  return instance;
}

double mmd_squared(const Matrix& a, const Matrix& b, double variance) {
  Matrix ga(a.rows(), a.cols());
  Matrix gb(b.rows(), b.cols());
  return mmd_squared_with_grad(a, b, variance, 0.0, ga, gb);
}

double mmd_squared_with_grad(const Matrix& a, const Matrix& b, double variance,
                             double scale, Matrix& grad_a, Matrix& grad_b) {
  if (a.cols() != b.cols()) throw ShapeError("mmd: column mismatch");
  if (a.rows() == 0 || b.rows() == 0) throw ShapeError("mmd: empty batch");
  const std::size_t n = a.rows();
  const std::size_t m = b.rows();
  const std::size_t d = a.cols();
  const double inv_v = 1.0 / variance;

  auto kernel = [&](const double* x, const double* y) {
    double sq = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double diff = x[c] - y[c];
      sq += diff * diff;
    }
    return std::exp(-sq * 0.5 * inv_v);
  };

  double value = 0.0;
  const double naa = 1.0 / static_cast<double>(n * n);
  const double nbb = 1.0 / static_cast<double>(m * m);
  const double nab = 2.0 / static_cast<double>(n * m);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double kij = kernel(a.data() + i * d, a.data() + j * d);
      value += naa * kij;
      if (scale != 0.0 && i != j) {
        const double f = -scale * naa * inv_v * kij;
        for (std::size_t c = 0; c < d; ++c) {
          grad_a(i, c) += 2.0 * f * (a(i, c) - a(j, c));
        }
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double kij = kernel(b.data() + i * d, b.data() + j * d);
      value += nbb * kij;
      if (scale != 0.0 && i != j) {
        const double f = -scale * nbb * inv_v * kij;
        for (std::size_t c = 0; c < d; ++c) {
          grad_b(i, c) += 2.0 * f * (b(i, c) - b(j, c));
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double kij = kernel(a.data() + i * d, b.data() + j * d);
      value -= nab * kij;
      if (scale != 0.0) {
        const double f = scale * nab * inv_v * kij;
        for (std::size_t c = 0; c < d; ++c) {
          const double diff = a(i, c) - b(j, c);
          grad_a(i, c) += f * diff;
          grad_b(j, c) -= f * diff;
        }
      }
    }
  }
  return value;
}

TrainedInstance train_mmd(const LabeledDataset& train,
                          const LabeledDataset& reference,
                          const LabeledDataset& test, const DefenseSpec& spec,
                          std::uint64_t seed) {
  spec.validate();
  if (reference.size() == 0) throw ConfigError("mmd: empty reference data");
  const std::size_t k = train.class_count;

  TrainedInstance instance;
  instance.spec = spec;
  instance.seed = seed;
  instance.model = MlpModel::init(classifier_arch(spec, train),
                                  OutputKind::kSoftmax, derive_seed(seed, 0));
  OptimizerState state =
      OptimizerState::make(OptimizerKind::kAdam, spec.learning_rate, instance.model);

  BatchStream train_stream(train, spec.batch_size, derive_seed(seed, 1));
  BatchStream ref_stream(reference, spec.batch_size, derive_seed(seed, 1) ^ 1);

  for (std::size_t epoch = 0; epoch < spec.warmup_epochs; ++epoch) {
    auto start = Clock::now();
    erm_epoch(instance.model, state, train_stream);
    instance.per_epoch_seconds.push_back(seconds_since(start));
  }

  const std::size_t batches = train_stream.batches_per_epoch();
  for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
    auto start = Clock::now();
    for (std::size_t b = 0; b < batches; ++b) {
      Batch bt = train_stream.next();
      Batch br = ref_stream.next();
      const std::size_t m = bt.labels.size();
      const std::size_t m_ref = br.labels.size();

      ForwardCache train_cache;
      Matrix probs = forward(instance.model, bt.features, &train_cache);
      ForwardCache ref_cache;
      Matrix ref_probs = forward(instance.model, br.features, &ref_cache);

      Matrix delta = probs;
      for (std::size_t r = 0; r < m; ++r) {
        delta(r, bt.labels[r]) -= 1.0;
        for (std::size_t c = 0; c < k; ++c) delta(r, c) /= static_cast<double>(m);
      }

      // Per-class biased MMD^2 between same-label confidence rows; classes
      // absent from the reference batch are skipped.
      std::vector<std::vector<std::size_t>> by_label_train(k), by_label_ref(k);
      for (std::size_t r = 0; r < m; ++r) by_label_train[bt.labels[r]].push_back(r);
      for (std::size_t r = 0; r < m_ref; ++r) by_label_ref[br.labels[r]].push_back(r);

      std::vector<std::size_t> usable;
      for (std::size_t cls = 0; cls < k; ++cls) {
        if (!by_label_train[cls].empty() && !by_label_ref[cls].empty()) {
          usable.push_back(cls);
        }
      }

      Matrix d_probs_train(m, k);
      Matrix d_probs_ref(m_ref, k);
      if (spec.lambda > 0.0 && !usable.empty()) {
        const double per_class_scale =
            spec.lambda / static_cast<double>(usable.size());
        for (std::size_t cls : usable) {
          const auto& rows_a = by_label_train[cls];
          const auto& rows_b = by_label_ref[cls];
          Matrix sub_a(rows_a.size(), k), sub_b(rows_b.size(), k);
          for (std::size_t i = 0; i < rows_a.size(); ++i) {
            for (std::size_t c = 0; c < k; ++c) sub_a(i, c) = probs(rows_a[i], c);
          }
          for (std::size_t i = 0; i < rows_b.size(); ++i) {
            for (std::size_t c = 0; c < k; ++c) sub_b(i, c) = ref_probs(rows_b[i], c);
          }
          Matrix ga(sub_a.rows(), k), gb(sub_b.rows(), k);
          mmd_squared_with_grad(sub_a, sub_b, spec.kernel_variance,
                                per_class_scale, ga, gb);
          for (std::size_t i = 0; i < rows_a.size(); ++i) {
            for (std::size_t c = 0; c < k; ++c) d_probs_train(rows_a[i], c) += ga(i, c);
          }
          for (std::size_t i = 0; i < rows_b.size(); ++i) {
            for (std::size_t c = 0; c < k; ++c) d_probs_ref(rows_b[i], c) += gb(i, c);
          }
        }
        for (std::size_t r = 0; r < m; ++r) {
          std::vector<double> p_row(k), dp_row(k);
          for (std::size_t c = 0; c < k; ++c) {
            p_row[c] = probs(r, c);
            dp_row[c] = d_probs_train(r, c);
          }
          auto dz = softmax_chain(p_row, dp_row);
          for (std::size_t c = 0; c < k; ++c) delta(r, c) += dz[c];
        }
      }

      GradientRecord grads =
          backward_from_preactivation(instance.model, train_cache, delta);
      if (spec.lambda > 0.0 && !usable.empty()) {
        Matrix ref_delta(m_ref, k);
        for (std::size_t r = 0; r < m_ref; ++r) {
          std::vector<double> p_row(k), dp_row(k);
          for (std::size_t c = 0; c < k; ++c) {
            p_row[c] = ref_probs(r, c);
            dp_row[c] = d_probs_ref(r, c);
          }
          auto dz = softmax_chain(p_row, dp_row);
          for (std::size_t c = 0; c < k; ++c) ref_delta(r, c) = dz[c];
        }
        grads.add_scaled(
            backward_from_preactivation(instance.model, ref_cache, ref_delta), 1.0);
      }
      optimizer_step(instance.model, state, grads);
    }
    instance.per_epoch_seconds.push_back(seconds_since(start));
  }
  instance.epochs_run = spec.warmup_epochs + spec.epochs;
  finalize_metrics(instance, train, reference, test);
  return instance;
}

void clip_gradient(GradientRecord& grads, double clip_norm) {
  const double norm = grads.l2_norm();
  const double divisor = std::max(1.0, norm / clip_norm);
  if (divisor > 1.0) grads.scale(1.0 / divisor);
}

TrainedInstance train_dpsgd_werm(const LabeledDataset& train,
                                 const LabeledDataset& reference,
                                 const LabeledDataset& test,
                                 const DefenseSpec& spec, std::uint64_t seed) {
  spec.validate();
  const DpParams& dp = *spec.dp;
  if (spec.w > 0.0 && reference.size() == 0) {
    throw ConfigError("dpsgd_werm: empty reference data with nonzero weight");
  }

  const auto batch_for = [&](std::size_t n) {
    return std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::llround(dp.sampling_ratio * static_cast<double>(n))));
  };
  const std::size_t batch_train = batch_for(train.size());
  const std::size_t batch_ref =
      reference.size() > 0 ? batch_for(reference.size()) : 1;

  TrainedInstance instance;
  instance.spec = spec;
  instance.seed = seed;
  instance.model = MlpModel::init(classifier_arch(spec, train),
                                  OutputKind::kSoftmax, derive_seed(seed, 0));
  OptimizerState state =
      OptimizerState::make(OptimizerKind::kAdam, spec.learning_rate, instance.model);

  const std::uint64_t stream_seed = derive_seed(seed, 1);
  BatchStream train_stream(train, batch_train, stream_seed);
  std::optional<BatchStream> ref_stream;
  if (spec.w > 0.0) ref_stream.emplace(reference, batch_ref, stream_seed);

  const std::size_t steps_per_epoch = train_stream.batches_per_epoch();
  const std::size_t total_steps =
      dp.steps > 0 ? dp.steps : spec.epochs * steps_per_epoch;

  auto noise_engine = make_engine(derive_seed(seed, 4));
  std::normal_distribution<double> noise(0.0, dp.noise_scale * dp.clip_norm);

  auto epoch_start = Clock::now();
  for (std::size_t step = 0; step < total_steps; ++step) {
    GradientRecord total = GradientRecord::zeros_like(instance.model);
    if (spec.w < 1.0) {
      Batch bt = train_stream.next();
      auto grads = per_example_gradients(instance.model, bt.features, bt.labels);
      const double weight =
          (1.0 - spec.w) / static_cast<double>(bt.labels.size());
      for (auto& g : grads) {
        clip_gradient(g, dp.clip_norm);
        total.add_scaled(g, weight);
      }
    }
    if (spec.w > 0.0) {
      Batch br = ref_stream->next();
      auto grads = per_example_gradients(instance.model, br.features, br.labels);
      const double weight = spec.w / static_cast<double>(br.labels.size());
      for (auto& g : grads) {
        clip_gradient(g, dp.clip_norm);
        total.add_scaled(g, weight);
      }
    }
    if (dp.noise_scale > 0.0) {
      for (std::size_t l = 0; l < total.d_weights.size(); ++l) {
        for (std::size_t i = 0; i < total.d_weights[l].size(); ++i) {
          total.d_weights[l].data()[i] += noise(noise_engine);
        }
        for (auto& b : total.d_biases[l]) b += noise(noise_engine);
      }
    }
    optimizer_step(instance.model, state, total);
    if ((step + 1) % steps_per_epoch == 0 || step + 1 == total_steps) {
      instance.per_epoch_seconds.push_back(seconds_since(epoch_start));
      epoch_start = Clock::now();
      ++instance.epochs_run;
    }
  }
  finalize_metrics(instance, train, reference, test);
  return instance;
}

TrainedInstance train_defense(const LabeledDataset& train,
                              const LabeledDataset& reference,
                              const LabeledDataset& test,
                              const DefenseSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case DefenseKind::kErm:
      return train_erm(train, test, spec, seed);
    case DefenseKind::kWerm:
    case DefenseKind::kWermEs:
      return train_werm(train, reference, test, spec, seed);
    case DefenseKind::kAdvReg:
    case DefenseKind::kAdvRegRT:
      return train_advreg(train, reference, test, spec, seed);
    case DefenseKind::kMmd:
      return train_mmd(train, reference, test, spec, seed);
    case DefenseKind::kDpSgdWerm:
      return train_dpsgd_werm(train, reference, test, spec, seed);
  }
  throw ConfigError("unknown defense kind");
}

}  // namespace privbench
