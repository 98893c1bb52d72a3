#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace privbench {

struct PrivacyBudget {
  double epsilon_0 = 0.0;
  double epsilon_train = 0.0;
  double epsilon_reference = 0.0;
  double delta = 0.0;
  double sigma = 0.0;
  bool valid = false;
};

struct BoundInputs {
  std::size_t n_train = 0;
  std::size_t n_reference = 0;
  double w = 0.0;
  double vc_dim = 0.0;
  double delta = 0.05;
};

struct TheoryCurvePoint {
  double w = 0.0;
  double n_eff = 0.0;
  double epsilon_train = 0.0;
  double epsilon_reference = 0.0;
  double bound_excess = 0.0;
};

struct TheoryCurve {
  std::vector<TheoryCurvePoint> points;
};

/// N_eff = [ (1-w)^2 / N_T + w^2 / N_R ]^-1; equals N_T + N_R exactly at
/// w = N_R / (N_T + N_R).
double effective_samples(std::size_t n_train, std::size_t n_reference, double w);

/// Per-step budgets: eps_T = eps0 (1-w)/N_T, eps_R = eps0 w/N_R,
/// sigma = alpha sqrt(K) sqrt(2 log(1.25/delta)) C / eps0. The valid flag
/// reflects 0 < eps0 < min(N_T/(1-w), N_R/w) with the w in {0,1} sides
/// unconstrained.
PrivacyBudget privacy_budget(std::size_t n_train, std::size_t n_reference,
                             double w, double epsilon_0, double delta,
                             std::size_t steps, double clip_norm,
                             double sampling_ratio);

/// eps_T / eps_R = ((1-w)/w) * (N_R/N_T); independent of eps0. Returns
/// +infinity at w = 0 (reference side fully protected).
double relative_privacy_ratio(std::size_t n_train, std::size_t n_reference,
                              double w);

/// Excess-risk terms of the weighted generalization bound:
/// 2 sqrt(vc/N_eff) sqrt(gamma2 + log(N/vc)) + sqrt(2 ln(2/delta) / N_eff)
/// with gamma2 = max(4/vc, 1).
double generalization_bound(const BoundInputs& inputs);

/// Nominal whole-run budgets eps * alpha * sqrt(K) with unit leading
/// constant (the O(.) constant is not computed).
std::pair<double, double> nominal_epsilon(const PrivacyBudget& budget,
                                          std::size_t steps,
                                          double sampling_ratio);

TheoryCurve theory_curve(std::size_t n_train, std::size_t n_reference,
                         double epsilon_0, const std::vector<double>& w_grid,
                         double delta, std::size_t steps, double clip_norm,
                         double sampling_ratio, double vc_dim);

/// Pearson r between theoretical and empirical relative-privacy sequences.
double pearson_configurability(const std::vector<double>& theoretical,
                               const std::vector<double>& empirical);

void write_theory_curve_csv(const TheoryCurve& curve, const std::string& path);
void write_theory_curve_svg(const TheoryCurve& curve, const std::string& path);

}  // namespace privbench
