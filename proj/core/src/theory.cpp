#include "privbench/theory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "privbench/errors.hpp"

namespace privbench {

double effective_samples(std::size_t n_train, std::size_t n_reference, double w) {
  if (n_train == 0 || n_reference == 0) {
    throw ConfigError("effective_samples: dataset sizes must be positive");
  }
  const double nt = static_cast<double>(n_train);
  const double nr = static_cast<double>(n_reference);
  const double denom = (1.0 - w) * (1.0 - w) / nt + w * w / nr;
  return 1.0 / denom;
}

PrivacyBudget privacy_budget(std::size_t n_train, std::size_t n_reference,
                             double w, double epsilon_0, double delta,
                             std::size_t steps, double clip_norm,
                             double sampling_ratio) {
  const double nt = static_cast<double>(n_train);
  const double nr = static_cast<double>(n_reference);
  PrivacyBudget budget;
  budget.epsilon_0 = epsilon_0;
  budget.delta = delta;
  budget.epsilon_train = epsilon_0 * (1.0 - w) / nt;
  budget.epsilon_reference = epsilon_0 * w / nr;
  budget.sigma = sampling_ratio * std::sqrt(static_cast<double>(steps)) *
                 std::sqrt(2.0 * std::log(1.25 / delta)) * clip_norm / epsilon_0;
  // Degenerate w in {0,1} leaves the fully protected side unconstrained.
  double upper = std::numeric_limits<double>::infinity();
  if (w < 1.0) upper = std::min(upper, nt / (1.0 - w));
  if (w > 0.0) upper = std::min(upper, nr / w);
  budget.valid = epsilon_0 > 0.0 && epsilon_0 < upper;
  return budget;
}

double relative_privacy_ratio(std::size_t n_train, std::size_t n_reference,
                              double w) {
  if (w < 0.0 || w > 1.0) throw ConfigError("relative_privacy_ratio: w out of range");
  if (w == 0.0) return std::numeric_limits<double>::infinity();
  return (1.0 - w) / w * static_cast<double>(n_reference) /
         static_cast<double>(n_train);
}

double generalization_bound(const BoundInputs& inputs) {
  if (inputs.vc_dim <= 0.0) throw ConfigError("generalization_bound: vc_dim must be positive");
  if (inputs.delta <= 0.0 || inputs.delta >= 1.0) {
    throw ConfigError("generalization_bound: delta must be in (0,1)");
  }
  const double n_eff = effective_samples(inputs.n_train, inputs.n_reference, inputs.w);
  const double n = static_cast<double>(inputs.n_train + inputs.n_reference);
  const double gamma2 = std::max(4.0 / inputs.vc_dim, 1.0);
  const double log_term = gamma2 + std::log(n / inputs.vc_dim);
  if (log_term < 0.0) {
    throw NumericError("generalization_bound: vacuous (gamma2 + log(N/vc) < 0)");
  }
  const double capacity = 2.0 * std::sqrt(inputs.vc_dim / n_eff) * std::sqrt(log_term);
  const double confidence = std::sqrt(2.0 * std::log(2.0 / inputs.delta) / n_eff);
  return capacity + confidence;
}

std::pair<double, double> nominal_epsilon(const PrivacyBudget& budget,
                                          std::size_t steps,
                                          double sampling_ratio) {
  const double factor = sampling_ratio * std::sqrt(static_cast<double>(steps));
  return {budget.epsilon_train * factor, budget.epsilon_reference * factor};
}

TheoryCurve theory_curve(std::size_t n_train, std::size_t n_reference,
                         double epsilon_0, const std::vector<double>& w_grid,
                         double delta, std::size_t steps, double clip_norm,
                         double sampling_ratio, double vc_dim) {
  TheoryCurve curve;
  curve.points.reserve(w_grid.size());
  std::vector<double> grid = w_grid;
  std::sort(grid.begin(), grid.end());
  for (double w : grid) {
    if (w < 0.0 || w > 1.0) throw ConfigError("theory_curve: w grid outside [0,1]");
    TheoryCurvePoint point;
    point.w = w;
    point.n_eff = effective_samples(n_train, n_reference, w);
    PrivacyBudget budget = privacy_budget(n_train, n_reference, w, epsilon_0,
                                          delta, steps, clip_norm, sampling_ratio);
    point.epsilon_train = budget.epsilon_train;
    point.epsilon_reference = budget.epsilon_reference;
    BoundInputs bound{n_train, n_reference, w, vc_dim, delta};
    point.bound_excess = generalization_bound(bound);
    curve.points.push_back(point);
  }
  return curve;
}

double pearson_configurability(const std::vector<double>& theoretical,
                               const std::vector<double>& empirical) {
  if (theoretical.size() != empirical.size()) {
    throw ConfigError("pearson: sequence lengths differ");
  }
  if (theoretical.size() < 3) throw ConfigError("pearson: need at least 3 pairs");
  const double n = static_cast<double>(theoretical.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < theoretical.size(); ++i) {
    mean_x += theoretical[i];
    mean_y += empirical[i];
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < theoretical.size(); ++i) {
    const double dx = theoretical[i] - mean_x;
    const double dy = empirical[i] - mean_y;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw NumericError("pearson: zero variance, correlation undefined");
  }
  return sxy / std::sqrt(sxx * syy);
}

void write_theory_curve_csv(const TheoryCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "w,n_eff,eps_t,eps_r,bound_excess\n";
  out.precision(17);
  for (const auto& p : curve.points) {
    out << p.w << ',' << p.n_eff << ',' << p.epsilon_train << ','
        << p.epsilon_reference << ',' << p.bound_excess << '\n';
  }
}

namespace {

// One polyline per series, each normalized to its own [0,1] range.
void polyline(std::ofstream& out, const std::vector<double>& xs,
              const std::vector<double>& ys, const char* color,
              double width, double height, double margin) {
  const double x_min = xs.front();
  const double x_max = xs.back();
  double y_min = ys.front(), y_max = ys.front();
  for (double y : ys) {
    y_min = std::min(y_min, y);
    y_max = std::max(y_max, y);
  }
  if (y_max == y_min) y_max = y_min + 1.0;
  out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double px = margin + (xs[i] - x_min) / (x_max - x_min) * (width - 2 * margin);
    const double py = height - margin -
                      (ys[i] - y_min) / (y_max - y_min) * (height - 2 * margin);
    out << px << ',' << py << ' ';
  }
  out << "\"/>\n";
}

}  // namespace

void write_theory_curve_svg(const TheoryCurve& curve, const std::string& path) {
  if (curve.points.size() < 2) throw ConfigError("svg: need at least two points");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  const double width = 640, height = 360, margin = 40;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::vector<double> xs, n_eff, eps_t, eps_r;
  for (const auto& p : curve.points) {
    xs.push_back(p.w);
    n_eff.push_back(p.n_eff);
    eps_t.push_back(p.epsilon_train);
    eps_r.push_back(p.epsilon_reference);
  }
  polyline(out, xs, n_eff, "#1f77b4", width, height, margin);
  polyline(out, xs, eps_t, "#d62728", width, height, margin);
  polyline(out, xs, eps_r, "#2ca02c", width, height, margin);
  out << "<text x=\"" << width / 2 << "\" y=\"" << height - 8
      << "\" text-anchor=\"middle\" font-size=\"12\">reference weight w</text>\n";
  out << "<text x=\"" << margin << "\" y=\"16\" font-size=\"12\">"
      << "blue: N_eff, red: eps_T, green: eps_R (each normalized)</text>\n";
  out << "</svg>\n";
}

}  // namespace privbench
