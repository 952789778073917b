#include "coral/logistic.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "coral/error.hpp"

namespace coral {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  double e = std::exp(z);
  return e / (1.0 + e);
}

double clamp_probability(double p) {
  constexpr double kEps = 1e-15;
  return std::min(std::max(p, kEps), 1.0 - kEps);
}

double bernoulli_log_likelihood(const Eigen::MatrixXd& x,
                                const Eigen::VectorXd& y,
                                const Eigen::Vector3d& beta) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double p = clamp_probability(sigmoid(x.row(i).dot(beta)));
    ll += y(i) == 1.0 ? std::log(p) : std::log(1.0 - p);
  }
  return ll;
}

}  // namespace

Prediction predict(const LogisticModel& model, const FeatureVector& features) {
  if (features.bypass) {
    return {std::nullopt, *features.bypass};
  }
  if (!model.method_tag.empty() && !features.method_tag.empty() &&
      model.method_tag != features.method_tag) {
    fail(ErrorCode::InvalidInput,
         "predict: model for '" + model.method_tag +
             "' applied to '" + features.method_tag + "' features");
  }
  if (!std::isfinite(features.x1) || !std::isfinite(features.x2)) {
    fail(ErrorCode::InvalidInput, "predict: non-finite features without bypass");
  }
  double z = model.beta0 + model.beta1 * features.x1 + model.beta2 * features.x2;
  double p = sigmoid(z);
  return {p, p >= model.threshold ? Verdict::Aligned : Verdict::Misaligned};
}

LogisticModel train(const std::vector<LabeledExample>& data,
                    const TrainConfig& config) {
  std::vector<const LabeledExample*> usable;
  usable.reserve(data.size());
  std::size_t aligned_count = 0;
  for (const LabeledExample& ex : data) {
    if (ex.features.bypass) continue;  // gated examples carry no features
    if (!std::isfinite(ex.features.x1) || !std::isfinite(ex.features.x2)) {
      fail(ErrorCode::InvalidInput, "train: non-finite features");
    }
    usable.push_back(&ex);
    if (ex.aligned) ++aligned_count;
  }
  if (usable.size() < 4) {
    fail(ErrorCode::DegenerateTraining, "train: need at least 4 usable examples");
  }
  if (aligned_count == 0 || aligned_count == usable.size()) {
    fail(ErrorCode::DegenerateTraining, "train: both classes must be present");
  }

  const std::size_t n = usable.size();

  // Standardize features internally; coefficients are mapped back at the
  // end. Zero-variance columns are centered only and their coefficient
  // stays at zero (the gradient never moves it).
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto* ex : usable) {
    mean += Eigen::Vector2d(ex->features.x1, ex->features.x2);
  }
  mean /= static_cast<double>(n);
  Eigen::Vector2d var = Eigen::Vector2d::Zero();
  for (const auto* ex : usable) {
    Eigen::Vector2d d =
        Eigen::Vector2d(ex->features.x1, ex->features.x2) - mean;
    var += d.cwiseProduct(d);
  }
  var /= static_cast<double>(n);
  Eigen::Vector2d sigma = var.cwiseSqrt();
  for (int k = 0; k < 2; ++k) {
    if (!(sigma(k) > 1e-12)) sigma(k) = 1.0;
  }

  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = (usable[i]->features.x1 - mean(0)) / sigma(0);
    x(i, 2) = (usable[i]->features.x2 - mean(1)) / sigma(1);
    y(i) = usable[i]->aligned ? 1.0 : 0.0;
  }

  Eigen::Vector3d beta = Eigen::Vector3d::Zero();
  double ll = bernoulli_log_likelihood(x, y, beta);

  for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
    Eigen::Vector3d gradient = Eigen::Vector3d::Zero();
    Eigen::Matrix3d hessian = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      double p = sigmoid(x.row(i).dot(beta));
      gradient += (y(i) - p) * x.row(i).transpose();
      double w = std::max(p * (1.0 - p), 1e-12);
      hessian += w * x.row(i).transpose() * x.row(i);
    }
    if (gradient.lpNorm<Eigen::Infinity>() < config.gradient_tolerance) break;

    hessian += 1e-10 * Eigen::Matrix3d::Identity();
    Eigen::Vector3d step = hessian.ldlt().solve(gradient);
    if (!step.allFinite()) break;

    // Newton with halving so the likelihood never decreases.
    double scale = 1.0;
    Eigen::Vector3d next = beta + step;
    double next_ll = bernoulli_log_likelihood(x, y, next);
    int halvings = 0;
    while (next_ll < ll && halvings < 40) {
      scale *= 0.5;
      next = beta + scale * step;
      next_ll = bernoulli_log_likelihood(x, y, next);
      ++halvings;
    }
    if (next_ll < ll) break;  // no ascent direction left
    beta = next;
    ll = next_ll;
  }

  LogisticModel model;
  model.beta1 = beta(1) / sigma(0);
  model.beta2 = beta(2) / sigma(1);
  model.beta0 = beta(0) - model.beta1 * mean(0) - model.beta2 * mean(1);
  model.threshold = config.threshold;
  model.method_tag = !config.method_tag.empty()
                         ? config.method_tag
                         : usable.front()->features.method_tag;
  double coefficient_norm = std::max(
      beta.norm(),
      Eigen::Vector3d(model.beta0, model.beta1, model.beta2).norm());
  model.separation_warning = coefficient_norm > 1e4;
  return model;
}

double log_likelihood(const LogisticModel& model,
                      const std::vector<LabeledExample>& data) {
  double ll = 0.0;
  for (const LabeledExample& ex : data) {
    if (ex.features.bypass) continue;
    double z = model.beta0 + model.beta1 * ex.features.x1 +
               model.beta2 * ex.features.x2;
    double p = clamp_probability(sigmoid(z));
    ll += ex.aligned ? std::log(p) : std::log(1.0 - p);
  }
  return ll;
}

void save_model(const LogisticModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    fail(ErrorCode::IoError, "save_model: cannot open " + path);
  }
  out << model.method_tag << '\n';
  out << std::setprecision(17);
  out << model.beta0 << '\n'
      << model.beta1 << '\n'
      << model.beta2 << '\n'
      << model.threshold << '\n';
  if (!out) {
    fail(ErrorCode::IoError, "save_model: write failed for " + path);
  }
}

LogisticModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorCode::IoError, "load_model: cannot open " + path);
  }
  LogisticModel model;
  std::string line;
  if (!std::getline(in, line)) {
    fail(ErrorCode::FormatError, "load_model: missing method tag line");
  }
  model.method_tag = line;

  auto read_value = [&](const char* what) {
    if (!std::getline(in, line)) {
      fail(ErrorCode::FormatError,
           std::string("load_model: missing ") + what + " line");
    }
    std::istringstream stream(line);
    double value = 0.0;
    if (!(stream >> value) || !std::isfinite(value)) {
      fail(ErrorCode::FormatError,
           std::string("load_model: bad ") + what + " value '" + line + "'");
    }
    return value;
  };
  model.beta0 = read_value("beta0");
  model.beta1 = read_value("beta1");
  model.beta2 = read_value("beta2");
  model.threshold = read_value("threshold");
  if (!(model.threshold > 0.0) || !(model.threshold < 1.0)) {
    fail(ErrorCode::FormatError, "load_model: threshold must be in (0, 1)");
  }
  return model;
}

}  // namespace coral
