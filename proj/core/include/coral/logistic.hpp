#pragma once

#include <optional>
#include <string>
#include <vector>

namespace coral {

enum class Verdict { Aligned, Misaligned };

struct FeatureVector {
  double x1 = 0.0;
  double x2 = 0.0;
  /// Forced verdict that skips the model entirely; set by feature
  /// extraction when an overlap gate fired.
  std::optional<Verdict> bypass;
  /// Which measure produced (x1, x2). Models refuse features from a
  /// different measure.
  std::string method_tag;
};

struct LogisticModel {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double threshold = 0.5;  // class-probability cut, aligned iff p >= threshold
  std::string method_tag;
  /// Set when training ended with an extreme coefficient norm, the usual
  /// sign of perfectly separable data.
  bool separation_warning = false;
};

struct LabeledExample {
  FeatureVector features;
  bool aligned = false;
};

struct Prediction {
  std::optional<double> probability;  // absent when a bypass fired
  Verdict verdict = Verdict::Misaligned;
};

/// p = 1 / (1 + exp(-(b0 + b1 x1 + b2 x2))), aligned iff p >= threshold.
/// A bypass overrides the model and leaves the probability unset.
/// Throws Error(InvalidInput) on non-finite features without bypass or on a
/// method_tag mismatch (when both tags are non-empty).
Prediction predict(const LogisticModel& model, const FeatureVector& features);

struct TrainConfig {
  std::size_t max_iterations = 500;
  double gradient_tolerance = 1e-8;  // infinity norm of the log-likelihood gradient
  double threshold = 0.5;
  std::string method_tag;
};

/// Maximum-likelihood fit by damped Newton iterations on internally
/// standardized features; returned coefficients are de-standardized.
/// Bypass examples are excluded. Throws Error(DegenerateTraining) when one
/// class is missing or fewer than four usable examples remain.
LogisticModel train(const std::vector<LabeledExample>& data,
                    const TrainConfig& config = {});

/// Bernoulli log-likelihood of data under model (bypass examples skipped).
double log_likelihood(const LogisticModel& model,
                      const std::vector<LabeledExample>& data);

/// Five lines: method_tag, beta0, beta1, beta2, threshold, full precision.
void save_model(const LogisticModel& model, const std::string& path);
LogisticModel load_model(const std::string& path);

}  // namespace coral
