#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coral/entropy.hpp"
#include "coral/logistic.hpp"
#include "coral/ndt.hpp"
#include "coral/synth.hpp"

namespace coral {

/// Perturbation applied to cloud_b to fabricate misaligned pairs: a
/// rotation of magnitude e_theta (random sign) about the vertical axis
/// through the sensor origin, composed with a planar translation of
/// magnitude e_d in a uniformly random direction.
struct ErrorSpec {
  double e_d = 0.1;          // m
  double e_theta = 0.0099483767363676778;  // rad (0.57 deg)
  std::uint64_t seed = 0;

  void validate() const;  // throws Error(InvalidParameter)
};

/// Returns the pair with cloud_b perturbed; cloud_a untouched. The random
/// stream is derived from (seed, sequence_id, pair_index) so every pair
/// gets an independent, reproducible draw.
ScanPair induce_error(const ScanPair& pair, const ErrorSpec& spec);

enum class Method { Coral, CoralMedian, Mme, Ndt, RelNdt };
std::string method_name(Method method);
Method parse_method(const std::string& name);

struct MethodParams {
  EntropyParams entropy;
  NdtParams ndt;
};

/// Features of one (possibly perturbed) pair under the chosen measure,
/// tagged with the method name. Overlap gates set the bypass verdict.
FeatureVector compute_features(Method method, const PointCloud& a,
                               const PointCloud& b,
                               const MethodParams& params);

struct DatasetInstance {
  std::size_t pair_index = 0;  // into the source pair list
  bool aligned = false;        // unperturbed twin or induced-error twin
};

/// One aligned plus one misaligned instance per pair (exact 50/50 split),
/// shuffled deterministically with spec.seed.
std::vector<DatasetInstance> build_dataset(std::size_t pair_count,
                                           const ErrorSpec& spec);

struct FeatureDataset {
  std::vector<LabeledExample> examples;
  std::vector<std::size_t> pair_ids;  // parallel to examples
};

/// build_dataset + per-instance feature extraction.
FeatureDataset extract_dataset_features(const std::vector<ScanPair>& pairs,
                                        const ErrorSpec& spec, Method method,
                                        const MethodParams& params);

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;  // aligned is the positive class
  std::size_t total() const { return tp + fp + tn + fn; }
  double accuracy() const {
    return total() == 0 ? 0.0
                        : static_cast<double>(tp + tn) / static_cast<double>(total());
  }
  Confusion& operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
};

enum class Protocol { Separate5Fold, JointTrain, Generalization };
std::string protocol_name(Protocol protocol);
Protocol parse_protocol(const std::string& name);

enum class Environment { Structured, Semi, Unstructured };
std::string environment_name(Environment environment);
Environment parse_environment(const std::string& name);

struct SequenceResult {
  std::string sequence_id;
  std::string environment;
  Confusion counts;
};

struct EvaluationReport {
  Protocol protocol = Protocol::Separate5Fold;
  Method method = Method::Coral;
  std::vector<SequenceResult> per_sequence;
  Confusion overall;
  std::vector<std::string> warnings;
  std::string parameter_record;
};

/// Cross validation with pair-level stratification: the aligned and
/// misaligned twins of a pair always land in the same fold. Folds whose
/// training split collapses to one class are skipped with a warning.
/// Throws Error(InvalidParameter) when k < 2 or the dataset is smaller
/// than k.
EvaluationReport k_fold_evaluate(const FeatureDataset& dataset, std::size_t k,
                                 const TrainConfig& train_config,
                                 std::uint64_t fold_seed);

struct SequenceData {
  std::string id;
  Environment environment = Environment::Structured;
  double alpha = 0.0;  // rad; per-sequence sensor resolution, 0 = unset
  std::vector<ScanPair> pairs;
};

struct ProtocolConfig {
  std::size_t folds = 5;
  ErrorSpec error;
  TrainConfig train;
};

/// The three training protocols:
///   Separate5Fold:  k-fold cross validation within each sequence.
///   JointTrain:     one model trained on every sequence, evaluated per
///                   sequence.
///   Generalization: train on structured, evaluate on the rest, and vice
///                   versa (requires both groups).
/// A sequence's alpha, when set, overrides params.entropy.alpha.
EvaluationReport protocol_run(Protocol protocol,
                              const std::vector<SequenceData>& sequences,
                              Method method, const MethodParams& params,
                              const ProtocolConfig& config);

/// Evaluation of every instance with a fixed pre-trained model.
EvaluationReport fixed_model_evaluate(const LogisticModel& model,
                                      const std::vector<SequenceData>& sequences,
                                      Method method, const MethodParams& params,
                                      const ProtocolConfig& config);

struct SensitivityResult {
  double q_aligned = 0.0;
  double q_misaligned = 0.0;
  double ratio = 0.0;
};

/// Q(perturbed) / Q(unperturbed); the parameter-tuning objective.
/// Throws Error(InsufficientData) unless both measurements succeed and
/// Error(UndefinedRatio) when the aligned quality is exactly zero.
SensitivityResult sensitivity_ratio(const ScanPair& pair, const ErrorSpec& spec,
                                    const EntropyParams& params);

struct SweepSpec {
  double range_xy = 0.4;        // +/- m on each translation axis
  std::size_t steps_xy = 9;     // grid resolution per translation axis
  double range_theta = 0.0;     // +/- rad about the vertical axis
  std::size_t steps_theta = 1;
};

struct SweepSample {
  double dx = 0.0, dy = 0.0, dtheta = 0.0;
  double q = 0.0;
};

/// Quality surface around the ground-truth pose: cloud_b is offset by every
/// grid displacement and measured against cloud_a.
std::vector<SweepSample> quality_sweep(const ScanPair& pair,
                                       const SweepSpec& spec,
                                       const EntropyParams& params);

void write_report_csv(const EvaluationReport& report, const std::string& path);
void write_report_json(const EvaluationReport& report, const std::string& path);
void write_sweep_csv(const std::vector<SweepSample>& samples,
                     const std::string& path);

}  // namespace coral
