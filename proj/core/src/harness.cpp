#include "coral/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Geometry>

#include "coral/error.hpp"
#include "coral/mme.hpp"
#include "detail/rng.hpp"

#include <json.hpp>

namespace coral {

void ErrorSpec::validate() const {
  if (!(e_d >= 0.0) || !(e_theta >= 0.0)) {
    fail(ErrorCode::InvalidParameter, "error spec: e_d and e_theta must be >= 0");
  }
}

ScanPair induce_error(const ScanPair& pair, const ErrorSpec& spec) {
  spec.validate();
  if (spec.e_d == 0.0 && spec.e_theta == 0.0) return pair;

  std::mt19937_64 rng(
      detail::derive_stream(spec.seed, pair.sequence_id, pair.pair_index));
  std::uniform_int_distribution<int> sign_draw(0, 1);
  std::uniform_real_distribution<double> angle_draw(0.0,
                                                    2.0 * std::numbers::pi);
  const double sign = sign_draw(rng) == 0 ? 1.0 : -1.0;
  const double phi = angle_draw(rng);

  Eigen::Matrix3d rotation =
      Eigen::AngleAxisd(sign * spec.e_theta, Eigen::Vector3d::UnitZ())
          .toRotationMatrix();
  const Point3& pivot = pair.cloud_b.sensor_origin;
  Point3 offset(spec.e_d * std::cos(phi), spec.e_d * std::sin(phi), 0.0);

  RigidTransform t;
  t.rotation = rotation;
  t.translation = pivot - rotation * pivot + offset;

  ScanPair out = pair;
  out.cloud_b = apply_transform(pair.cloud_b, t);
  return out;
}

std::string method_name(Method method) {
  switch (method) {
    case Method::Coral: return "coral";
    case Method::CoralMedian: return "coral-median";
    case Method::Mme: return "mme";
    case Method::Ndt: return "ndt";
    case Method::RelNdt: return "relndt";
  }
  return "coral";
}

Method parse_method(const std::string& name) {
  if (name == "coral") return Method::Coral;
  if (name == "coral-median") return Method::CoralMedian;
  if (name == "mme") return Method::Mme;
  if (name == "ndt") return Method::Ndt;
  if (name == "relndt") return Method::RelNdt;
  fail(ErrorCode::InvalidParameter, "unknown method '" + name + "'");
}

std::string protocol_name(Protocol protocol) {
  switch (protocol) {
    case Protocol::Separate5Fold: return "separate";
    case Protocol::JointTrain: return "joint";
    case Protocol::Generalization: return "generalization";
  }
  return "separate";
}

Protocol parse_protocol(const std::string& name) {
  if (name == "separate") return Protocol::Separate5Fold;
  if (name == "joint") return Protocol::JointTrain;
  if (name == "generalization") return Protocol::Generalization;
  fail(ErrorCode::InvalidParameter, "unknown protocol '" + name + "'");
}

std::string environment_name(Environment environment) {
  switch (environment) {
    case Environment::Structured: return "structured";
    case Environment::Semi: return "semi";
    case Environment::Unstructured: return "unstructured";
  }
  return "structured";
}

Environment parse_environment(const std::string& name) {
  if (name == "structured") return Environment::Structured;
  if (name == "semi" || name == "semi-structured") return Environment::Semi;
  if (name == "unstructured") return Environment::Unstructured;
  fail(ErrorCode::InvalidParameter, "unknown environment '" + name + "'");
}

FeatureVector compute_features(Method method, const PointCloud& a,
                               const PointCloud& b,
                               const MethodParams& params) {
  FeatureVector features;
  features.method_tag = method_name(method);

  switch (method) {
    case Method::Coral:
    case Method::CoralMedian: {
      EntropyParams entropy = params.entropy;
      entropy.aggregation = method == Method::CoralMedian ? Aggregation::Median
                                                          : Aggregation::Mean;
      try {
        QualityResult result = coral_quality(a, b, entropy);
        if (result.status != MeasureStatus::Measured) {
          features.bypass = Verdict::Misaligned;
        } else {
          auto [x1, x2] = extract_features(result);
          features.x1 = x1;
          features.x2 = x2;
        }
      } catch (const Error& e) {
        // No usable evidence of alignment is treated like no overlap.
        if (e.code() != ErrorCode::InsufficientData) throw;
        features.bypass = Verdict::Misaligned;
      }
      break;
    }
    case Method::Mme: {
      try {
        features.x1 = mme(join(a, b), params.entropy.r_min,
                          params.entropy.min_neighbors);
        features.x2 = 0.0;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::InsufficientData) throw;
        features.bypass = Verdict::Misaligned;
      }
      break;
    }
    case Method::Ndt:
    case Method::RelNdt: {
      NdtGrid grid = build_ndt(a, params.ndt);
      if (grid.empty()) {
        features.bypass = Verdict::Misaligned;
        break;
      }
      if (method == Method::Ndt) {
        NdtScore score = ndt_score(grid, b);
        if (score.no_overlap) {
          features.bypass = Verdict::Misaligned;
        } else {
          features.x1 = score.score;
          features.x2 = 0.0;
        }
      } else {
        RelNdtFeatures rel = relndt_features(grid, b, params.entropy.epsilon);
        if (rel.no_overlap) {
          features.bypass = Verdict::Misaligned;
        } else {
          features.x1 = rel.x1;
          features.x2 = rel.x2;
        }
      }
      break;
    }
  }
  return features;
}

std::vector<DatasetInstance> build_dataset(std::size_t pair_count,
                                           const ErrorSpec& spec) {
  spec.validate();
  if (pair_count == 0) {
    fail(ErrorCode::InvalidInput, "build_dataset: need at least one pair");
  }
  std::vector<DatasetInstance> instances;
  instances.reserve(2 * pair_count);
  for (std::size_t i = 0; i < pair_count; ++i) {
    instances.push_back({i, true});
    instances.push_back({i, false});
  }
  std::mt19937_64 rng(detail::derive_stream(spec.seed, "dataset-shuffle", 0));
  std::shuffle(instances.begin(), instances.end(), rng);
  return instances;
}

FeatureDataset extract_dataset_features(const std::vector<ScanPair>& pairs,
                                        const ErrorSpec& spec, Method method,
                                        const MethodParams& params) {
  FeatureDataset dataset;
  std::vector<DatasetInstance> instances = build_dataset(pairs.size(), spec);
  dataset.examples.reserve(instances.size());
  dataset.pair_ids.reserve(instances.size());
  for (const DatasetInstance& instance : instances) {
    const ScanPair& pair = pairs[instance.pair_index];
    FeatureVector features;
    if (instance.aligned) {
      features = compute_features(method, pair.cloud_a, pair.cloud_b, params);
    } else {
      ScanPair perturbed = induce_error(pair, spec);
      features = compute_features(method, perturbed.cloud_a,
                                  perturbed.cloud_b, params);
    }
    dataset.examples.push_back({features, instance.aligned});
    dataset.pair_ids.push_back(instance.pair_index);
  }
  return dataset;
}

namespace {

void tally(Confusion& counts, bool truth_aligned, Verdict verdict) {
  if (truth_aligned) {
    if (verdict == Verdict::Aligned) ++counts.tp;
    else ++counts.fn;
  } else {
    if (verdict == Verdict::Aligned) ++counts.fp;
    else ++counts.tn;
  }
}

bool has_both_classes(const std::vector<LabeledExample>& examples) {
  bool aligned = false, misaligned = false;
  for (const LabeledExample& ex : examples) {
    if (ex.features.bypass) continue;
    (ex.aligned ? aligned : misaligned) = true;
  }
  return aligned && misaligned;
}

}  // namespace

EvaluationReport k_fold_evaluate(const FeatureDataset& dataset, std::size_t k,
                                 const TrainConfig& train_config,
                                 std::uint64_t fold_seed) {
  if (k < 2) {
    fail(ErrorCode::InvalidParameter, "k_fold_evaluate: need k >= 2");
  }
  if (dataset.examples.size() < k) {
    fail(ErrorCode::InvalidParameter,
         "k_fold_evaluate: dataset smaller than fold count");
  }

  // Assign whole pairs to folds so a pair's aligned and misaligned twins
  // are never split across the train/test boundary.
  std::vector<std::size_t> unique_pairs;
  for (std::size_t id : dataset.pair_ids) {
    if (std::find(unique_pairs.begin(), unique_pairs.end(), id) ==
        unique_pairs.end()) {
      unique_pairs.push_back(id);
    }
  }
  std::sort(unique_pairs.begin(), unique_pairs.end());
  std::mt19937_64 rng(detail::derive_stream(fold_seed, "folds", 0));
  std::shuffle(unique_pairs.begin(), unique_pairs.end(), rng);

  auto fold_for = [&](std::size_t pair_id) {
    auto it = std::find(unique_pairs.begin(), unique_pairs.end(), pair_id);
    return static_cast<std::size_t>(it - unique_pairs.begin()) % k;
  };

  EvaluationReport report;
  report.protocol = Protocol::Separate5Fold;
  for (std::size_t fold = 0; fold < k; ++fold) {
    std::vector<LabeledExample> train_set;
    std::vector<const LabeledExample*> test_set;
    for (std::size_t i = 0; i < dataset.examples.size(); ++i) {
      if (fold_for(dataset.pair_ids[i]) == fold) {
        test_set.push_back(&dataset.examples[i]);
      } else {
        train_set.push_back(dataset.examples[i]);
      }
    }
    if (test_set.empty()) continue;
    if (!has_both_classes(train_set)) {
      report.warnings.push_back("fold " + std::to_string(fold) +
                                " skipped: single-class training data");
      continue;
    }
    LogisticModel model = train(train_set, train_config);
    for (const LabeledExample* ex : test_set) {
      tally(report.overall, ex->aligned, predict(model, ex->features).verdict);
    }
  }
  return report;
}

namespace {

MethodParams sequence_params(const SequenceData& sequence,
                             const MethodParams& base) {
  MethodParams params = base;
  if (sequence.alpha > 0.0) params.entropy.alpha = sequence.alpha;
  return params;
}

Confusion evaluate_examples(const LogisticModel& model,
                            const std::vector<LabeledExample>& examples) {
  Confusion counts;
  for (const LabeledExample& ex : examples) {
    tally(counts, ex.aligned, predict(model, ex.features).verdict);
  }
  return counts;
}

}  // namespace

EvaluationReport protocol_run(Protocol protocol,
                              const std::vector<SequenceData>& sequences,
                              Method method, const MethodParams& params,
                              const ProtocolConfig& config) {
  if (sequences.empty()) {
    fail(ErrorCode::InvalidInput, "protocol_run: no sequences");
  }

  EvaluationReport report;
  report.protocol = protocol;
  report.method = method;

  TrainConfig train_config = config.train;
  train_config.method_tag = method_name(method);

  // Feature extraction is shared by all protocols.
  std::vector<FeatureDataset> features;
  features.reserve(sequences.size());
  for (const SequenceData& sequence : sequences) {
    if (sequence.pairs.empty()) {
      fail(ErrorCode::InvalidInput,
           "protocol_run: sequence '" + sequence.id + "' has no pairs");
    }
    features.push_back(extract_dataset_features(
        sequence.pairs, config.error, method, sequence_params(sequence, params)));
  }

  switch (protocol) {
    case Protocol::Separate5Fold: {
      for (std::size_t s = 0; s < sequences.size(); ++s) {
        EvaluationReport fold_report = k_fold_evaluate(
            features[s], config.folds, train_config, config.error.seed);
        for (const std::string& w : fold_report.warnings) {
          report.warnings.push_back(sequences[s].id + ": " + w);
        }
        report.per_sequence.push_back(
            {sequences[s].id, environment_name(sequences[s].environment),
             fold_report.overall});
        report.overall += fold_report.overall;
      }
      break;
    }
    case Protocol::JointTrain: {
      std::vector<LabeledExample> all;
      for (const FeatureDataset& fd : features) {
        all.insert(all.end(), fd.examples.begin(), fd.examples.end());
      }
      LogisticModel model = train(all, train_config);
      for (std::size_t s = 0; s < sequences.size(); ++s) {
        Confusion counts = evaluate_examples(model, features[s].examples);
        report.per_sequence.push_back(
            {sequences[s].id, environment_name(sequences[s].environment),
             counts});
        report.overall += counts;
      }
      break;
    }
    case Protocol::Generalization: {
      std::vector<std::size_t> structured, other;
      for (std::size_t s = 0; s < sequences.size(); ++s) {
        (sequences[s].environment == Environment::Structured ? structured
                                                             : other)
            .push_back(s);
      }
      if (structured.empty() || other.empty()) {
        fail(ErrorCode::InvalidInput,
             "generalization protocol requires both structured and "
             "semi/unstructured sequences");
      }
      auto run_direction = [&](const std::vector<std::size_t>& train_group,
                               const std::vector<std::size_t>& eval_group) {
        std::vector<LabeledExample> train_examples;
        for (std::size_t s : train_group) {
          train_examples.insert(train_examples.end(),
                                features[s].examples.begin(),
                                features[s].examples.end());
        }
        LogisticModel model = train(train_examples, train_config);
        for (std::size_t s : eval_group) {
          Confusion counts = evaluate_examples(model, features[s].examples);
          report.per_sequence.push_back(
              {sequences[s].id, environment_name(sequences[s].environment),
               counts});
          report.overall += counts;
        }
      };
      run_direction(structured, other);
      run_direction(other, structured);
      break;
    }
  }
  return report;
}

EvaluationReport fixed_model_evaluate(const LogisticModel& model,
                                      const std::vector<SequenceData>& sequences,
                                      Method method, const MethodParams& params,
                                      const ProtocolConfig& config) {
  if (sequences.empty()) {
    fail(ErrorCode::InvalidInput, "fixed_model_evaluate: no sequences");
  }
  EvaluationReport report;
  report.protocol = Protocol::JointTrain;
  report.method = method;
  for (const SequenceData& sequence : sequences) {
    FeatureDataset fd = extract_dataset_features(
        sequence.pairs, config.error, method, sequence_params(sequence, params));
    Confusion counts = evaluate_examples(model, fd.examples);
    report.per_sequence.push_back(
        {sequence.id, environment_name(sequence.environment), counts});
    report.overall += counts;
  }
  return report;
}

SensitivityResult sensitivity_ratio(const ScanPair& pair, const ErrorSpec& spec,
                                    const EntropyParams& params) {
  QualityResult aligned = coral_quality(pair.cloud_a, pair.cloud_b, params);
  ScanPair perturbed = induce_error(pair, spec);
  QualityResult misaligned =
      coral_quality(perturbed.cloud_a, perturbed.cloud_b, params);
  if (aligned.status != MeasureStatus::Measured ||
      misaligned.status != MeasureStatus::Measured) {
    fail(ErrorCode::InsufficientData,
         "sensitivity_ratio: both measurements must succeed");
  }
  if (aligned.q == 0.0) {
    std::ostringstream msg;
    msg << "sensitivity_ratio undefined: aligned quality is zero "
        << "(aligned " << aligned.q << ", misaligned " << misaligned.q << ")";
    fail(ErrorCode::UndefinedRatio, msg.str());
  }
  return {aligned.q, misaligned.q, misaligned.q / aligned.q};
}

std::vector<SweepSample> quality_sweep(const ScanPair& pair,
                                       const SweepSpec& spec,
                                       const EntropyParams& params) {
  auto axis_values = [](double range, std::size_t steps) {
    std::vector<double> values;
    if (steps <= 1 || range == 0.0) {
      values.push_back(0.0);
      return values;
    }
    for (std::size_t i = 0; i < steps; ++i) {
      values.push_back(-range +
                       2.0 * range * static_cast<double>(i) /
                           static_cast<double>(steps - 1));
    }
    return values;
  };

  const std::vector<double> xs = axis_values(spec.range_xy, spec.steps_xy);
  const std::vector<double> thetas =
      axis_values(spec.range_theta, spec.steps_theta);
  const Point3& pivot = pair.cloud_b.sensor_origin;

  std::vector<SweepSample> samples;
  samples.reserve(xs.size() * xs.size() * thetas.size());
  for (double dx : xs) {
    for (double dy : xs) {
      for (double dtheta : thetas) {
        Eigen::Matrix3d rotation =
            Eigen::AngleAxisd(dtheta, Eigen::Vector3d::UnitZ())
                .toRotationMatrix();
        RigidTransform t;
        t.rotation = rotation;
        t.translation = pivot - rotation * pivot + Point3(dx, dy, 0.0);
        PointCloud offset_b = apply_transform(pair.cloud_b, t);
        QualityResult result = coral_quality(pair.cloud_a, offset_b, params);
        double q = result.status == MeasureStatus::Measured
                       ? result.q
                       : std::numeric_limits<double>::quiet_NaN();
        samples.push_back({dx, dy, dtheta, q});
      }
    }
  }
  return samples;
}

namespace {

std::string format_fixed(double value, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, value);
  return buffer;
}

nlohmann::ordered_json confusion_json(const Confusion& c) {
  return {{"tp", c.tp},
          {"fp", c.fp},
          {"tn", c.tn},
          {"fn", c.fn},
          {"accuracy", c.accuracy()}};
}

}  // namespace

void write_report_csv(const EvaluationReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path);
  out << "sequence,environment,instances,tp,fp,tn,fn,accuracy\n";
  for (const SequenceResult& row : report.per_sequence) {
    out << row.sequence_id << ',' << row.environment << ','
        << row.counts.total() << ',' << row.counts.tp << ',' << row.counts.fp
        << ',' << row.counts.tn << ',' << row.counts.fn << ','
        << format_fixed(row.counts.accuracy(), 6) << '\n';
  }
  out << "overall,," << report.overall.total() << ',' << report.overall.tp
      << ',' << report.overall.fp << ',' << report.overall.tn << ','
      << report.overall.fn << ','
      << format_fixed(report.overall.accuracy(), 6) << '\n';
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

void write_report_json(const EvaluationReport& report, const std::string& path) {
  nlohmann::ordered_json doc;
  doc["protocol"] = protocol_name(report.protocol);
  doc["method"] = method_name(report.method);
  doc["parameters"] = report.parameter_record;
  doc["overall"] = confusion_json(report.overall);
  doc["sequences"] = nlohmann::ordered_json::array();
  for (const SequenceResult& row : report.per_sequence) {
    nlohmann::ordered_json entry;
    entry["id"] = row.sequence_id;
    entry["environment"] = row.environment;
    entry["counts"] = confusion_json(row.counts);
    doc["sequences"].push_back(entry);
  }
  doc["warnings"] = report.warnings;

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path);
  out << doc.dump(2) << '\n';
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

void write_sweep_csv(const std::vector<SweepSample>& samples,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path);
  out << "dx,dy,dtheta,Q\n";
  for (const SweepSample& s : samples) {
    out << format_fixed(s.dx, 6) << ',' << format_fixed(s.dy, 6) << ','
        << format_fixed(s.dtheta, 6) << ',' << format_fixed(s.q, 9) << '\n';
  }
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace coral
