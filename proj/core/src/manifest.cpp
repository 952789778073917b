#include "coral/manifest.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "coral/error.hpp"
#include "coral/io.hpp"

namespace coral {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr double kDegToRad = 0.017453292519943295;

std::string resolve(const std::string& base_dir, const std::string& file) {
  fs::path p(file);
  if (p.is_absolute()) return file;
  return (fs::path(base_dir) / p).string();
}

Pairing parse_pairing(const std::string& name) {
  if (name == "consecutive") return Pairing::Consecutive;
  if (name == "disjoint") return Pairing::Disjoint;
  fail(ErrorCode::FormatError, "manifest: unknown pairing '" + name + "'");
}

std::string pairing_name(Pairing pairing) {
  return pairing == Pairing::Consecutive ? "consecutive" : "disjoint";
}

}  // namespace

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open manifest " + path);

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::FormatError, "manifest " + path + ": " + e.what());
  }

  DatasetManifest manifest;
  manifest.base_dir = fs::path(path).parent_path().string();
  if (manifest.base_dir.empty()) manifest.base_dir = ".";

  if (!doc.is_object() || !doc.contains("sequences") ||
      !doc["sequences"].is_array()) {
    fail(ErrorCode::FormatError,
         "manifest " + path + ": expected an object with a 'sequences' array");
  }

  for (const auto& item : doc["sequences"]) {
    SequenceEntry entry;
    try {
      entry.id = item.at("id").get<std::string>();
      entry.environment =
          parse_environment(item.at("environment").get<std::string>());
      entry.scan_files = item.at("scans").get<std::vector<std::string>>();
      if (item.contains("poses")) {
        entry.pose_file = item["poses"].get<std::string>();
      }
      if (item.contains("alpha_deg")) {
        entry.alpha = item["alpha_deg"].get<double>() * kDegToRad;
      }
      if (item.contains("pairing")) {
        entry.pairing = parse_pairing(item["pairing"].get<std::string>());
      }
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::FormatError,
           "manifest " + path + ": sequence entry: " + e.what());
    }
    if (entry.scan_files.empty()) {
      fail(ErrorCode::FormatError,
           "manifest " + path + ": sequence '" + entry.id + "' has no scans");
    }
    for (const std::string& scan : entry.scan_files) {
      std::string full = resolve(manifest.base_dir, scan);
      if (!fs::exists(full)) {
        fail(ErrorCode::FormatError,
             "manifest " + path + ": missing scan file " + full);
      }
    }
    if (!entry.pose_file.empty() &&
        !fs::exists(resolve(manifest.base_dir, entry.pose_file))) {
      fail(ErrorCode::FormatError,
           "manifest " + path + ": missing pose file " +
               resolve(manifest.base_dir, entry.pose_file));
    }
    manifest.sequences.push_back(std::move(entry));
  }
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const std::string& path) {
  ordered_json doc;
  doc["sequences"] = ordered_json::array();
  for (const SequenceEntry& entry : manifest.sequences) {
    ordered_json item;
    item["id"] = entry.id;
    item["environment"] = environment_name(entry.environment);
    item["scans"] = entry.scan_files;
    if (!entry.pose_file.empty()) item["poses"] = entry.pose_file;
    if (entry.alpha > 0.0) item["alpha_deg"] = entry.alpha / kDegToRad;
    item["pairing"] = pairing_name(entry.pairing);
    doc["sequences"].push_back(item);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path);
  out << doc.dump(2) << '\n';
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

std::vector<SequenceData> load_sequences(const DatasetManifest& manifest,
                                         const SequenceLoadOptions& options) {
  std::vector<SequenceData> sequences;
  sequences.reserve(manifest.sequences.size());

  for (const SequenceEntry& entry : manifest.sequences) {
    std::vector<RigidTransform> poses;
    if (!entry.pose_file.empty()) {
      poses = load_poses(resolve(manifest.base_dir, entry.pose_file));
      if (poses.size() != entry.scan_files.size()) {
        fail(ErrorCode::FormatError,
             "sequence '" + entry.id + "': " + std::to_string(poses.size()) +
                 " poses for " + std::to_string(entry.scan_files.size()) +
                 " scans");
      }
    } else {
      poses.assign(entry.scan_files.size(), RigidTransform::identity());
    }

    std::vector<PointCloud> clouds;
    clouds.reserve(entry.scan_files.size());
    for (std::size_t k = 0; k < entry.scan_files.size(); ++k) {
      std::string full = resolve(manifest.base_dir, entry.scan_files[k]);
      PointCloud cloud = load_cloud(full, cloud_format_from_path(full));
      if (cloud.empty()) {
        fail(ErrorCode::FormatError,
             "sequence '" + entry.id + "': scan " + full + " has no points");
      }
      cloud = apply_transform(cloud, poses[k]);
      if (options.downsample_cell > 0.0) {
        cloud = voxel_downsample(cloud, options.downsample_cell);
      }
      clouds.push_back(std::move(cloud));
    }

    SequenceData data;
    data.id = entry.id;
    data.environment = entry.environment;
    data.alpha = entry.alpha;
    auto add_pair = [&](std::size_t i, std::size_t j, std::size_t index) {
      ScanPair pair;
      pair.cloud_a = clouds[i];
      pair.cloud_b = clouds[j];
      std::fill(pair.cloud_a.labels.begin(), pair.cloud_a.labels.end(),
                SourceLabel::A);
      std::fill(pair.cloud_b.labels.begin(), pair.cloud_b.labels.end(),
                SourceLabel::B);
      pair.sequence_id = entry.id;
      pair.pair_index = index;
      data.pairs.push_back(std::move(pair));
    };
    if (entry.pairing == Pairing::Consecutive) {
      for (std::size_t k = 0; k + 1 < clouds.size(); ++k) {
        add_pair(k, k + 1, k);
      }
    } else {
      for (std::size_t k = 0; k + 1 < clouds.size(); k += 2) {
        add_pair(k, k + 1, k / 2);
      }
    }
    sequences.push_back(std::move(data));
  }
  return sequences;
}

}  // namespace coral
