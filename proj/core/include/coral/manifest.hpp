#pragma once

#include <string>
#include <vector>

#include "coral/harness.hpp"

namespace coral {

/// How a sequence's scan list turns into evaluation pairs.
///   Consecutive: (0,1), (1,2), ... — registered scans along a trajectory.
///   Disjoint:    (0,1), (2,3), ... — independent rescans of one scene.
enum class Pairing { Consecutive, Disjoint };

struct SequenceEntry {
  std::string id;
  Environment environment = Environment::Structured;
  std::vector<std::string> scan_files;  // relative to the manifest directory
  std::string pose_file;                // optional; empty = identity poses
  double alpha = 0.0;                   // rad, per-sequence sensor resolution
  Pairing pairing = Pairing::Consecutive;
};

struct DatasetManifest {
  std::vector<SequenceEntry> sequences;
  std::string base_dir;  // directory of the manifest file
};

/// JSON manifest, schema:
/// {
///   "sequences": [ { "id": ..., "environment": "structured|semi|unstructured",
///                    "scans": [...], "poses": "file.csv", "alpha_deg": 0.0,
///                    "pairing": "consecutive|disjoint" } ]
/// }
/// Every referenced file must exist; a sequence's pose row count must match
/// its scan count. Throws Error(IoError) / Error(FormatError).
DatasetManifest load_manifest(const std::string& path);
void write_manifest(const DatasetManifest& manifest, const std::string& path);

struct SequenceLoadOptions {
  double downsample_cell = 0.0;  // 0 disables downsampling at load
};

/// Loads scans, applies poses (scan k mapped by pose k into the common
/// frame, sensor origin = pose translation), optionally downsamples, and
/// builds pairs per the sequence's pairing rule.
std::vector<SequenceData> load_sequences(const DatasetManifest& manifest,
                                         const SequenceLoadOptions& options = {});

}  // namespace coral
