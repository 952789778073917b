#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "coral/entropy.hpp"
#include "coral/point_cloud.hpp"

namespace coral {

enum class CloudFormat { XyzAscii, PcdAscii };

/// .pcd -> PcdAscii, everything else -> XyzAscii.
CloudFormat cloud_format_from_path(const std::string& path);

/// xyz-ascii: one "x y z" triple per line, '#' comments and blank lines
/// skipped. pcd-ascii: header-driven, FIELDS must contain x, y and z,
/// other fields are ignored, DATA must be ascii. Point order is preserved.
/// Non-finite points are dropped and counted through rejected_out; the
/// load fails when more than 1% of the parsed points were rejected.
/// Throws Error(IoError) for unreadable files and Error(ParseError) with a
/// line number for malformed content.
PointCloud load_cloud(const std::string& path, CloudFormat format,
                      std::size_t* rejected_out = nullptr);

/// One "x y z" line per point, 6-decimal fixed.
void save_cloud_xyz(const PointCloud& cloud, const std::string& path);

enum class PoseLayout { Auto, Rows12, Rows16 };

struct PoseLoadOptions {
  PoseLayout layout = PoseLayout::Auto;
  /// Leading columns to drop from every row before interpreting the rest
  /// (covers pose files that prepend ids or timestamps).
  std::size_t skip_columns = 0;
};

/// CSV (comma or whitespace separated), 12 or 16 numeric columns per row,
/// row-major 3x4 or 4x4. Rotations with orthonormality error in
/// (1e-9, 1e-4] are re-orthonormalized by polar decomposition; worse rows
/// are rejected. Throws Error(FormatError) on a wrong column count or an
/// unusable rotation.
std::vector<RigidTransform> load_poses(const std::string& path,
                                       const PoseLoadOptions& options = {});

/// "x y z q valid" per joint-cloud point, 6-decimal fixed, for external
/// colorized viewing. Unmeasured points carry q = 0 and valid = 0.
void write_per_point_quality(std::ostream& out, const PointCloud& a,
                             const PointCloud& b, const QualityResult& result);
void write_per_point_quality(const PointCloud& a, const PointCloud& b,
                             const QualityResult& result,
                             const std::string& path);

}  // namespace coral
