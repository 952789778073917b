#include "coral/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "coral/error.hpp"

namespace coral {

namespace {

std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : line) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

double parse_double(const std::string& token, const std::string& path,
                    std::size_t line_no) {
  char* end = nullptr;
  double value = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') {
    fail(ErrorCode::ParseError, path + ":" + std::to_string(line_no) +
                                    ": cannot parse number '" + token + "'");
  }
  return value;
}

void enforce_rejection_budget(const std::string& path, std::size_t accepted,
                              std::size_t rejected) {
  std::size_t total = accepted + rejected;
  if (total > 0 &&
      static_cast<double>(rejected) > 0.01 * static_cast<double>(total)) {
    fail(ErrorCode::ParseError,
         path + ": " + std::to_string(rejected) + " of " +
             std::to_string(total) + " points non-finite (over 1% rejected)");
  }
}

PointCloud load_xyz(const std::string& path, std::size_t* rejected_out) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);

  PointCloud cloud;
  std::string raw;
  std::size_t line_no = 0;
  std::size_t rejected = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = strip_comment(raw);
    if (is_blank(line)) continue;
    std::vector<std::string> tokens = split_tokens(line);
    if (tokens.size() != 3) {
      fail(ErrorCode::ParseError,
           path + ":" + std::to_string(line_no) + ": expected 3 values, got " +
               std::to_string(tokens.size()));
    }
    Point3 p(parse_double(tokens[0], path, line_no),
             parse_double(tokens[1], path, line_no),
             parse_double(tokens[2], path, line_no));
    if (!p.allFinite()) {
      ++rejected;
      continue;
    }
    cloud.points.push_back(p);
  }
  enforce_rejection_budget(path, cloud.points.size(), rejected);
  if (rejected_out) *rejected_out = rejected;
  cloud.labels.assign(cloud.points.size(), SourceLabel::A);
  return cloud;
}

PointCloud load_pcd(const std::string& path, std::size_t* rejected_out) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);

  std::vector<std::string> fields;
  std::vector<std::size_t> counts;
  std::size_t declared_points = 0;
  bool have_points = false;
  bool data_ascii = false;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = strip_comment(raw);
    if (is_blank(line)) continue;
    std::vector<std::string> tokens = split_tokens(line);
    const std::string& keyword = tokens.front();
    if (keyword == "FIELDS") {
      fields.assign(tokens.begin() + 1, tokens.end());
    } else if (keyword == "COUNT") {
      counts.clear();
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        counts.push_back(static_cast<std::size_t>(
            parse_double(tokens[i], path, line_no)));
      }
    } else if (keyword == "POINTS") {
      if (tokens.size() != 2) {
        fail(ErrorCode::ParseError,
             path + ":" + std::to_string(line_no) + ": malformed POINTS line");
      }
      declared_points = static_cast<std::size_t>(
          parse_double(tokens[1], path, line_no));
      have_points = true;
    } else if (keyword == "DATA") {
      if (tokens.size() != 2 || tokens[1] != "ascii") {
        fail(ErrorCode::FormatError,
             path + ":" + std::to_string(line_no) +
                 ": only DATA ascii is supported");
      }
      data_ascii = true;
      break;
    }
    // VERSION, SIZE, TYPE, WIDTH, HEIGHT, VIEWPOINT are not needed for
    // ascii parsing and are skipped.
  }
  if (!data_ascii) {
    fail(ErrorCode::FormatError, path + ": missing DATA ascii header");
  }
  if (fields.empty()) {
    fail(ErrorCode::FormatError, path + ": missing FIELDS header");
  }
  if (!have_points) {
    fail(ErrorCode::FormatError, path + ": missing POINTS header");
  }
  if (counts.empty()) counts.assign(fields.size(), 1);
  if (counts.size() != fields.size()) {
    fail(ErrorCode::FormatError, path + ": COUNT does not match FIELDS");
  }

  // Column offsets of x, y, z among the expanded value columns.
  std::size_t column = 0;
  std::size_t col_x = SIZE_MAX, col_y = SIZE_MAX, col_z = SIZE_MAX;
  for (std::size_t f = 0; f < fields.size(); ++f) {
    if (fields[f] == "x") col_x = column;
    if (fields[f] == "y") col_y = column;
    if (fields[f] == "z") col_z = column;
    column += counts[f];
  }
  const std::size_t total_columns = column;
  if (col_x == SIZE_MAX || col_y == SIZE_MAX || col_z == SIZE_MAX) {
    fail(ErrorCode::FormatError, path + ": FIELDS must contain x, y and z");
  }

  PointCloud cloud;
  cloud.points.reserve(declared_points);
  std::size_t rejected = 0;
  std::size_t read = 0;
  while (read < declared_points && std::getline(in, raw)) {
    ++line_no;
    std::string line = strip_comment(raw);
    if (is_blank(line)) continue;
    std::vector<std::string> tokens = split_tokens(line);
    if (tokens.size() != total_columns) {
      fail(ErrorCode::ParseError,
           path + ":" + std::to_string(line_no) + ": expected " +
               std::to_string(total_columns) + " values, got " +
               std::to_string(tokens.size()));
    }
    Point3 p(parse_double(tokens[col_x], path, line_no),
             parse_double(tokens[col_y], path, line_no),
             parse_double(tokens[col_z], path, line_no));
    ++read;
    if (!p.allFinite()) {
      ++rejected;
      continue;
    }
    cloud.points.push_back(p);
  }
  if (read < declared_points) {
    fail(ErrorCode::ParseError,
         path + ": header declares " + std::to_string(declared_points) +
             " points but only " + std::to_string(read) + " data lines found");
  }
  enforce_rejection_budget(path, cloud.points.size(), rejected);
  if (rejected_out) *rejected_out = rejected;
  cloud.labels.assign(cloud.points.size(), SourceLabel::A);
  return cloud;
}

}  // namespace

CloudFormat cloud_format_from_path(const std::string& path) {
  auto dot = path.rfind('.');
  if (dot != std::string::npos && path.substr(dot) == ".pcd") {
    return CloudFormat::PcdAscii;
  }
  return CloudFormat::XyzAscii;
}

PointCloud load_cloud(const std::string& path, CloudFormat format,
                      std::size_t* rejected_out) {
  return format == CloudFormat::PcdAscii ? load_pcd(path, rejected_out)
                                         : load_xyz(path, rejected_out);
}

void save_cloud_xyz(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path);
  char buffer[128];
  for (const Point3& p : cloud.points) {
    std::snprintf(buffer, sizeof(buffer), "%.6f %.6f %.6f\n", p.x(), p.y(),
                  p.z());
    out << buffer;
  }
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

namespace {

Eigen::Matrix3d polar_rotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) {
    u.col(2) *= -1.0;
  }
  return u * v.transpose();
}

RigidTransform transform_from_values(const std::vector<double>& values,
                                     const std::string& path,
                                     std::size_t line_no) {
  RigidTransform t;
  if (values.size() == 16) {
    for (int i = 0; i < 4; ++i) {
      double expected = i == 3 ? 1.0 : 0.0;
      if (std::abs(values[12 + i] - expected) > 1e-6) {
        fail(ErrorCode::FormatError,
             path + ":" + std::to_string(line_no) +
                 ": last row of a 4x4 pose must be 0 0 0 1");
      }
    }
  }
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      t.rotation(r, c) = values[r * 4 + c];
    }
    t.translation(r) = values[r * 4 + 3];
  }
  double err = t.orthonormality_error();
  if (err > 1e-4) {
    fail(ErrorCode::FormatError,
         path + ":" + std::to_string(line_no) +
             ": rotation orthonormality error " + std::to_string(err) +
             " exceeds 1e-4");
  }
  if (err > 1e-9) {
    t.rotation = polar_rotation(t.rotation);
  }
  return t;
}

}  // namespace

std::vector<RigidTransform> load_poses(const std::string& path,
                                       const PoseLoadOptions& options) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);

  std::vector<RigidTransform> poses;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = strip_comment(raw);
    if (is_blank(line)) continue;
    std::vector<std::string> tokens = split_tokens(line);
    if (tokens.size() <= options.skip_columns) {
      fail(ErrorCode::FormatError,
           path + ":" + std::to_string(line_no) + ": row has only " +
               std::to_string(tokens.size()) + " columns");
    }
    std::vector<double> values;
    values.reserve(tokens.size() - options.skip_columns);
    for (std::size_t i = options.skip_columns; i < tokens.size(); ++i) {
      values.push_back(parse_double(tokens[i], path, line_no));
    }

    std::size_t expected = 0;
    switch (options.layout) {
      case PoseLayout::Rows12: expected = 12; break;
      case PoseLayout::Rows16: expected = 16; break;
      case PoseLayout::Auto:
        expected = values.size() == 16 ? 16 : 12;
        break;
    }
    if (values.size() != expected) {
      fail(ErrorCode::FormatError,
           path + ":" + std::to_string(line_no) + ": expected " +
               std::to_string(expected) + " numeric columns, got " +
               std::to_string(values.size()) +
               " (use the pose layout/skip options for decorated files)");
    }
    poses.push_back(transform_from_values(values, path, line_no));
  }
  return poses;
}

void write_per_point_quality(std::ostream& out, const PointCloud& a,
                             const PointCloud& b, const QualityResult& result) {
  const std::size_t n = a.size() + b.size();
  const bool have_entries = result.per_point.size() == n;
  char buffer[192];
  for (std::size_t i = 0; i < n; ++i) {
    const Point3& p = i < a.size() ? a.points[i] : b.points[i - a.size()];
    double q = 0.0;
    int valid = 0;
    if (have_entries && result.per_point[i].valid) {
      q = result.per_point[i].q;
      valid = 1;
    }
    std::snprintf(buffer, sizeof(buffer), "%.6f %.6f %.6f %.6f %d\n", p.x(),
                  p.y(), p.z(), q, valid);
    out << buffer;
  }
}

void write_per_point_quality(const PointCloud& a, const PointCloud& b,
                             const QualityResult& result,
                             const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path);
  write_per_point_quality(out, a, b, result);
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace coral
