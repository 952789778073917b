#include "coral/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "coral/error.hpp"

namespace coral {

namespace {

constexpr double kDegToRad = 0.017453292519943295;

double to_double(const std::string& value, const std::string& what) {
  char* end = nullptr;
  double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0' || !std::isfinite(v)) {
    fail(ErrorCode::ParseError, "config: bad number for " + what + ": '" + value + "'");
  }
  return v;
}

std::size_t to_count(const std::string& value, const std::string& what) {
  double v = to_double(value, what);
  if (v < 0.0 || v != std::floor(v)) {
    fail(ErrorCode::ParseError, "config: " + what + " must be a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string format_number(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%g", v);
  return buffer;
}

}  // namespace

void RunConfig::validate() const {
  entropy.validate();
  ndt.validate();
  error.validate();
  if (downsample_cell < 0.0) {
    fail(ErrorCode::InvalidParameter, "config: downsample must be >= 0");
  }
  if (folds < 2) {
    fail(ErrorCode::InvalidParameter, "config: folds must be >= 2");
  }
}

RunConfig default_profile(const std::string& name) {
  RunConfig config;
  if (name == "eth") {
    config.entropy.r_min = 0.3;
    config.entropy.r_max = 0.3;
    config.entropy.alpha = 0.0;
    config.entropy.epsilon = 0.0;
    config.entropy.e_reject = 0.2;
    config.ndt.voxel_size = 0.6;  // twice the radius
    config.downsample_cell = 0.08;
    return config;
  }
  if (name == "spinning-lidar") {
    config.entropy.r_min = 0.2;
    config.entropy.r_max = 1.0;
    config.entropy.alpha = 0.92 * kDegToRad;
    config.entropy.epsilon = 1e-8;
    config.entropy.e_reject = 0.2;
    config.ndt.voxel_size = 0.4;  // twice r_min
    config.downsample_cell = 0.0;
    return config;
  }
  fail(ErrorCode::InvalidParameter, "unknown profile '" + name + "'");
}

void apply_config_value(RunConfig& config, const std::string& section,
                        const std::string& key, const std::string& value) {
  const std::string what = section.empty() ? key : section + "." + key;
  if (section == "entropy") {
    if (key == "r_min") config.entropy.r_min = to_double(value, what);
    else if (key == "r_max") config.entropy.r_max = to_double(value, what);
    else if (key == "alpha_deg") config.entropy.alpha = to_double(value, what) * kDegToRad;
    else if (key == "epsilon") config.entropy.epsilon = to_double(value, what);
    else if (key == "e_reject") config.entropy.e_reject = to_double(value, what);
    else if (key == "min_overlap") config.entropy.min_overlap = to_double(value, what);
    else if (key == "min_neighbors") config.entropy.min_neighbors = to_count(value, what);
    else if (key == "aggregation") {
      if (value == "mean") config.entropy.aggregation = Aggregation::Mean;
      else if (value == "median") config.entropy.aggregation = Aggregation::Median;
      else fail(ErrorCode::ParseError, "config: aggregation must be mean or median");
    } else {
      fail(ErrorCode::ParseError, "config: unknown key '" + what + "'");
    }
    return;
  }
  if (section == "ndt") {
    if (key == "voxel") config.ndt.voxel_size = to_double(value, what);
    else if (key == "min_cell_points") config.ndt.min_cell_points = to_count(value, what);
    else fail(ErrorCode::ParseError, "config: unknown key '" + what + "'");
    return;
  }
  if (section == "error") {
    if (key == "e_d") config.error.e_d = to_double(value, what);
    else if (key == "e_theta_deg") config.error.e_theta = to_double(value, what) * kDegToRad;
    else if (key == "seed") config.error.seed = static_cast<std::uint64_t>(to_count(value, what));
    else fail(ErrorCode::ParseError, "config: unknown key '" + what + "'");
    return;
  }
  if (section == "run") {
    if (key == "method") config.method = parse_method(value);
    else if (key == "protocol") config.protocol = parse_protocol(value);
    else if (key == "downsample") config.downsample_cell = to_double(value, what);
    else if (key == "folds") config.folds = to_count(value, what);
    else if (key == "out_dir") config.out_dir = value;
    else fail(ErrorCode::ParseError, "config: unknown key '" + what + "'");
    return;
  }
  fail(ErrorCode::ParseError, "config: unknown section '" + section + "'");
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open config " + path);

  std::string raw;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        fail(ErrorCode::ParseError,
             path + ":" + std::to_string(line_no) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::ParseError,
           path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      fail(ErrorCode::ParseError,
           path + ":" + std::to_string(line_no) + ": empty key");
    }
    try {
      apply_config_value(base, section, key, value);
    } catch (const Error& e) {
      fail(e.code(), path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  base.validate();
  return base;
}

std::string describe(const RunConfig& config) {
  std::ostringstream out;
  out << "method=" << method_name(config.method)
      << " protocol=" << protocol_name(config.protocol)
      << " r_min=" << format_number(config.entropy.r_min)
      << " r_max=" << format_number(config.entropy.r_max)
      << " alpha_deg=" << format_number(config.entropy.alpha / kDegToRad)
      << " epsilon=" << format_number(config.entropy.epsilon)
      << " e_reject=" << format_number(config.entropy.e_reject)
      << " min_overlap=" << format_number(config.entropy.min_overlap)
      << " aggregation="
      << (config.entropy.aggregation == Aggregation::Mean ? "mean" : "median")
      << " min_neighbors=" << config.entropy.min_neighbors
      << " voxel=" << format_number(config.ndt.voxel_size)
      << " min_cell_points=" << config.ndt.min_cell_points
      << " e_d=" << format_number(config.error.e_d)
      << " e_theta_deg=" << format_number(config.error.e_theta / kDegToRad)
      << " seed=" << config.error.seed
      << " downsample=" << format_number(config.downsample_cell)
      << " folds=" << config.folds;
  return out.str();
}

}  // namespace coral
