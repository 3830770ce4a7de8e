#pragma once

#include "nblab/pde_solver.hpp"
#include "nblab/report.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace nblab::io {

/// Shortest round-trip decimal form; identical inputs give identical text.
std::string format_number(double v);

/// Header line plus one row per index; all columns must have the same length.
std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns);

/// t, w, sup_norm, J, dt per accepted step.
std::string trajectory_csv(const Trajectory& tr);

/// Two-space indented dump with a trailing newline.
std::string json_text(const json& j);

std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t v);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label = "t";
  std::string y_label;
  bool log_y = false;
  bool reproducible = false;  // drops the timestamp comment
  int width = 640;
  int height = 400;
};

/// Line plot with axes, ticks and a legend. Nonpositive values are skipped on a log axis.
std::string svg_plot(const std::vector<Series>& series, const PlotOptions& opt);

/// Creates parent directories; throws ConfigError when the file cannot be written.
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace nblab::io
