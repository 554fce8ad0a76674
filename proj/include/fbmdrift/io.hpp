#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbmdrift/estimator.hpp"
#include "fbmdrift/fbm.hpp"
#include "fbmdrift/sde.hpp"

namespace fbmdrift::io {

//! Fixed 17-significant-digit formatting used by every CSV writer.
std::string format_number(double value);

void write_text(const std::filesystem::path& file, const std::string& content);
std::string read_text(const std::filesystem::path& file);

std::string fbm_path_csv(const FbmPath& path);
nlohmann::json fbm_path_json(const FbmPath& path);

//! Coarse observations as `t,X`.
std::string sample_path_csv(const SamplePath& path);
//! Fine grid (observation window and burn-in) as `t,X`.
std::string sample_path_fine_csv(const SamplePath& path);
nlohmann::json sample_path_metadata(const SamplePath& path);

//! Reads a `t,X` CSV with uniform spacing into a SamplePath without fine grid.
SamplePath read_sample_path_csv(const std::filesystem::path& file, HurstIndex hurst);

//! `x,b_hat,mass,defined` plus `I,II,III,S` when terms are present.
std::string curve_csv(const EstimateCurve& curve);
nlohmann::json curve_json(const EstimateCurve& curve);

struct SvgSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct SvgAxes {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log2_x = false;
  bool log2_y = false;
};

//! Static line plot, one polyline per series. Log axes get ticks at powers of 2.
std::string svg_line_plot(const SvgAxes& axes, const std::vector<SvgSeries>& series);

}  // namespace fbmdrift::io
