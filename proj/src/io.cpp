#include "fbmdrift/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "fbmdrift/error.hpp"

namespace fbmdrift::io {

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_text(const std::filesystem::path& file, const std::string& content) {
  std::error_code ec;
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path(), ec);
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + file.string() + "' for writing");
  out << content;
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + file.string() + "'");
}

std::string read_text(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + file.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fbm_path_csv(const FbmPath& path) {
  std::string out = "t,value\n";
  for (std::size_t i = 0; i < path.values.size(); ++i) {
    out += format_number(path.times[i]) + "," + format_number(path.values[i]) + "\n";
  }
  return out;
}

nlohmann::json fbm_path_json(const FbmPath& path) {
  return {{"hurst", path.hurst.value()}, {"dt", path.dt}, {"seed", path.seed}, {"values", path.values}};
}

std::string sample_path_csv(const SamplePath& path) {
  std::string out = "t,X\n";
  for (std::size_t k = 0; k < path.obs.size(); ++k) {
    out += format_number(path.grid.time(k)) + "," + format_number(path.obs[k]) + "\n";
  }
  return out;
}

std::string sample_path_fine_csv(const SamplePath& path) {
  path.require_fine();
  std::string out = "t,X\n";
  for (std::size_t j = 0; j < path.fine_values.size(); ++j) {
    out += format_number(path.fine_times[j]) + "," + format_number(path.fine_values[j]) + "\n";
  }
  return out;
}

nlohmann::json sample_path_metadata(const SamplePath& path) {
  return {{"model", path.model_tag},
          {"sigma", path.sigma},
          {"hurst", path.hurst.value()},
          {"x0", path.x0},
          {"n", path.grid.n},
          {"gamma", path.grid.gamma},
          {"c_alpha", path.grid.c_alpha},
          {"alpha_n", path.grid.alpha_n},
          {"t_n", path.grid.horizon()},
          {"seed", path.seed},
          {"substream", path.substream},
          {"refine", path.refine},
          {"burn_in", path.burn_in}};
}

SamplePath read_sample_path_csv(const std::filesystem::path& file, HurstIndex hurst) {
  std::istringstream in(read_text(file));
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::IoError, "empty path file '" + file.string() + "'");

  std::vector<double> ts, xs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::IoError, "malformed row in '" + file.string() + "'");
    try {
      ts.push_back(std::stod(line.substr(0, comma)));
      xs.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::IoError, "non-numeric row in '" + file.string() + "'");
    }
  }
  if (xs.size() < 2) throw Error(ErrorCode::InvalidArgument, "path file needs at least two rows");

  const double alpha = ts[1] - ts[0];
  for (std::size_t k = 1; k < ts.size(); ++k) {
    if (std::abs((ts[k] - ts[k - 1]) - alpha) > 1e-9 * std::max(1.0, std::abs(ts[k]))) {
      throw Error(ErrorCode::InvalidArgument, "path file must be uniformly spaced");
    }
  }

  SamplePath path;
  path.grid.n = xs.size() - 1;
  path.grid.alpha_n = alpha;
  path.obs = std::move(xs);
  path.hurst = hurst;
  path.model_tag = "data";
  return path;
}

std::string curve_csv(const EstimateCurve& curve) {
  const bool with_terms = curve.terms.has_value();
  std::string out = with_terms ? "x,b_hat,mass,defined,I,II,III,S\n" : "x,b_hat,mass,defined\n";
  for (std::size_t i = 0; i < curve.x.size(); ++i) {
    out += format_number(curve.x[i]) + "," + format_number(curve.b_hat[i]) + "," + format_number(curve.mass[i]) +
           "," + (curve.defined[i] ? "1" : "0");
    if (with_terms) {
      const auto& t = (*curve.terms)[i];
      out += "," + format_number(t.drift_residual) + "," + format_number(t.smoothed_drift) + "," +
             format_number(t.noise) + "," + format_number(t.mass);
    }
    out += "\n";
  }
  return out;
}

nlohmann::json curve_json(const EstimateCurve& curve) {
  nlohmann::json j;
  j["x"] = curve.x;
  nlohmann::json b = nlohmann::json::array();
  for (std::size_t i = 0; i < curve.x.size(); ++i) {
    if (curve.defined[i]) {
      b.push_back(curve.b_hat[i]);
    } else {
      b.push_back(nullptr);
    }
  }
  j["b_hat"] = b;
  j["mass"] = curve.mass;
  std::vector<bool> defined(curve.defined.begin(), curve.defined.end());
  j["defined"] = defined;
  if (curve.terms) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : *curve.terms) {
      terms.push_back({{"I", t.drift_residual}, {"II", t.smoothed_drift}, {"III", t.noise}, {"S", t.mass}});
    }
    j["terms"] = terms;
  }
  return j;
}

namespace {

constexpr double kWidth = 640.0, kHeight = 420.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 40.0, kBottom = 50.0;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

struct Scale {
  double lo, hi;
  bool log2;
  double pixel_lo, pixel_hi;

  double value(double v) const { return log2 ? std::log2(v) : v; }
  double operator()(double v) const {
    const double t = (value(v) - lo) / (hi - lo);
    return pixel_lo + t * (pixel_hi - pixel_lo);
  }
};

Scale make_scale(const std::vector<SvgSeries>& series, bool use_x, bool log2, double p_lo, double p_hi) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    for (double v : use_x ? s.x : s.y) {
      if (!std::isfinite(v) || (log2 && v <= 0.0)) continue;
      const double t = log2 ? std::log2(v) : v;
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (log2) {
    lo = std::floor(lo);
    hi = std::ceil(hi);
  }
  if (hi - lo < 1e-12) hi = lo + 1.0;
  return {lo, hi, log2, p_lo, p_hi};
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v, bool log2) {
  if (log2) return "2^" + std::to_string(static_cast<long>(std::lround(v)));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::vector<double> ticks(const Scale& s) {
  std::vector<double> out;
  if (s.log2) {
    for (double e = s.lo; e <= s.hi + 1e-9; e += 1.0) out.push_back(e);
  } else {
    for (int i = 0; i <= 5; ++i) out.push_back(s.lo + (s.hi - s.lo) * i / 5.0);
  }
  return out;
}

}  // namespace

std::string svg_line_plot(const SvgAxes& axes, const std::vector<SvgSeries>& series) {
  const Scale sx = make_scale(series, true, axes.log2_x, kLeft, kWidth - kRight);
  const Scale sy = make_scale(series, false, axes.log2_y, kHeight - kBottom, kTop);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << axes.title
      << "</text>\n";
  svg << "<line class=\"axis\" x1=\"" << num(kLeft) << "\" y1=\"" << num(kHeight - kBottom) << "\" x2=\""
      << num(kWidth - kRight) << "\" y2=\"" << num(kHeight - kBottom) << "\" stroke=\"black\"/>\n";
  svg << "<line class=\"axis\" x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft)
      << "\" y2=\"" << num(kHeight - kBottom) << "\" stroke=\"black\"/>\n";

  for (double t : ticks(sx)) {
    const double px = sx.pixel_lo + (t - sx.lo) / (sx.hi - sx.lo) * (sx.pixel_hi - sx.pixel_lo);
    svg << "<text class=\"xtick\" x=\"" << num(px) << "\" y=\"" << num(kHeight - kBottom + 18)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(t, sx.log2) << "</text>\n";
  }
  for (double t : ticks(sy)) {
    const double py = sy.pixel_lo + (t - sy.lo) / (sy.hi - sy.lo) * (sy.pixel_hi - sy.pixel_lo);
    svg << "<text class=\"ytick\" x=\"" << num(kLeft - 6) << "\" y=\"" << num(py + 4)
        << "\" text-anchor=\"end\" font-size=\"11\">" << tick_label(t, sy.log2) << "</text>\n";
  }
  svg << "<text x=\"" << num(kWidth / 2) << "\" y=\"" << num(kHeight - 10) << "\" text-anchor=\"middle\" font-size=\"12\">"
      << axes.x_label << "</text>\n";
  svg << "<text x=\"16\" y=\"" << num(kHeight / 2) << "\" transform=\"rotate(-90 16 " << num(kHeight / 2)
      << ")\" text-anchor=\"middle\" font-size=\"12\">" << axes.y_label << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kColors[i % std::size(kColors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t j = 0; j < s.x.size() && j < s.y.size(); ++j) {
      if (!std::isfinite(s.x[j]) || !std::isfinite(s.y[j])) continue;
      if ((sx.log2 && s.x[j] <= 0.0) || (sy.log2 && s.y[j] <= 0.0)) continue;
      svg << num(sx(s.x[j])) << "," << num(sy(s.y[j])) << " ";
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << num(kWidth - kRight - 150) << "\" y=\"" << num(kTop + 14.0 * static_cast<double>(i + 1))
        << "\" fill=\"" << color << "\" font-size=\"11\">" << s.name << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace fbmdrift::io
