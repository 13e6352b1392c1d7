#include "cosil/harness/plot.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "cosil/errors.hpp"
#include "cosil/harness/metrics.hpp"

namespace cosil::harness {
namespace {

namespace fs = std::filesystem;

struct Series {
  std::vector<double> steps, values;
};

double interpolate(const Series& s, double x) {
  if (x <= s.steps.front()) return s.values.front();
  if (x >= s.steps.back()) return s.values.back();
  const auto it = std::lower_bound(s.steps.begin(), s.steps.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - s.steps.begin());
  if (s.steps[j] == x) return s.values[j];
  const double t = (x - s.steps[j - 1]) / (s.steps[j] - s.steps[j - 1]);
  return s.values[j - 1] + t * (s.values[j] - s.values[j - 1]);
}

void smooth(std::vector<double>& v, std::size_t window) {
  if (window <= 1) return;
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t j = lo; j <= i; ++j) sum += v[j];
    out[i] = sum / static_cast<double>(i - lo + 1);
  }
  v = std::move(out);
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Round tick spacing covering [lo, hi] with about `target` intervals.
double tick_step(double lo, double hi, int target) {
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (const double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#17becf", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"};
constexpr const char* kDashes[] = {"", "9,3,2,3", "2,3"};

}  // namespace

std::vector<Curve> build_curves(const std::vector<std::string>& files, const PlotOptions& options) {
  if (files.empty()) throw ConfigError("no metrics files to plot");
  if (options.metric != "eval_return" && options.metric != "eval_success") {
    throw ConfigError("plot metric must be eval_return or eval_success");
  }
  std::vector<std::string> sorted = files;
  std::sort(sorted.begin(), sorted.end());

  std::map<std::string, std::vector<Series>> groups;
  std::vector<fs::path> parents;
  for (const auto& f : sorted) {
    Series s;
    for (const auto& r : read_metrics(f)) {
      s.steps.push_back(static_cast<double>(r.step));
      s.values.push_back(options.metric == "eval_return" ? r.eval_return : r.eval_success);
    }
    if (s.steps.empty()) throw ValidationError(f + " has no rows");
    smooth(s.values, options.smoothing);
    const fs::path parent = fs::path(f).parent_path().lexically_normal();
    groups[parent.string()].push_back(std::move(s));
    parents.push_back(parent);
  }

  // Label each group by its path below the deepest common directory.
  fs::path common = parents.front();
  for (const auto& p : parents) {
    fs::path shared;
    auto a = common.begin(), b = p.begin();
    for (; a != common.end() && b != p.end() && *a == *b; ++a, ++b) shared /= *a;
    common = shared;
  }

  std::vector<Curve> curves;
  for (auto& [dir, seeds] : groups) {
    Curve c;
    std::string rel = fs::path(dir).lexically_relative(common).string();
    c.label = rel.empty() || rel == "." ? fs::path(dir).filename().string() : rel;
    if (c.label.empty()) c.label = dir.empty() ? "run" : dir;
    c.seeds = seeds.size();
    const Series* grid = &seeds.front();
    for (const auto& s : seeds) {
      if (s.steps != seeds.front().steps) c.resampled = true;
      if (s.steps.size() < grid->steps.size()) grid = &s;
    }
    c.steps = grid->steps;
    for (std::size_t i = 0; i < c.steps.size(); ++i) {
      double sum = 0.0;
      std::vector<double> vals;
      for (const auto& s : seeds) {
        vals.push_back(c.resampled ? interpolate(s, c.steps[i]) : s.values[i]);
        sum += vals.back();
      }
      const double mean = sum / static_cast<double>(vals.size());
      double var = 0.0;
      for (const double v : vals) var += (v - mean) * (v - mean);
      c.mean.push_back(mean);
      c.sd.push_back(std::sqrt(var / static_cast<double>(vals.size())));
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

std::string curves_csv(const std::vector<Curve>& curves) {
  std::string s = "curve,step,mean,sd,seeds,resampled\n";
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.steps.size(); ++i) {
      s += c.label + "," + format_double(c.steps[i]) + "," + format_double(c.mean[i]) + "," + format_double(c.sd[i]) +
           "," + std::to_string(c.seeds) + "," + (c.resampled ? "1" : "0") + "\n";
    }
  }
  return s;
}

std::string render_svg(const std::vector<Curve>& curves, const PlotOptions& options) {
  constexpr double kLeft = 70, kTop = 40, kBottom = 50, kPlotW = 500, kPlotH = 370;
  // The legend column grows with the longest label (about 7 px per glyph).
  std::size_t longest = 6, entries = curves.size() + (options.random_line ? 1 : 0) + (options.expert_line ? 1 : 0);
  for (const auto& c : curves) longest = std::max(longest, c.label.size() + 18);
  const double kW = kLeft + kPlotW + std::max(190.0, 48.0 + 7.0 * static_cast<double>(longest));
  const double kH = std::max(kTop + kPlotH + kBottom, kTop + 20.0 + 18.0 * static_cast<double>(entries));
  const double pw = kPlotW, ph = kH - kTop - kBottom;

  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  bool first = true;
  auto include_y = [&](double v) {
    if (!std::isfinite(v)) return;
    if (first) {
      ymin = ymax = v;
      first = false;
    }
    ymin = std::min(ymin, v);
    ymax = std::max(ymax, v);
  };
  for (const auto& c : curves) {
    xmax = std::max(xmax, c.steps.back());
    for (std::size_t i = 0; i < c.steps.size(); ++i) {
      include_y(c.mean[i] - c.sd[i]);
      include_y(c.mean[i] + c.sd[i]);
    }
  }
  if (options.random_line) include_y(*options.random_line);
  if (options.expert_line) include_y(*options.expert_line);
  if (ymax - ymin < 1e-9) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return kTop + (ymax - y) / (ymax - ymin) * ph; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt("%.0f", kW) + "\" height=\"" + fmt("%.0f", kH) +
       "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt("%.1f", kLeft + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
       escape(options.title) + "</text>\n";
  s += "<rect x=\"" + fmt("%.1f", kLeft) + "\" y=\"" + fmt("%.1f", kTop) + "\" width=\"" + fmt("%.1f", pw) +
       "\" height=\"" + fmt("%.1f", ph) + "\" fill=\"none\" stroke=\"#333\"/>\n";

  const double xs = tick_step(xmin, xmax, 5), ys = tick_step(ymin, ymax, 5);
  for (double x = std::ceil(xmin / xs) * xs; x <= xmax + 1e-9 * xs; x += xs) {
    s += "<line x1=\"" + fmt("%.1f", px(x)) + "\" y1=\"" + fmt("%.1f", kTop + ph) + "\" x2=\"" + fmt("%.1f", px(x)) +
         "\" y2=\"" + fmt("%.1f", kTop + ph + 5) + "\" stroke=\"#333\"/>\n";
    s += "<text x=\"" + fmt("%.1f", px(x)) + "\" y=\"" + fmt("%.1f", kTop + ph + 18) +
         "\" text-anchor=\"middle\">" + fmt("%g", x) + "</text>\n";
  }
  for (double y = std::ceil(ymin / ys) * ys; y <= ymax + 1e-9 * ys; y += ys) {
    const double yy = std::abs(y) < 1e-12 * ys ? 0.0 : y;
    s += "<line x1=\"" + fmt("%.1f", kLeft - 5) + "\" y1=\"" + fmt("%.1f", py(yy)) + "\" x2=\"" + fmt("%.1f", kLeft) +
         "\" y2=\"" + fmt("%.1f", py(yy)) + "\" stroke=\"#333\"/>\n";
    s += "<text x=\"" + fmt("%.1f", kLeft - 8) + "\" y=\"" + fmt("%.1f", py(yy) + 4) + "\" text-anchor=\"end\">" +
         fmt("%g", yy) + "</text>\n";
  }
  s += "<text x=\"" + fmt("%.1f", kLeft + pw / 2) + "\" y=\"" + fmt("%.1f", kH - 10) +
       "\" text-anchor=\"middle\">environment steps</text>\n";
  s += "<text transform=\"translate(18," + fmt("%.1f", kTop + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
       escape(options.metric == "eval_return" ? "evaluation return" : "evaluation success") + "</text>\n";

  double legend_y = kTop + 10;
  auto legend = [&](const std::string& color, const std::string& text, const std::string& dash) {
    s += "<line x1=\"" + fmt("%.1f", kLeft + pw + 12) + "\" y1=\"" + fmt("%.1f", legend_y) + "\" x2=\"" +
         fmt("%.1f", kLeft + pw + 32) + "\" y2=\"" + fmt("%.1f", legend_y) + "\" stroke=\"" + color +
         "\" stroke-width=\"2\"" + (dash.empty() ? "" : " stroke-dasharray=\"" + dash + "\"") + "/>\n";
    s += "<text x=\"" + fmt("%.1f", kLeft + pw + 36) + "\" y=\"" + fmt("%.1f", legend_y + 4) + "\">" + escape(text) +
         "</text>\n";
    legend_y += 18;
  };

  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto& c = curves[k];
    const std::string color = kPalette[k % std::size(kPalette)];
    // Past the palette, curves cycle through dash patterns.
    const std::string dash = kDashes[(k / std::size(kPalette)) % std::size(kDashes)];
    std::string band, line;
    for (std::size_t i = 0; i < c.steps.size(); ++i) {
      band += fmt("%.2f", px(c.steps[i])) + "," + fmt("%.2f", py(c.mean[i] + c.sd[i])) + " ";
      line += fmt("%.2f", px(c.steps[i])) + "," + fmt("%.2f", py(c.mean[i])) + " ";
    }
    for (std::size_t i = c.steps.size(); i-- > 0;) {
      band += fmt("%.2f", px(c.steps[i])) + "," + fmt("%.2f", py(c.mean[i] - c.sd[i])) + " ";
    }
    s += "<polygon points=\"" + band + "\" fill=\"" + color + "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    s += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"" +
         (dash.empty() ? "" : " stroke-dasharray=\"" + dash + "\"") + "/>\n";
    legend(color, c.label + " (n=" + std::to_string(c.seeds) + (c.resampled ? ", resampled" : "") + ")", dash);
  }
  auto hline = [&](double v, const std::string& color, const std::string& text) {
    s += "<line x1=\"" + fmt("%.1f", kLeft) + "\" y1=\"" + fmt("%.2f", py(v)) + "\" x2=\"" + fmt("%.1f", kLeft + pw) +
         "\" y2=\"" + fmt("%.2f", py(v)) + "\" stroke=\"" + color + "\" stroke-width=\"1.5\" stroke-dasharray=\"5,3\"/>\n";
    legend(color, text, "5,3");
  };
  if (options.expert_line) hline(*options.expert_line, "#000000", "Expert");
  if (options.random_line) hline(*options.random_line, "#888888", "Random");
  s += "</svg>\n";
  return s;
}

std::vector<std::string> glob_metrics(const std::string& pattern) {
  // Walk from the longest wildcard-free directory prefix.
  const auto wild = pattern.find_first_of("*?[");
  fs::path root = wild == std::string::npos ? fs::path(pattern).parent_path()
                                            : fs::path(pattern.substr(0, wild)).parent_path();
  if (root.empty()) root = ".";
  std::string pat = pattern;
  int flags = FNM_PATHNAME;
  if (pat.find("**") != std::string::npos) {
    flags = 0;
    for (auto pos = pat.find("**/"); pos != std::string::npos; pos = pat.find("**/")) pat.replace(pos, 3, "*");
  }
  std::vector<std::string> out;
  if (!fs::exists(root)) return out;
  const bool dot_prefix = pattern.rfind("./", 0) == 0;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::string p = entry.path().string();
    if (!dot_prefix && p.rfind("./", 0) == 0 && root == ".") p = p.substr(2);
    const std::string name = entry.path().filename().string();
    if (name.ends_with(".timing.csv") || name.ends_with(".trace.csv") || name == "summary.csv") continue;
    if (fnmatch(pat.c_str(), p.c_str(), flags) == 0) out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

PlotOutput emit_plots(const std::vector<std::string>& files, const std::string& stem, const PlotOptions& options) {
  PlotOutput out;
  out.curves = build_curves(files, options);
  out.svg_path = stem + ".svg";
  out.csv_path = stem + ".csv";
  if (const auto dir = fs::path(stem).parent_path(); !dir.empty()) fs::create_directories(dir);
  std::ofstream(out.svg_path, std::ios::trunc) << render_svg(out.curves, options);
  std::ofstream(out.csv_path, std::ios::trunc) << curves_csv(out.curves);
  return out;
}

}  // namespace cosil::harness
