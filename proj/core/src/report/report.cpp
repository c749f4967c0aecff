#include "alseg/report/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "alseg/eval/stats.hpp"

namespace alseg::report {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v, int prec = 4) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

const std::map<loop::MetricKey, std::vector<double>>& by_cycle_map(
    const loop::AggregateSummary& s, const std::string& metric) {
  if (metric == "dsc3d") return s.dsc3d;
  if (metric == "dsc2d") return s.dsc2d;
  if (metric == "hd3d") return s.hd3d;
  if (metric == "hd2d") return s.hd2d;
  throw std::invalid_argument("unknown metric: " + metric);
}

const std::map<std::string, std::vector<double>>& overall_map(
    const loop::AggregateSummary& s, const std::string& metric) {
  if (metric == "dsc3d") return s.overall_dsc3d;
  if (metric == "dsc2d") return s.overall_dsc2d;
  if (metric == "hd3d") return s.overall_hd3d;
  if (metric == "hd2d") return s.overall_hd2d;
  throw std::invalid_argument("unknown metric: " + metric);
}

std::vector<std::string> experiment_names(const loop::AggregateSummary& s) {
  std::set<std::string> names;
  for (const auto& [k, v] : s.labelled_size) names.insert(k.experiment);
  return {names.begin(), names.end()};
}

}  // namespace

void write_report(const loop::AggregateSummary& summary, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const auto names = experiment_names(summary);

  {
    std::ofstream f(out_dir / "summary_overall.csv");
    if (!f) throw std::runtime_error("cannot write summary_overall.csv");
    f << "strategy,n,dsc3d_mean,dsc3d_std,dsc2d_mean,dsc2d_std,"
         "hd95_3d_mean,hd95_3d_std,hd95_2d_mean,hd95_2d_std\n";
    for (const auto& name : names) {
      auto cell = [&](const std::map<std::string, std::vector<double>>& m) {
        const auto it = m.find(name);
        if (it == m.end() || it->second.empty())
          return std::string("nan,nan");
        return fmt(eval::mean(it->second)) + "," + fmt(eval::stddev(it->second));
      };
      const auto it = summary.overall_dsc3d.find(name);
      const std::size_t n = it == summary.overall_dsc3d.end() ? 0 : it->second.size();
      f << name << "," << n << "," << cell(summary.overall_dsc3d) << ","
        << cell(summary.overall_dsc2d) << "," << cell(summary.overall_hd3d)
        << "," << cell(summary.overall_hd2d) << "\n";
    }
  }

  {
    std::ofstream f(out_dir / "summary_by_cycle.csv");
    if (!f) throw std::runtime_error("cannot write summary_by_cycle.csv");
    f << "strategy,cycle,labelled_size,n,dsc3d_mean,dsc3d_std,dsc2d_mean,"
         "dsc2d_std,hd95_3d_mean,hd95_3d_std,hd95_2d_mean,hd95_2d_std\n";
    for (const auto& [key, sizes] : summary.labelled_size) {
      auto cell = [&](const std::map<loop::MetricKey, std::vector<double>>& m) {
        const auto it = m.find(key);
        if (it == m.end() || it->second.empty()) return std::string("nan,nan");
        return fmt(eval::mean(it->second)) + "," + fmt(eval::stddev(it->second));
      };
      const int labelled = sizes.empty() ? 0 : sizes.front();
      f << key.experiment << "," << key.cycle << "," << labelled << ","
        << sizes.size() << "," << cell(summary.dsc3d) << "," << cell(summary.dsc2d)
        << "," << cell(summary.hd3d) << "," << cell(summary.hd2d) << "\n";
    }
  }

  {
    std::ofstream f(out_dir / "pvalues.csv");
    if (!f) throw std::runtime_error("cannot write pvalues.csv");
    f << "strategy_a,strategy_b,p_dsc3d\n";
    for (const auto& [pair, p] : summary.pvalue_dsc3d)
      f << pair.first << "," << pair.second << "," << fmt(p, 6) << "\n";
  }
}

// ---------------------------------------------------------------------------
// SVG plotting

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

struct Frame {
  double x0, x1, y0, y1;  // data range
  int w, h;
  static constexpr int ml = 62, mr = 16, mt = 28, mb = 46;
  double px(double x) const {
    return ml + (x - x0) / (x1 - x0) * (w - ml - mr);
  }
  double py(double y) const {
    return h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);
  }
};

void svg_header(std::ofstream& f, int w, int h) {
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
    << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << " " << h << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void svg_axes(std::ofstream& f, const Frame& fr, const std::string& xlabel,
              const std::string& ylabel, const std::string& title) {
  f << "<g stroke=\"#444\" stroke-width=\"1\">\n"
    << "<line x1=\"" << fr.ml << "\" y1=\"" << fr.h - fr.mb << "\" x2=\""
    << fr.w - fr.mr << "\" y2=\"" << fr.h - fr.mb << "\"/>\n"
    << "<line x1=\"" << fr.ml << "\" y1=\"" << fr.mt << "\" x2=\"" << fr.ml
    << "\" y2=\"" << fr.h - fr.mb << "\"/>\n</g>\n";
  // Ticks: 5 per axis.
  f << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#222\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = fr.x0 + (fr.x1 - fr.x0) * i / 4.0;
    const double y = fr.y0 + (fr.y1 - fr.y0) * i / 4.0;
    f << "<text x=\"" << fr.px(x) << "\" y=\"" << fr.h - fr.mb + 16
      << "\" text-anchor=\"middle\">" << fmt(x, 1) << "</text>\n";
    f << "<text x=\"" << fr.ml - 6 << "\" y=\"" << fr.py(y) + 4
      << "\" text-anchor=\"end\">" << fmt(y, 1) << "</text>\n";
  }
  f << "<text x=\"" << (fr.ml + fr.w - fr.mr) / 2 << "\" y=\"" << fr.h - 10
    << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  f << "<text x=\"14\" y=\"" << (fr.mt + fr.h - fr.mb) / 2
    << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
    << (fr.mt + fr.h - fr.mb) / 2 << ")\">" << ylabel << "</text>\n";
  f << "<text x=\"" << (fr.ml + fr.w - fr.mr) / 2 << "\" y=\"18\" "
    << "text-anchor=\"middle\" font-size=\"13\">" << title << "</text>\n</g>\n";
}

std::string metric_label(const std::string& metric) {
  if (metric == "dsc3d") return "3D DSC (%)";
  if (metric == "dsc2d") return "2D DSC (%)";
  if (metric == "hd3d") return "3D HD95 (mm)";
  if (metric == "hd2d") return "2D HD95 (mm)";
  return metric;
}

}  // namespace

void write_learning_curve_svg(const loop::AggregateSummary& summary,
                              const PlotSpec& spec, const fs::path& out_file) {
  const auto& by_cycle = by_cycle_map(summary, spec.metric);
  const auto names = experiment_names(summary);
  if (names.empty()) throw std::invalid_argument("plot: no experiments");

  struct Pt {
    double x, mean, lo, hi;
  };
  std::map<std::string, std::vector<Pt>> series;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& name : names) {
    for (const auto& [key, vals] : by_cycle) {
      if (key.experiment != name || vals.empty()) continue;
      if (!spec.include_cycle0 && key.cycle == 0) continue;
      const auto ls = summary.labelled_size.find(key);
      const double x = spec.x_labelled_size && ls != summary.labelled_size.end()
                           ? static_cast<double>(ls->second.front())
                           : static_cast<double>(key.cycle);
      const double m = eval::mean(vals);
      const double ci = vals.size() >= 2 ? eval::ci95_half_width(vals) : 0.0;
      series[name].push_back({x, m, m - ci, m + ci});
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, m - ci);
      ymax = std::max(ymax, m + ci);
    }
    std::sort(series[name].begin(), series[name].end(),
              [](const Pt& a, const Pt& b) { return a.x < b.x; });
  }
  if (xmin >= xmax) xmax = xmin + 1;
  const double pad = std::max(1e-9, (ymax - ymin) * 0.08);
  Frame fr{xmin, xmax, ymin - pad, ymax + pad, spec.width, spec.height};

  std::ofstream f(out_file);
  if (!f) throw std::runtime_error("cannot write " + out_file.string());
  svg_header(f, fr.w, fr.h);
  svg_axes(f, fr, spec.x_labelled_size ? "labelled samples" : "cycle",
           metric_label(spec.metric), "Active learning curve");

  int ci = 0;
  for (const auto& name : names) {
    const auto& pts = series[name];
    if (pts.empty()) continue;
    const char* color = kPalette[ci % 8];
    // CI band.
    bool has_band = false;
    for (const auto& p : pts) has_band |= p.hi > p.lo;
    if (has_band && pts.size() >= 2) {
      std::string d = "M";
      bool first = true;
      for (const auto& p : pts) {
        d += (first ? "" : " L") + fmt(fr.px(p.x), 1) + " " + fmt(fr.py(p.lo), 1);
        first = false;
      }
      for (auto it = pts.rbegin(); it != pts.rend(); ++it)
        d += " L" + fmt(fr.px(it->x), 1) + " " + fmt(fr.py(it->hi), 1);
      f << "<path d=\"" << d << " Z\" fill=\"" << color
        << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    }
    f << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& p : pts) f << fmt(fr.px(p.x), 1) << "," << fmt(fr.py(p.mean), 1) << " ";
    f << "\"/>\n";
    for (const auto& p : pts)
      f << "<circle cx=\"" << fmt(fr.px(p.x), 1) << "\" cy=\"" << fmt(fr.py(p.mean), 1)
        << "\" r=\"2.6\" fill=\"" << color << "\"/>\n";
    f << "<text x=\"" << fr.w - fr.mr - 6 << "\" y=\"" << fr.mt + 16 + 16 * ci
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\""
      << color << "\">" << name << "</text>\n";
    ++ci;
  }
  f << "</svg>\n";
}

void write_box_plot_svg(const loop::AggregateSummary& summary,
                        const PlotSpec& spec, const fs::path& out_file) {
  const auto& overall = overall_map(summary, spec.metric);
  const auto names = experiment_names(summary);
  if (names.empty()) throw std::invalid_argument("plot: no experiments");

  double ymin = 1e300, ymax = -1e300;
  std::map<std::string, std::vector<double>> data;
  for (const auto& name : names) {
    const auto it = overall.find(name);
    if (it == overall.end() || it->second.empty()) continue;
    auto v = it->second;
    std::sort(v.begin(), v.end());
    ymin = std::min(ymin, v.front());
    ymax = std::max(ymax, v.back());
    data[name] = std::move(v);
  }
  if (data.empty()) throw std::invalid_argument("plot: no data for metric");
  const double pad = std::max(1e-9, (ymax - ymin) * 0.08);
  Frame fr{-0.5, static_cast<double>(data.size()) - 0.5, ymin - pad, ymax + pad,
           spec.width, spec.height};

  std::ofstream f(out_file);
  if (!f) throw std::runtime_error("cannot write " + out_file.string());
  svg_header(f, fr.w, fr.h);
  svg_axes(f, fr, "strategy", metric_label(spec.metric), "Per-strategy spread");

  auto quantile = [](const std::vector<double>& v, double q) {
    const double r = q * (v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(r);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (r - lo) * (v[hi] - v[lo]);
  };

  int ci = 0;
  for (const auto& [name, v] : data) {
    const char* color = kPalette[ci % 8];
    const double x = static_cast<double>(ci);
    const double q1 = quantile(v, 0.25), q2 = quantile(v, 0.5), q3 = quantile(v, 0.75);
    const double wlo = v.front(), whi = v.back();
    const double bw = 0.32;
    f << "<rect x=\"" << fmt(fr.px(x - bw / 2), 1) << "\" y=\"" << fmt(fr.py(q3), 1)
      << "\" width=\"" << fmt(fr.px(x + bw / 2) - fr.px(x - bw / 2), 1)
      << "\" height=\"" << fmt(fr.py(q1) - fr.py(q3), 1) << "\" fill=\"" << color
      << "\" fill-opacity=\"0.35\" stroke=\"" << color << "\"/>\n";
    f << "<line x1=\"" << fmt(fr.px(x - bw / 2), 1) << "\" y1=\"" << fmt(fr.py(q2), 1)
      << "\" x2=\"" << fmt(fr.px(x + bw / 2), 1) << "\" y2=\"" << fmt(fr.py(q2), 1)
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    f << "<line x1=\"" << fmt(fr.px(x), 1) << "\" y1=\"" << fmt(fr.py(whi), 1)
      << "\" x2=\"" << fmt(fr.px(x), 1) << "\" y2=\"" << fmt(fr.py(q3), 1)
      << "\" stroke=\"" << color << "\"/>\n";
    f << "<line x1=\"" << fmt(fr.px(x), 1) << "\" y1=\"" << fmt(fr.py(q1), 1)
      << "\" x2=\"" << fmt(fr.px(x), 1) << "\" y2=\"" << fmt(fr.py(wlo), 1)
      << "\" stroke=\"" << color << "\"/>\n";
    f << "<text x=\"" << fmt(fr.px(x), 1) << "\" y=\"" << fr.h - fr.mb + 16
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
      << name << "</text>\n";
    ++ci;
  }
  f << "</svg>\n";
}

}  // namespace alseg::report
