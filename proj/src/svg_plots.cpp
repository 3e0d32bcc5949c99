#include "ecbf/svg_plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <stdexcept>

namespace ecbf {

namespace {

constexpr double kWidth = 800.0;
constexpr double kPanelHeight = 260.0;
constexpr double kMargin = 50.0;

const char* mode_color(ControllerMode m) {
  switch (m) {
    case ControllerMode::nominal:
      return "#d62728";
    case ControllerMode::robust_socp:
      return "#1f77b4";
    case ControllerMode::proposed:
      return "#2ca02c";
  }
  return "#000000";
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Maps data coordinates into one panel of the canvas.
struct Axes {
  double x0, x1, y0, y1;  // data range
  double top;             // panel offset on the canvas

  double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin); }
  double py(double y) const {
    return top + kPanelHeight - kMargin + (y - y0) / (y1 - y0) * (2 * kMargin - kPanelHeight);
  }
};

class Svg {
 public:
  explicit Svg(double height) {
    body_ += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
             num(height) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(height) + "\">\n";
    body_ += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(height) +
             "\" fill=\"white\"/>\n";
  }

  void text(double x, double y, const std::string& s, const char* anchor = "start") {
    body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) +
             "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"" + anchor + "\">" + s +
             "</text>\n";
  }

  void line(double x0, double y0, double x1, double y1, const std::string& stroke,
            const std::string& extra = "") {
    body_ += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x1) + "\" y2=\"" +
             num(y1) + "\" stroke=\"" + stroke + "\" " + extra + "/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& stroke) {
    body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" +
             num(h) + "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\"/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                const std::string& extra = "") {
    body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" " + extra + " points=\"";
    for (const auto& [x, y] : pts) body_ += num(x) + "," + num(y) + " ";
    body_ += "\"/>\n";
  }

  void ellipse(double cx, double cy, double rx, double ry, const std::string& stroke) {
    body_ += "<ellipse cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" rx=\"" + num(rx) +
             "\" ry=\"" + num(ry) + "\" fill=\"none\" stroke=\"" + stroke +
             "\" stroke-dasharray=\"4,3\"/>\n";
  }

  void frame(const Axes& ax, const std::string& title, const std::string& xlabel,
             const std::string& ylabel) {
    rect(kMargin, ax.top + kMargin, kWidth - 2 * kMargin, kPanelHeight - 2 * kMargin, "none",
         "#444444");
    text(kWidth / 2, ax.top + kMargin - 15, title, "middle");
    text(kWidth / 2, ax.top + kPanelHeight - 12, xlabel, "middle");
    text(8, ax.top + kPanelHeight / 2, ylabel);
    text(kMargin, ax.top + kPanelHeight - kMargin + 14, num(ax.x0), "middle");
    text(kWidth - kMargin, ax.top + kPanelHeight - kMargin + 14, num(ax.x1), "middle");
    text(kMargin - 4, ax.py(ax.y0), num(ax.y0), "end");
    text(kMargin - 4, ax.py(ax.y1) + 10, num(ax.y1), "end");
  }

  void legend(const std::vector<SimLog>& logs, double top) {
    double x = kWidth - kMargin - 110.0;
    double y = top + kMargin + 14;
    for (const SimLog& log : logs) {
      line(x, y - 4, x + 20, y - 4, mode_color(log.mode), "stroke-width=\"2\"");
      text(x + 26, y, to_string(log.mode));
      y += 16;
    }
  }

  void save(const std::filesystem::path& path) {
    body_ += "</svg>\n";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write SVG '" + path.string() + "'");
    f << body_;
    if (!f) throw std::runtime_error("error while writing SVG '" + path.string() + "'");
  }

 private:
  std::string body_;
};

// Expands a degenerate or empty range so that the axis mapping stays finite.
void pad_range(double& lo, double& hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    lo = -1.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-9) {
    lo -= 0.5;
    hi += 0.5;
  }
}

std::pair<double, double> time_range(const std::vector<SimLog>& logs) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const SimLog& log : logs) {
    for (const StepRecord& r : log.steps) {
      lo = std::min(lo, r.t);
      hi = std::max(hi, r.t);
    }
  }
  pad_range(lo, hi);
  return {lo, hi};
}

std::pair<double, double> value_range(const std::vector<SimLog>& logs,
                                      const std::function<double(const StepRecord&)>& get,
                                      bool include_zero) {
  double lo = include_zero ? 0.0 : std::numeric_limits<double>::infinity();
  double hi = include_zero ? 0.0 : -std::numeric_limits<double>::infinity();
  for (const SimLog& log : logs) {
    for (const StepRecord& r : log.steps) {
      lo = std::min(lo, get(r));
      hi = std::max(hi, get(r));
    }
  }
  pad_range(lo, hi);
  return {lo, hi};
}

void time_series(Svg& svg, const Axes& ax, const std::vector<SimLog>& logs,
                 const std::function<double(const StepRecord&)>& get,
                 const std::string& extra = "") {
  for (const SimLog& log : logs) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(log.steps.size());
    for (const StepRecord& r : log.steps) pts.emplace_back(ax.px(r.t), ax.py(get(r)));
    svg.polyline(pts, mode_color(log.mode), "stroke-width=\"1.5\" " + extra);
  }
}

}  // namespace

PlotBounds trajectory_bounds(const std::vector<SimLog>& logs, const EllipseParams& ellipse) {
  PlotBounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
               std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const SimLog& log : logs) {
    for (const StepRecord& r : log.steps) {
      b.x_min = std::min({b.x_min, r.ego.X, r.obstacle.X});
      b.x_max = std::max({b.x_max, r.ego.X, r.obstacle.X});
      b.y_min = std::min({b.y_min, r.ego.Y, r.obstacle.Y});
      b.y_max = std::max({b.y_max, r.ego.Y, r.obstacle.Y});
    }
  }
  pad_range(b.x_min, b.x_max);
  pad_range(b.y_min, b.y_max);
  b.x_min -= ellipse.r_a;
  b.x_max += ellipse.r_a;
  b.y_min -= ellipse.r_b;
  b.y_max += ellipse.r_b;
  return b;
}

std::vector<std::filesystem::path> render_plots(const std::vector<SimLog>& logs,
                                                const EllipseParams& ellipse,
                                                const std::filesystem::path& prefix) {
  if (logs.empty()) throw std::invalid_argument("render_plots: no logs");
  std::vector<std::filesystem::path> written;
  auto out_path = [&](const std::string& suffix) {
    return std::filesystem::path(prefix.string() + suffix);
  };

  // Trajectories, one panel per controller, with obstacle ellipses at evenly spaced times.
  {
    const PlotBounds b = trajectory_bounds(logs, ellipse);
    Svg svg(kPanelHeight * static_cast<double>(logs.size()));
    for (std::size_t i = 0; i < logs.size(); ++i) {
      const SimLog& log = logs[i];
      const Axes ax{b.x_min, b.x_max, b.y_min, b.y_max, kPanelHeight * static_cast<double>(i)};
      svg.frame(ax, std::string("trajectories: ") + to_string(log.mode), "X [m]", "Y [m]");
      std::vector<std::pair<double, double>> ego, obs;
      for (const StepRecord& r : log.steps) {
        ego.emplace_back(ax.px(r.ego.X), ax.py(r.ego.Y));
        obs.emplace_back(ax.px(r.obstacle.X), ax.py(r.obstacle.Y));
      }
      svg.polyline(obs, "#7f7f7f", "stroke-width=\"1.5\"");
      svg.polyline(ego, mode_color(log.mode), "stroke-width=\"2\"");
      const std::size_t n = log.steps.size();
      const std::size_t stride = std::max<std::size_t>(1, n / 5);
      for (std::size_t k = 0; k < n; k += stride) {
        const StepRecord& r = log.steps[k];
        const double rx = std::abs(ax.px(r.obstacle.X + ellipse.r_a) - ax.px(r.obstacle.X));
        const double ry = std::abs(ax.py(r.obstacle.Y + ellipse.r_b) - ax.py(r.obstacle.Y));
        svg.ellipse(ax.px(r.obstacle.X), ax.py(r.obstacle.Y), rx, ry, "#7f7f7f");
      }
    }
    const auto p = out_path("_trajectories.svg");
    svg.save(p);
    written.push_back(p);
  }

  const auto [t0, t1] = time_range(logs);

  // Barrier value with the safety threshold.
  {
    auto get = [](const StepRecord& r) { return r.H_true; };
    const auto [lo, hi] = value_range(logs, get, true);
    Svg svg(kPanelHeight);
    const Axes ax{t0, t1, lo, hi, 0.0};
    svg.frame(ax, "barrier value H along the true state", "t [s]", "H");
    svg.line(ax.px(t0), ax.py(0.0), ax.px(t1), ax.py(0.0), "#000000",
             "stroke-dasharray=\"6,4\" class=\"zero-line\"");
    time_series(svg, ax, logs, get);
    svg.legend(logs, 0.0);
    const auto p = out_path("_barrier.svg");
    svg.save(p);
    written.push_back(p);
  }

  // Slip angle (solid) and steering angle (dashed).
  {
    auto beta = [](const StepRecord& r) { return r.beta; };
    auto steer = [](const StepRecord& r) { return r.delta_f; };
    const auto [blo, bhi] = value_range(logs, beta, true);
    const auto [slo, shi] = value_range(logs, steer, true);
    Svg svg(kPanelHeight * 2);
    const Axes top{t0, t1, blo, bhi, 0.0};
    const Axes bottom{t0, t1, slo, shi, kPanelHeight};
    svg.frame(top, "slip angle beta", "t [s]", "rad");
    time_series(svg, top, logs, beta);
    svg.legend(logs, 0.0);
    svg.frame(bottom, "front steering angle delta_f", "t [s]", "rad");
    time_series(svg, bottom, logs, steer, "stroke-dasharray=\"5,3\"");
    const auto p = out_path("_steering.svg");
    svg.save(p);
    written.push_back(p);
  }

  // Solve-time box summary: whiskers at min/max, box at quartiles, bar at the median.
  if (logs.size() >= 2) {
    std::vector<std::vector<double>> samples;
    double hi = 0.0;
    for (const SimLog& log : logs) {
      std::vector<double> v;
      for (const StepRecord& r : log.steps) v.push_back(r.solve_us);
      std::sort(v.begin(), v.end());
      if (!v.empty()) hi = std::max(hi, v.back());
      samples.push_back(std::move(v));
    }
    double lo = 0.0;
    pad_range(lo, hi);
    Svg svg(kPanelHeight);
    const double n = static_cast<double>(logs.size());
    const Axes ax{0.0, n, lo, hi, 0.0};
    svg.frame(ax, "per-step solve time", "controller", "us");
    auto q = [](const std::vector<double>& v, double p) {
      if (v.empty()) return 0.0;
      const double pos = p * static_cast<double>(v.size() - 1);
      const auto i = static_cast<std::size_t>(pos);
      const auto j = std::min(i + 1, v.size() - 1);
      return v[i] + (pos - static_cast<double>(i)) * (v[j] - v[i]);
    };
    for (std::size_t i = 0; i < logs.size(); ++i) {
      const auto& v = samples[i];
      const double c = ax.px(static_cast<double>(i) + 0.5);
      const double w = 0.25 * (ax.px(1.0) - ax.px(0.0));
      const char* color = mode_color(logs[i].mode);
      svg.line(c, ax.py(q(v, 0.0)), c, ax.py(q(v, 1.0)), color);
      svg.rect(c - w / 2, ax.py(q(v, 0.75)), w, ax.py(q(v, 0.25)) - ax.py(q(v, 0.75)), "#eeeeee",
               color);
      svg.line(c - w / 2, ax.py(q(v, 0.5)), c + w / 2, ax.py(q(v, 0.5)), color,
               "stroke-width=\"2\"");
      svg.text(c, kPanelHeight - kMargin + 28, to_string(logs[i].mode), "middle");
    }
    const auto p = out_path("_solve_time.svg");
    svg.save(p);
    written.push_back(p);
  }
  return written;
}

}  // namespace ecbf
