#include "pimdc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "pimdc/format.hpp"

namespace pimdc {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string escape(const std::string& text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

std::string LineChart::render() const {
  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  bool first = true;
  std::set<double> x_values;
  for (const auto& s : series) {
    for (auto [x, y] : s.points) {
      double px = log_x ? std::log10(std::max(x, 1e-30)) : x;
      if (first) {
        x_min = x_max = px;
        y_min = y_max = y;
        first = false;
      } else {
        x_min = std::min(x_min, px);
        x_max = std::max(x_max, px);
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
      }
      x_values.insert(x);
    }
  }
  if (x_max - x_min < 1e-12) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  if (y_max - y_min < 1e-12) {
    y_min -= 0.5;
    y_max += 0.5;
  }
  double y_pad = (y_max - y_min) * 0.05;
  y_min -= y_pad;
  y_max += y_pad;

  double plot_w = kWidth - kLeft - kRight;
  double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double x) {
    double px = log_x ? std::log10(std::max(x, 1e-30)) : x;
    return kLeft + (px - x_min) / (x_max - x_min) * plot_w;
  };
  auto sy = [&](double y) {
    return kTop + plot_h - (y - y_min) / (y_max - y_min) * plot_h;
  };

  char buf[512];
  std::string out;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
                "viewBox=\"0 0 %g %g\" font-family=\"sans-serif\" font-size=\"12\">\n",
                kWidth, kHeight, kWidth, kHeight);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">%s</text>\n",
                kLeft + plot_w / 2, escape(title).c_str());
  out += buf;

  // Axis frame.
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n"
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n",
                kLeft, kTop + plot_h, kLeft + plot_w, kTop + plot_h, kLeft, kTop, kLeft,
                kTop + plot_h);
  out += buf;

  // X ticks at the data points when few, else evenly spaced.
  std::vector<double> x_ticks;
  if (x_values.size() <= 8) {
    x_ticks.assign(x_values.begin(), x_values.end());
  } else {
    for (int i = 0; i <= 5; ++i) {
      double px = x_min + (x_max - x_min) * i / 5.0;
      x_ticks.push_back(log_x ? std::pow(10.0, px) : px);
    }
  }
  for (double x : x_ticks) {
    double cx = sx(x);
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n"
                  "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%s</text>\n",
                  cx, kTop + plot_h, cx, kTop + plot_h + 5, cx, kTop + plot_h + 20,
                  format_g6(x).c_str());
    out += buf;
  }
  for (int i = 0; i <= 4; ++i) {
    double y = y_min + (y_max - y_min) * i / 4.0;
    double cy = sy(y);
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n"
                  "<text x=\"%g\" y=\"%g\" text-anchor=\"end\">%s</text>\n",
                  kLeft - 5, cy, kLeft, cy, kLeft - 8, cy + 4, format_g6(y).c_str());
    out += buf;
  }

  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%s</text>\n",
                kLeft + plot_w / 2, kHeight - 12, escape(x_label).c_str());
  out += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"16\" y=\"%g\" text-anchor=\"middle\" transform=\"rotate(-90 16 %g)\">%s</text>\n",
                kTop + plot_h / 2, kTop + plot_h / 2, escape(y_label).c_str());
  out += buf;

  for (std::size_t si = 0; si < series.size(); ++si) {
    const char* color = kPalette[si % (sizeof kPalette / sizeof kPalette[0])];
    std::string points;
    for (auto [x, y] : series[si].points) {
      std::snprintf(buf, sizeof buf, "%g,%g ", sx(x), sy(y));
      points += buf;
    }
    std::snprintf(buf, sizeof buf,
                  "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"1.5\" points=\"%s\"/>\n",
                  color, points.c_str());
    out += buf;
    for (auto [x, y] : series[si].points) {
      std::snprintf(buf, sizeof buf, "<circle cx=\"%g\" cy=\"%g\" r=\"2.5\" fill=\"%s\"/>\n",
                    sx(x), sy(y), color);
      out += buf;
    }
    if (!series[si].label.empty()) {
      double ly = kTop + 14 + 16 * static_cast<double>(si);
      std::snprintf(buf, sizeof buf,
                    "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"%s\" stroke-width=\"2\"/>\n"
                    "<text x=\"%g\" y=\"%g\">%s</text>\n",
                    kLeft + plot_w - 120, ly - 4, kLeft + plot_w - 100, ly - 4, color,
                    kLeft + plot_w - 94, ly, escape(series[si].label).c_str());
      out += buf;
    }
  }

  out += "</svg>\n";
  return out;
}

}  // namespace pimdc
