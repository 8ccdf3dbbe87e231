#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "patenthan/error.hpp"
#include "patenthan/pipeline.hpp"

namespace patenthan {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

void open_svg(std::ostream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
      << "</text>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight << "\" y2=\""
      << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kHeight - kBottom
      << "\" stroke=\"black\"/>\n";
}

void legend(std::ostream& out, std::size_t i, const std::string& name, const std::string& color) {
  const double y = kTop + 14.0 * static_cast<double>(i);
  out << "<rect x=\"" << kWidth - kRight - 150 << "\" y=\"" << y - 9 << "\" width=\"10\" height=\"10\" fill=\"" << color
      << "\"/>\n";
  out << "<text x=\"" << kWidth - kRight - 135 << "\" y=\"" << y << "\">" << escape(name) << "</text>\n";
}

void axis_labels(std::ostream& out, double x_lo, double x_hi, double y_hi, const std::string& x_label) {
  const double plot_w = kWidth - kLeft - kRight;
  for (int t = 0; t <= 4; ++t) {
    const double x = kLeft + plot_w * t / 4.0;
    out << "<text x=\"" << num(x) << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\">"
        << num(x_lo + (x_hi - x_lo) * t / 4.0) << "</text>\n";
  }
  out << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + 4 << "\" text-anchor=\"end\">" << num(y_hi) << "</text>\n";
  out << "<text x=\"" << kLeft - 6 << "\" y=\"" << kHeight - kBottom << "\" text-anchor=\"end\">0</text>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">" << escape(x_label)
      << "</text>\n";
}

}  // namespace

void write_histogram_svg(std::ostream& out, const std::string& title, std::span<const HistogramSeries> series,
                         double lo, double hi, std::size_t bins) {
  if (bins < 1 || !(hi > lo)) throw InvalidInput("histogram needs bins >= 1 and hi > lo");
  // Densities (fraction of each series per bin) so groups of different sizes compare.
  std::vector<std::vector<double>> density(series.size(), std::vector<double>(bins, 0.0));
  double y_max = 0.0;
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& values = series[s].values;
    for (double v : values) {
      auto b = static_cast<std::ptrdiff_t>(std::floor((v - lo) / (hi - lo) * static_cast<double>(bins)));
      b = std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(bins) - 1);
      density[s][static_cast<std::size_t>(b)] += 1.0;
    }
    for (double& d : density[s]) {
      if (!values.empty()) d /= static_cast<double>(values.size());
      y_max = std::max(y_max, d);
    }
  }
  if (y_max == 0.0) y_max = 1.0;

  open_svg(out, title);
  const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
  const double bin_w = plot_w / static_cast<double>(bins);
  const double bar_w = bin_w / static_cast<double>(std::max<std::size_t>(series.size(), 1));
  for (std::size_t s = 0; s < series.size(); ++s) {
    for (std::size_t b = 0; b < bins; ++b) {
      const double h = plot_h * density[s][b] / y_max;
      out << "<rect x=\"" << num(kLeft + bin_w * static_cast<double>(b) + bar_w * static_cast<double>(s)) << "\" y=\""
          << num(kHeight - kBottom - h) << "\" width=\"" << num(bar_w) << "\" height=\"" << num(h) << "\" fill=\""
          << series[s].color << "\" fill-opacity=\"0.8\"/>\n";
    }
    legend(out, s, series[s].name + " (n=" + std::to_string(series[s].values.size()) + ")", series[s].color);
  }
  axis_labels(out, lo, hi, y_max, "normalized attention score");
  out << "</svg>\n";
}

void write_line_chart_svg(std::ostream& out, const std::string& title, const std::string& x_label,
                          std::span<const LineSeries> series) {
  double x_lo = 0, x_hi = 1, y_hi = 0;
  bool first = true;
  for (const auto& s : series) {
    for (auto [x, y] : s.points) {
      if (first) {
        x_lo = x_hi = x;
        first = false;
      }
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_hi = std::max(y_hi, y);
    }
  }
  if (x_hi == x_lo) x_hi = x_lo + 1;
  if (y_hi <= 0) y_hi = 1;

  open_svg(out, title);
  const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
  for (std::size_t s = 0; s < series.size(); ++s) {
    out << "<polyline fill=\"none\" stroke=\"" << series[s].color << "\" stroke-width=\"1.5\" points=\"";
    for (auto [x, y] : series[s].points) {
      out << num(kLeft + plot_w * (x - x_lo) / (x_hi - x_lo)) << ',' << num(kHeight - kBottom - plot_h * y / y_hi)
          << ' ';
    }
    out << "\"/>\n";
    legend(out, s, series[s].name, series[s].color);
  }
  axis_labels(out, x_lo, x_hi, y_hi, x_label);
  out << "</svg>\n";
}

}  // namespace patenthan
