#include "lanlab/harness/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace lanlab::harness {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Maps data coordinates into the plot rectangle and draws axes.
class Canvas {
 public:
  Canvas(double x0, double x1, double y0, double y1, bool log_x = false, bool log_y = false)
      : log_x_(log_x), log_y_(log_y) {
    x0_ = tx(x0), x1_ = tx(x1), y0_ = ty(y0), y1_ = ty(y1);
    if (!(x1_ > x0_)) x1_ = x0_ + 1.0;
    if (!(y1_ > y0_)) y1_ = y0_ + 1.0;
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
         << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
         << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }

  double px(double x) const { return kLeft + (tx(x) - x0_) / (x1_ - x0_) * (kWidth - kLeft - kRight); }
  double py(double y) const {
    return kHeight - kBottom - (ty(y) - y0_) / (y1_ - y0_) * (kHeight - kTop - kBottom);
  }

  void axes(const std::string& title, const std::string& xl, const std::string& yl) {
    const double bx = kHeight - kBottom;
    out_ << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight
         << "\" height=\"" << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double fx = x0_ + (x1_ - x0_) * i / 4.0;
      const double fy = y0_ + (y1_ - y0_) * i / 4.0;
      const double sx = kLeft + (kWidth - kLeft - kRight) * i / 4.0;
      const double sy = bx - (kHeight - kTop - kBottom) * i / 4.0;
      out_ << "<text x=\"" << num(sx) << "\" y=\"" << bx + 16 << "\" text-anchor=\"middle\">"
           << num(log_x_ ? std::pow(10.0, fx) : fx) << "</text>\n";
      out_ << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(sy + 4) << "\" text-anchor=\"end\">"
           << num(log_y_ ? std::pow(10.0, fy) : fy) << "</text>\n";
    }
    out_ << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
         << escape(title) << "</text>\n";
    out_ << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
         << escape(xl) << "</text>\n";
    out_ << "<text x=\"16\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
         << kHeight / 2 << ")\">" << escape(yl) << "</text>\n";
  }

  void polyline(const std::vector<double>& xs, const std::vector<double>& ys, const char* color,
                bool markers = true) {
    std::ostringstream pts;
    std::size_t drawn = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!usable(xs[i], ys[i])) continue;
      pts << num(px(xs[i])) << ',' << num(py(ys[i])) << ' ';
      ++drawn;
      if (markers) {
        out_ << "<circle cx=\"" << num(px(xs[i])) << "\" cy=\"" << num(py(ys[i])) << "\" r=\"3\" fill=\""
             << color << "\"/>\n";
      }
    }
    if (drawn > 1) {
      out_ << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << color
           << "\" stroke-width=\"1.5\"/>\n";
    }
  }

  void points(const std::vector<double>& xs, const std::vector<double>& ys, const char* color) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!usable(xs[i], ys[i])) continue;
      out_ << "<circle cx=\"" << num(px(xs[i])) << "\" cy=\"" << num(py(ys[i])) << "\" r=\"2\" fill=\""
           << color << "\" fill-opacity=\"0.6\"/>\n";
    }
  }

  void rect(double xa, double xb, double height, const char* color) {
    const double top = py(height), base = py(0.0);
    out_ << "<rect x=\"" << num(px(xa)) << "\" y=\"" << num(top) << "\" width=\"" << num(px(xb) - px(xa))
         << "\" height=\"" << num(base - top) << "\" fill=\"" << color << "\" stroke=\"white\"/>\n";
  }

  void legend(const std::vector<std::string>& labels) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const double y = kTop + 16 + 16 * static_cast<double>(i);
      out_ << "<rect x=\"" << kWidth - kRight - 150 << "\" y=\"" << y - 9 << "\" width=\"10\" height=\"10\" fill=\""
           << kColors[i % 6] << "\"/>\n<text x=\"" << kWidth - kRight - 135 << "\" y=\"" << y << "\">"
           << escape(labels[i]) << "</text>\n";
    }
  }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  double tx(double x) const { return log_x_ ? std::log10(x) : x; }
  double ty(double y) const { return log_y_ ? std::log10(y) : y; }
  bool usable(double x, double y) const {
    return std::isfinite(x) && std::isfinite(y) && (!log_x_ || x > 0.0) && (!log_y_ || y > 0.0);
  }

  bool log_x_, log_y_;
  double x0_, x1_, y0_, y1_;
  std::ostringstream out_;
};

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

std::vector<double> finite_sorted(std::span<const double> values) {
  std::vector<double> v;
  for (double x : values) {
    if (std::isfinite(x)) v.push_back(x);
  }
  if (v.empty()) throw std::invalid_argument("plot: no finite values");
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

std::string histogram_svg(std::span<const double> values, const std::string& title, std::size_t bins) {
  const auto v = finite_sorted(values);
  const double lo = std::min(v.front(), -4.0), hi = std::max(v.back(), 4.0);
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<double> heights(bins, 0.0);
  for (double x : v) {
    auto k = static_cast<std::size_t>((x - lo) / width);
    heights[std::min(k, bins - 1)] += 1.0 / (static_cast<double>(v.size()) * width);
  }
  const double top = std::max(*std::max_element(heights.begin(), heights.end()), normal_pdf(0.0)) * 1.1;
  Canvas c(lo, hi, 0.0, top);
  c.axes(title, "value", "density");
  for (std::size_t k = 0; k < bins; ++k) c.rect(lo + width * k, lo + width * (k + 1), heights[k], "#9ecae1");
  std::vector<double> xs, ys;
  for (int i = 0; i <= 200; ++i) {
    const double x = lo + (hi - lo) * i / 200.0;
    xs.push_back(x);
    ys.push_back(normal_pdf(x));
  }
  c.polyline(xs, ys, kColors[1], false);
  c.legend({"sample", "N(0,1) density"});
  return c.finish();
}

std::string qq_svg(std::span<const double> values, const std::string& title) {
  const auto v = finite_sorted(values);
  const boost::math::normal_distribution<> n01;
  std::vector<double> theo(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    theo[i] = boost::math::quantile(n01, (static_cast<double>(i) + 0.5) / static_cast<double>(v.size()));
  }
  const double lo = std::min(theo.front(), v.front()), hi = std::max(theo.back(), v.back());
  Canvas c(lo, hi, lo, hi);
  c.axes(title, "normal quantile", "sample quantile");
  c.polyline({lo, hi}, {lo, hi}, kColors[1], false);
  c.points(theo, v, kColors[0]);
  return c.finish();
}

std::string line_svg(const std::vector<Series>& series, const LinePlotOptions& options) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto ok_x = [&](double x) { return std::isfinite(x) && (!options.log_x || x > 0.0); };
  auto ok_y = [&](double y) { return std::isfinite(y) && (!options.log_y || y > 0.0); };
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!ok_x(s.x[i]) || !ok_y(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]), x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]), y1 = std::max(y1, s.y[i]);
    }
  }
  if (ok_y(options.reference_y)) y0 = std::min(y0, options.reference_y), y1 = std::max(y1, options.reference_y);
  if (!std::isfinite(x0) || !std::isfinite(y0)) throw std::invalid_argument("plot: no drawable points");
  if (!options.log_y) {
    const double pad = 0.05 * (y1 - y0 > 0.0 ? y1 - y0 : std::fabs(y0) + 1.0);
    y0 -= pad, y1 += pad;
  } else if (y1 <= y0) {
    y0 /= 2.0, y1 *= 2.0;
  }
  if (x1 <= x0) {
    x0 = options.log_x ? x0 / 2.0 : x0 - 1.0;
    x1 = options.log_x ? x1 * 2.0 : x1 + 1.0;
  }
  Canvas c(x0, x1, y0, y1, options.log_x, options.log_y);
  c.axes(options.title, options.x_label, options.y_label);
  if (ok_y(options.reference_y)) c.polyline({x0, x1}, {options.reference_y, options.reference_y}, "#999999", false);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < series.size(); ++i) {
    c.polyline(series[i].x, series[i].y, kColors[i % 6]);
    labels.push_back(series[i].label);
  }
  c.legend(labels);
  return c.finish();
}

}  // namespace lanlab::harness
