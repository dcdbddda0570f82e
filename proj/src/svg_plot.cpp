#include "rdp/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>


namespace rdp {
namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 70;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream o;
  o.precision(4);
  o << v;
  return o.str();
}

void header(std::ostringstream& o, const std::string& title) {
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
    << "</text>\n";
}

void axes(std::ostringstream& o, const std::string& x_label, const std::string& y_label) {
  const double x0 = kLeft, y0 = kHeight - kBottom;
  o << "<line x1=\"" << x0 << "\" y1=\"" << kTop << "\" x2=\"" << x0 << "\" y2=\"" << y0
    << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << kWidth - kRight << "\" y2=\"" << y0
    << "\" stroke=\"black\"/>\n";
  if (!x_label.empty())
    o << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
      << escape(x_label) << "</text>\n";
  o << "<text x=\"16\" y=\"" << (kTop + y0) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (kTop + y0) / 2 << ")\">" << escape(y_label) << "</text>\n";
}

}  // namespace

std::string bar_chart_svg(const std::string& title, const std::string& y_label, const std::vector<Bar>& bars) {
  std::ostringstream o;
  header(o, title);
  axes(o, "", y_label);
  double lo = 0.0, hi = 0.0;
  for (const Bar& b : bars) {
    for (double v : {b.value, b.low, b.high}) {
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi == lo) hi = lo + 1.0;
  const double plot_h = kHeight - kBottom - kTop, plot_w = kWidth - kLeft - kRight;
  const auto ypix = [&](double v) { return kTop + (hi - v) / (hi - lo) * plot_h; };
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    o << "<text x=\"" << kLeft - 6 << "\" y=\"" << ypix(v) + 4 << "\" text-anchor=\"end\">" << num(v) << "</text>\n";
  }
  const double slot = bars.empty() ? plot_w : plot_w / static_cast<double>(bars.size());
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const Bar& b = bars[i];
    const double cx = kLeft + slot * (static_cast<double>(i) + 0.5);
    const double w = slot * 0.6;
    const double v = std::isfinite(b.value) ? b.value : hi;
    const double top = ypix(std::max(v, 0.0)), bottom = ypix(std::min(v, 0.0));
    o << "<rect x=\"" << cx - w / 2 << "\" y=\"" << top << "\" width=\"" << w << "\" height=\"" << bottom - top
      << "\" fill=\"" << kPalette[i % std::size(kPalette)] << "\"/>\n";
    if (std::isfinite(b.low) && std::isfinite(b.high) && b.high > b.low)
      o << "<line x1=\"" << cx << "\" y1=\"" << ypix(b.low) << "\" x2=\"" << cx << "\" y2=\"" << ypix(b.high)
        << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << cx << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\">" << escape(b.label)
      << "</text>\n"
      << "<text x=\"" << cx << "\" y=\"" << top - 4 << "\" text-anchor=\"middle\" font-size=\"10\">"
      << (std::isfinite(b.value) ? num(b.value) : std::string("inf")) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string loglog_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                             const std::vector<LineSeries>& series) {
  std::ostringstream o;
  header(o, title);
  axes(o, x_label, y_label);
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const LineSeries& s : series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!(s.x[i] > 0.0 && s.y[i] > 0.0) || !std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, std::log10(s.x[i]));
      xmax = std::max(xmax, std::log10(s.x[i]));
      ymin = std::min(ymin, std::log10(s.y[i]));
      ymax = std::max(ymax, std::log10(s.y[i]));
    }
  }
  if (!std::isfinite(xmin)) {
    o << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\">no positive data</text>\n"
      << "</svg>\n";
    return o.str();
  }
  if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
  if (ymax - ymin < 1e-12) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double plot_h = kHeight - kBottom - kTop, plot_w = kWidth - kLeft - kRight;
  const auto xp = [&](double lx) { return kLeft + (lx - xmin) / (xmax - xmin) * plot_w; };
  const auto yp = [&](double ly) { return kTop + (ymax - ly) / (ymax - ymin) * plot_h; };
  for (int e = static_cast<int>(std::ceil(xmin)); e <= static_cast<int>(std::floor(xmax)); ++e)
    o << "<text x=\"" << xp(e) << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\">1e" << e
      << "</text>\n";
  for (int e = static_cast<int>(std::ceil(ymin)); e <= static_cast<int>(std::floor(ymax)); ++e)
    o << "<text x=\"" << kLeft - 6 << "\" y=\"" << yp(e) + 4 << "\" text-anchor=\"end\">1e" << e << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const LineSeries& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!(s.x[i] > 0.0 && s.y[i] > 0.0) || !std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      o << xp(std::log10(s.x[i])) << ',' << yp(std::log10(s.y[i])) << ' ';
    }
    o << "\"/>\n"
      << "<text x=\"" << kLeft + 10 << "\" y=\"" << kTop + 14 + 16 * static_cast<double>(k) << "\" fill=\"" << color
      << "\">" << escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace rdp
