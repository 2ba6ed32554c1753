#include "gibbslab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace gibbslab {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 610, kTop = 40, kBottom = 370;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const SweepResult& result, const PlotOptions& opts) {
  std::vector<std::string> quantities;
  for (const auto& r : result.rows)
    if (std::find(quantities.begin(), quantities.end(), r.quantity) ==
        quantities.end())
      quantities.push_back(r.quantity);

  double min_pos_x = std::numeric_limits<double>::infinity();
  for (const auto& r : result.rows)
    if (r.sweep_variable > 0.0) min_pos_x = std::min(min_pos_x, r.sweep_variable);
  if (!std::isfinite(min_pos_x)) min_pos_x = 1.0;

  auto xt = [&](double x) {
    if (!opts.log_x) return x;
    return std::log10(std::max(x, 0.0) + min_pos_x * 0.5);
  };

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& r : result.rows) {
    double x = xt(r.sweep_variable);
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    double lo = r.value - (r.std_err ? *r.std_err : 0.0);
    double hi = r.value + (r.std_err ? *r.std_err : 0.0);
    ymin = std::min(ymin, lo);
    ymax = std::max(ymax, hi);
  }
  if (result.rows.empty()) {
    xmin = 0; xmax = 1; ymin = 0; ymax = 1;
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) {
    return kLeft + (xt(x) - xmin) / (xmax - xmin) * (kRight - kLeft);
  };
  auto py = [&](double y) {
    return kBottom - (y - ymin) / (ymax - ymin) * (kBottom - kTop);
  };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
    << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
    << kHeight << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << (kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" "
       "font-family=\"sans-serif\" font-size=\"15\">"
    << escape_xml(opts.title) << "</text>\n";

  // axes
  s << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight
    << "\" y2=\"" << kBottom << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
    << "\" y2=\"" << kBottom << "\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 5; ++i) {
    double fx = xmin + i * (xmax - xmin) / 5.0;
    double gx = kLeft + i * (kRight - kLeft) / 5.0;
    double label = opts.log_x ? std::pow(10.0, fx) - min_pos_x * 0.5 : fx;
    s << "<line x1=\"" << gx << "\" y1=\"" << kBottom << "\" x2=\"" << gx
      << "\" y2=\"" << (kBottom + 5) << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << gx << "\" y=\"" << (kBottom + 20)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
      << fmt(label) << "</text>\n";

    double fy = ymin + i * (ymax - ymin) / 5.0;
    double gy = kBottom - i * (kBottom - kTop) / 5.0;
    s << "<line x1=\"" << (kLeft - 5) << "\" y1=\"" << gy << "\" x2=\"" << kLeft
      << "\" y2=\"" << gy << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << (kLeft - 8) << "\" y=\"" << (gy + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << fmt(fy) << "</text>\n";
  }
  s << "<text x=\"" << (kWidth / 2) << "\" y=\"" << (kHeight - 8)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
    << escape_xml(opts.x_label) << (opts.log_x ? " (log scale)" : "")
    << "</text>\n";
  s << "<text x=\"16\" y=\"" << ((kTop + kBottom) / 2)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
       "transform=\"rotate(-90 16 " << ((kTop + kBottom) / 2) << ")\">"
    << escape_xml(opts.y_label) << "</text>\n";

  int color_idx = 0;
  for (const auto& q : quantities) {
    const char* color = kPalette[color_idx % 8];
    auto rows = result.rows_for(q);
    std::ostringstream pts;
    for (const auto* r : rows) pts << px(r->sweep_variable) << ',' << py(r->value) << ' ';
    s << "<polyline fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
    for (const auto* r : rows) {
      s << "<circle cx=\"" << px(r->sweep_variable) << "\" cy=\"" << py(r->value)
        << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
      if (r->std_err && *r->std_err > 0.0) {
        double gx = px(r->sweep_variable);
        s << "<line x1=\"" << gx << "\" y1=\"" << py(r->value - *r->std_err)
          << "\" x2=\"" << gx << "\" y2=\"" << py(r->value + *r->std_err)
          << "\" stroke=\"" << color << "\" stroke-width=\"1\"/>\n";
      }
    }
    double ly = kTop + 14 + 16 * color_idx;
    s << "<line x1=\"" << (kRight - 150) << "\" y1=\"" << ly << "\" x2=\""
      << (kRight - 130) << "\" y2=\"" << ly << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << (kRight - 125) << "\" y=\"" << (ly + 4)
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape_xml(q)
      << "</text>\n";
    ++color_idx;
  }
  s << "</svg>\n";
  return s.str();
}

void write_svg_file(const std::string& path, const SweepResult& result,
                    const PlotOptions& opts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << render_svg(result, opts);
}

}  // namespace gibbslab
