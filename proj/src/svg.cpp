#include "pitransfer/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace pitransfer {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

SvgBuilder::SvgBuilder(double width, double height) : width_(width), height_(height) {}

void SvgBuilder::rect(double x, double y, double w, double h, const std::string& fill,
                      const std::string& stroke, double stroke_width) {
  body_ << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w)
        << "\" height=\"" << fmt(h) << "\" fill=\"" << fill << "\"";
  if (!stroke.empty()) {
    body_ << " stroke=\"" << stroke << "\" stroke-width=\"" << fmt(stroke_width) << "\"";
  }
  body_ << "/>\n";
}

void SvgBuilder::circle(double cx, double cy, double r, const std::string& fill) {
  body_ << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy) << "\" r=\"" << fmt(r)
        << "\" fill=\"" << fill << "\"/>\n";
}

void SvgBuilder::line(double x1, double y1, double x2, double y2,
                      const std::string& stroke, double stroke_width) {
  body_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2)
        << "\" y2=\"" << fmt(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
        << fmt(stroke_width) << "\"/>\n";
}

void SvgBuilder::text(double x, double y, const std::string& content, int font_size,
                      const std::string& anchor, const std::string& fill) {
  body_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-size=\""
        << font_size << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor
        << "\" fill=\"" << fill << "\">" << escape(content) << "</text>\n";
}

void SvgBuilder::star(double cx, double cy, double outer_r, const std::string& fill) {
  body_ << "<polygon points=\"";
  const double inner_r = outer_r * 0.4;
  for (int k = 0; k < 10; ++k) {
    const double r = (k % 2 == 0) ? outer_r : inner_r;
    const double a = -std::numbers::pi / 2.0 + k * std::numbers::pi / 5.0;
    body_ << fmt(cx + r * std::cos(a)) << "," << fmt(cy + r * std::sin(a));
    if (k != 9) body_ << " ";
  }
  body_ << "\" fill=\"" << fill << "\" stroke=\"#000\" stroke-width=\"0.8\"/>\n";
}

std::string SvgBuilder::str() const {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width_)
      << "\" height=\"" << fmt(height_) << "\" viewBox=\"0 0 " << fmt(width_) << " "
      << fmt(height_) << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << fmt(width_) << "\" height=\""
      << fmt(height_) << "\" fill=\"#ffffff\"/>\n"
      << body_.str() << "</svg>\n";
  return out.str();
}

std::string colormap(double t) {
  t = std::clamp(t, 0.0, 1.0);
  // Piecewise-linear ramp through viridis-like anchor colours.
  static constexpr std::array<std::array<double, 3>, 5> stops{{
      {68, 1, 84},     // dark purple
      {59, 82, 139},   // blue
      {33, 145, 140},  // teal
      {94, 201, 98},   // green
      {253, 231, 37},  // yellow
  }};
  const double pos = t * (stops.size() - 1);
  const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(pos), stops.size() - 2);
  const double f = pos - i;
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                static_cast<int>(std::lround(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]))),
                static_cast<int>(std::lround(stops[i][1] + f * (stops[i + 1][1] - stops[i][1]))),
                static_cast<int>(std::lround(stops[i][2] + f * (stops[i + 1][2] - stops[i][2]))));
  return buf;
}

}  // namespace pitransfer
