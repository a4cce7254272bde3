#pragma once

#include <sstream>
#include <string>

namespace pitransfer {

/// Minimal SVG document builder; everything inline, no external assets.
class SvgBuilder {
 public:
  SvgBuilder(double width, double height);

  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& stroke = "", double stroke_width = 1.0);
  void circle(double cx, double cy, double r, const std::string& fill);
  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double stroke_width = 1.0);
  void text(double x, double y, const std::string& content, int font_size = 12,
            const std::string& anchor = "start", const std::string& fill = "#000");
  /// Five-pointed star centred at (cx, cy).
  void star(double cx, double cy, double outer_r, const std::string& fill);

  std::string str() const;

 private:
  double width_;
  double height_;
  std::ostringstream body_;
};

/// Maps t in [0, 1] to a dark-blue -> teal -> yellow ramp; "#rrggbb".
std::string colormap(double t);

}  // namespace pitransfer
