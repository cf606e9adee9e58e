// Copyright 2026 The craneppo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <utility>
#include <vector>

namespace craneppo {

// Minimal SVG canvas so plots need no rendering dependencies and the test
// suite stays headless. Data coordinates are mapped into a fixed pixel frame.
class SvgCanvas {
 public:
  SvgCanvas(double width_px, double height_px);

  // Data window mapped onto a pixel rectangle inside the canvas.
  void set_viewport(double x_min, double x_max, double y_min, double y_max,
                    double px_left, double px_top, double px_right, double px_bottom);

  void polyline(const std::vector<std::pair<double, double>>& pts,
                const std::string& color, double stroke_width = 1.5);
  void rect(double x_min, double y_min, double x_max, double y_max,
            const std::string& fill, double opacity = 1.0);
  void circle(double x, double y, double radius_px, const std::string& fill);
  void text_px(double px, double py, const std::string& s, int font_size = 12);
  void line_px(double x0, double y0, double x1, double y1, const std::string& color,
               double stroke_width = 1.0);
  void frame();  // border of the current viewport

  std::pair<double, double> to_px(double x, double y) const;
  void save(const std::string& path) const;

 private:
  double width_, height_;
  double x_min_ = 0, x_max_ = 1, y_min_ = 0, y_max_ = 1;
  double px_left_ = 0, px_top_ = 0, px_right_ = 1, px_bottom_ = 1;
  std::vector<std::string> body_;
};

}  // namespace craneppo
