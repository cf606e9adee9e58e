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

#include "craneppo/svg.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace craneppo {

SvgCanvas::SvgCanvas(double width_px, double height_px)
    : width_(width_px), height_(height_px) {}

void SvgCanvas::set_viewport(double x_min, double x_max, double y_min, double y_max,
                             double px_left, double px_top, double px_right,
                             double px_bottom) {
  x_min_ = x_min;
  x_max_ = (x_max == x_min) ? x_min + 1.0 : x_max;
  y_min_ = y_min;
  y_max_ = (y_max == y_min) ? y_min + 1.0 : y_max;
  px_left_ = px_left;
  px_top_ = px_top;
  px_right_ = px_right;
  px_bottom_ = px_bottom;
}

std::pair<double, double> SvgCanvas::to_px(double x, double y) const {
  const double fx = (x - x_min_) / (x_max_ - x_min_);
  const double fy = (y - y_min_) / (y_max_ - y_min_);
  return {px_left_ + fx * (px_right_ - px_left_),
          px_bottom_ - fy * (px_bottom_ - px_top_)};
}

void SvgCanvas::polyline(const std::vector<std::pair<double, double>>& pts,
                         const std::string& color, double stroke_width) {
  if (pts.empty()) return;
  std::ostringstream os;
  os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
     << stroke_width << "\" points=\"";
  for (const auto& [x, y] : pts) {
    const auto [px, py] = to_px(x, y);
    os << px << ',' << py << ' ';
  }
  os << "\"/>";
  body_.push_back(os.str());
}

void SvgCanvas::rect(double x_min, double y_min, double x_max, double y_max,
                     const std::string& fill, double opacity) {
  const auto [px0, py0] = to_px(x_min, y_max);
  const auto [px1, py1] = to_px(x_max, y_min);
  std::ostringstream os;
  os << "<rect x=\"" << px0 << "\" y=\"" << py0 << "\" width=\"" << px1 - px0
     << "\" height=\"" << py1 - py0 << "\" fill=\"" << fill << "\" fill-opacity=\""
     << opacity << "\"/>";
  body_.push_back(os.str());
}

void SvgCanvas::circle(double x, double y, double radius_px, const std::string& fill) {
  const auto [px, py] = to_px(x, y);
  std::ostringstream os;
  os << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"" << radius_px
     << "\" fill=\"" << fill << "\"/>";
  body_.push_back(os.str());
}

void SvgCanvas::text_px(double px, double py, const std::string& s, int font_size) {
  std::ostringstream os;
  os << "<text x=\"" << px << "\" y=\"" << py << "\" font-size=\"" << font_size
     << "\" font-family=\"sans-serif\">" << s << "</text>";
  body_.push_back(os.str());
}

void SvgCanvas::line_px(double x0, double y0, double x1, double y1,
                        const std::string& color, double stroke_width) {
  std::ostringstream os;
  os << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y1
     << "\" stroke=\"" << color << "\" stroke-width=\"" << stroke_width << "\"/>";
  body_.push_back(os.str());
}

void SvgCanvas::frame() {
  std::ostringstream os;
  os << "<rect x=\"" << px_left_ << "\" y=\"" << px_top_ << "\" width=\""
     << px_right_ - px_left_ << "\" height=\"" << px_bottom_ - px_top_
     << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>";
  body_.push_back(os.str());
}

void SvgCanvas::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write plot: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_
      << "\" height=\"" << height_ << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const std::string& item : body_) out << item << '\n';
  out << "</svg>\n";
}

}  // namespace craneppo
