// Copyright 2026 The micronip Authors. All Rights Reserved.
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

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "micronip/errors.hpp"
#include "micronip/io.hpp"

namespace micronip::io {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 90.0;
constexpr double kRight = 30.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 70.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                "#8c564b"};

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

// Comments may not contain "--".
std::string comment_safe(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '-' && !out.empty() && out.back() == '-') continue;
    out += c;
  }
  return out;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Axis {
  bool log = false;
  double lo = 0.0;
  double hi = 1.0;

  double map(double v) const {
    const double t = log ? std::log10(v) : v;
    return (t - lo) / (hi - lo);
  }
};

Axis make_axis(bool log, double lo, double hi) {
  Axis a;
  a.log = log;
  if (!(lo <= hi)) {
    lo = log ? 1.0 : 0.0;
    hi = log ? 10.0 : 1.0;
  }
  a.lo = log ? std::log10(lo) : lo;
  a.hi = log ? std::log10(hi) : hi;
  if (log) {
    a.lo = std::floor(a.lo);
    a.hi = std::ceil(a.hi);
    if (a.hi <= a.lo) a.hi = a.lo + 1.0;
  } else if (a.hi <= a.lo) {
    const double pad = a.lo == 0.0 ? 1.0 : 0.5 * std::abs(a.lo);
    a.lo -= pad;
    a.hi += pad;
  }
  return a;
}

bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

}  // namespace

std::string line_chart_svg(const ChartSpec& spec, const std::vector<Series>& series) {
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw InvalidArgument("series x/y length mismatch");
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!usable(s.x[k], spec.log_x) || !usable(s.y[k], spec.log_y)) continue;
      xmin = std::min(xmin, s.x[k]);
      xmax = std::max(xmax, s.x[k]);
      ymin = std::min(ymin, s.y[k]);
      ymax = std::max(ymax, s.y[k]);
    }
  }
  const Axis ax = make_axis(spec.log_x, xmin, xmax);
  const Axis ay = make_axis(spec.log_y, ymin, ymax);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  const auto sx = [&](double v) { return kLeft + ax.map(v) * pw; };
  const auto sy = [&](double v) { return kTop + (1.0 - ay.map(v)) * ph; };

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" "
         "width=\"800\" height=\"600\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<!-- micronip " + std::string(tool_version()) + " -->\n";
  for (const auto& s : series) {
    out += "<!-- data " + comment_safe(s.name) + ": x,y\n";
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      out += format_number(s.x[k]) + "," + format_number(s.y[k]) + "\n";
    }
    out += "-->\n";
  }
  out += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  out += "<rect x=\"" + px(kLeft) + "\" y=\"" + px(kTop) + "\" width=\"" + px(pw) +
         "\" height=\"" + px(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

  // Ticks: decades on log axes, five intervals on linear ones.
  const auto ticks = [](const Axis& a) {
    std::vector<double> t;
    if (a.log) {
      const int step = std::max(1, static_cast<int>(std::ceil((a.hi - a.lo) / 10.0)));
      for (int e = static_cast<int>(a.lo); e <= static_cast<int>(a.hi); e += step) {
        t.push_back(std::pow(10.0, e));
      }
    } else {
      for (int k = 0; k <= 5; ++k) t.push_back(a.lo + (a.hi - a.lo) * k / 5.0);
    }
    return t;
  };
  for (double v : ticks(ax)) {
    const double x = sx(v);
    out += "<line x1=\"" + px(x) + "\" y1=\"" + px(kTop + ph) + "\" x2=\"" + px(x) +
           "\" y2=\"" + px(kTop + ph + 5) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + px(x) + "\" y=\"" + px(kTop + ph + 20) +
           "\" text-anchor=\"middle\">" + format_human(v) + "</text>\n";
  }
  for (double v : ticks(ay)) {
    const double y = sy(v);
    out += "<line x1=\"" + px(kLeft - 5) + "\" y1=\"" + px(y) + "\" x2=\"" + px(kLeft) +
           "\" y2=\"" + px(y) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + px(kLeft - 8) + "\" y=\"" + px(y + 4) +
           "\" text-anchor=\"end\">" + format_human(v) + "</text>\n";
  }
  out += "<text x=\"400.00\" y=\"30.00\" text-anchor=\"middle\" font-size=\"16\">" +
         escape(spec.title) + "</text>\n";
  out += "<text x=\"" + px(kLeft + pw / 2) + "\" y=\"" + px(kHeight - 20) +
         "\" text-anchor=\"middle\">" + escape(spec.x_label) + "</text>\n";
  out += "<text x=\"20.00\" y=\"" + px(kTop + ph / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 20.00 " + px(kTop + ph / 2) +
         ")\">" + escape(spec.y_label) + "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    std::string pts;
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!usable(s.x[k], spec.log_x) || !usable(s.y[k], spec.log_y)) continue;
      if (!pts.empty()) pts += ' ';
      pts += px(sx(s.x[k])) + "," + px(sy(s.y[k]));
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    const double ly = kTop + 15.0 + 16.0 * static_cast<double>(i);
    out += "<text x=\"" + px(kLeft + pw - 10) + "\" y=\"" + px(ly) +
           "\" text-anchor=\"end\" fill=\"" + color + "\">" + escape(s.name) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace micronip::io
